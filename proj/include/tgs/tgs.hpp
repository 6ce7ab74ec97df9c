#pragma once

#include "tgs/conflicts.hpp"
#include "tgs/core.hpp"
#include "tgs/delta.hpp"
#include "tgs/derive.hpp"
#include "tgs/dpg.hpp"
#include "tgs/graph.hpp"
#include "tgs/grammar.hpp"
#include "tgs/json_io.hpp"
#include "tgs/operational.hpp"
#include "tgs/pattern.hpp"
#include "tgs/precedence.hpp"
#include "tgs/restore.hpp"
#include "tgs/scenario.hpp"
#include "tgs/sync.hpp"
#include "tgs/types.hpp"
