// Catch2 main lives in the amalgamated translation unit; nothing to add here.
// This file exists so the static library has a project-owned TU.
