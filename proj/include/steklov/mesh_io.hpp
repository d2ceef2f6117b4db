#pragma once

#include "steklov/mesh.hpp"

#include <filesystem>
#include <string>

namespace steklov {

// JSON interchange format:
//   {"vertices": [[x, y], ...],
//    "cells": [[i0, i1, ...], ...],                      counter-clockwise, 0-based
//    "boundary": [{"edge": [i, j], "tag": "gamma0"|"gamma1"}, ...]}
//
// For triangle meshes refined by newest-vertex bisection the first vertex of each
// cell is its newest vertex; the format preserves cell rotation.

std::string mesh_to_json(const PolygonalMesh& mesh);
PolygonalMesh mesh_from_json(const std::string& text);

PolygonalMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const PolygonalMesh& mesh, const std::filesystem::path& path);

/// Structural equality: same vertices, cells (same rotation) and boundary tags.
bool same_structure(const PolygonalMesh& a, const PolygonalMesh& b);

}  // namespace steklov
