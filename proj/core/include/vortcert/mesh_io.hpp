#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vortcert/geometry.hpp"

namespace vortcert {

/// vertices.csv (id,x,y,flag) and triangles.csv (v0,v1,v2) under `dir`.
void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir);

/// Legacy ASCII VTK unstructured grid with optional point data.
void write_vtk(const Mesh& mesh, const std::filesystem::path& path,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_data = {});

/// vertex id,value rows.
void write_field_csv(const std::filesystem::path& path, const Eigen::VectorXd& values,
                     const std::string& column = "value");
Eigen::VectorXd read_field_csv(const std::filesystem::path& path);

/// Shortest round-trip representation of a double.
std::string format_double(double x);

}  // namespace vortcert
