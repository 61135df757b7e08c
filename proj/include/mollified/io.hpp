#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mollified/fem.hpp"
#include "mollified/geometry.hpp"
#include "mollified/mesh.hpp"

namespace mollified {

// Seeds as CSV with header `x,y`. Throws IoError on unreadable files and
// ConfigError on malformed rows.
std::vector<Point> read_seeds_csv(const std::string& path);
void write_seeds_csv(const std::string& path, const std::vector<Point>& seeds);

// Vertex list (CCW) with header `x,y`.
void write_polygon_csv(const std::string& path, const ConvexPolygon& poly);

// One row per partition vertex: cell,label,block,vertex,x,y.
void write_mesh_csv(const std::string& path, const Mesh& mesh);
// Legacy ASCII VTK polydata of the partition polygons with label and block
// cell data.
void write_mesh_vtk(const std::string& path, const Mesh& mesh);

// Field sampled at the corners and midpoints of the integration triangles.
void write_solution_vtk(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& coeffs, int components);
// Rows x,y,u (plus v for two components) at the same samples.
void write_solution_csv(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& coeffs, int components);

struct ErrorRow {
  int n_c = 0;
  double h = 0.0;
  ErrorNorms errors;
  int n_dof = 0;
  double wall_time_ms = 0.0;
};

// Header n_c,h,L2,H1_semi,energy,n_dof,wall_time_ms.
void write_errors_csv(const std::string& path, const std::vector<ErrorRow>& rows);

// Shortest round-trip decimal form.
std::string format_double(double v);

} // namespace mollified
