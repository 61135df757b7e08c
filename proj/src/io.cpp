#include "mollified/io.hpp"

#include <charconv>
#include <fstream>

#include "mollified/errors.hpp"

namespace mollified {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("write to '" + path + "' failed");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& tok, const std::string& path, int line) {
  const std::string t = trim(tok);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError(path + ":" + std::to_string(line) + ": not a number: '" + t + "'");
  return v;
}

// Integration triangle nodes (corners and midpoints) of every cell.
std::vector<std::array<Point, 6>> sample_triangles(const Mesh& mesh) {
  std::vector<std::array<Point, 6>> out;
  for (const MeshCell& c : mesh.cells())
    for (const CurvedTriangle& t : c.triangles) out.push_back(t.nodes);
  return out;
}

} // namespace

std::vector<Point> read_seeds_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open seed file '" + path + "'");
  std::string line;
  int n = 0;
  if (!std::getline(f, line) || trim(line) != "x,y") throw ConfigError(path + ": expected header 'x,y'");
  ++n;
  std::vector<Point> seeds;
  while (std::getline(f, line)) {
    ++n;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ConfigError(path + ":" + std::to_string(n) + ": expected two columns");
    seeds.push_back({parse_number(line.substr(0, comma), path, n), parse_number(line.substr(comma + 1), path, n)});
  }
  if (seeds.empty()) throw ConfigError(path + ": no seeds");
  return seeds;
}

void write_seeds_csv(const std::string& path, const std::vector<Point>& seeds) {
  auto f = open_out(path);
  f << "x,y\n";
  for (Point p : seeds) f << format_double(p.x) << ',' << format_double(p.y) << '\n';
  finish(f, path);
}

void write_polygon_csv(const std::string& path, const ConvexPolygon& poly) {
  auto f = open_out(path);
  f << "x,y\n";
  for (Point p : poly.vertices()) f << format_double(p.x) << ',' << format_double(p.y) << '\n';
  finish(f, path);
}

void write_mesh_csv(const std::string& path, const Mesh& mesh) {
  auto f = open_out(path);
  f << "cell,label,block,vertex,x,y\n";
  int i = 0;
  for (const MeshCell& c : mesh.cells()) {
    int k = 0;
    for (Point p : c.cell.vertices())
      f << i << ',' << to_string(c.label) << ',' << c.block << ',' << k++ << ',' << format_double(p.x) << ','
        << format_double(p.y) << '\n';
    ++i;
  }
  finish(f, path);
}

void write_mesh_vtk(const std::string& path, const Mesh& mesh) {
  auto f = open_out(path);
  std::size_t npts = 0;
  for (const MeshCell& c : mesh.cells()) npts += c.cell.size();
  f << "# vtk DataFile Version 3.0\nmollified mesh\nASCII\nDATASET POLYDATA\n";
  f << "POINTS " << npts << " double\n";
  for (const MeshCell& c : mesh.cells())
    for (Point p : c.cell.vertices()) f << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  const std::size_t nc = mesh.cells().size();
  f << "POLYGONS " << nc << ' ' << nc + npts << '\n';
  std::size_t base = 0;
  for (const MeshCell& c : mesh.cells()) {
    f << c.cell.size();
    for (std::size_t k = 0; k < c.cell.size(); ++k) f << ' ' << base + k;
    f << '\n';
    base += c.cell.size();
  }
  f << "CELL_DATA " << nc << "\nSCALARS label int 1\nLOOKUP_TABLE default\n";
  for (const MeshCell& c : mesh.cells()) f << static_cast<int>(c.label) << '\n';
  f << "SCALARS block int 1\nLOOKUP_TABLE default\n";
  for (const MeshCell& c : mesh.cells()) f << c.block << '\n';
  finish(f, path);
}

void write_solution_vtk(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& coeffs, int components) {
  const auto tris = sample_triangles(mesh);
  auto f = open_out(path);
  f << "# vtk DataFile Version 3.0\nmollified solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << 6 * tris.size() << " double\n";
  for (const auto& t : tris)
    for (Point p : t) f << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  f << "CELLS " << tris.size() << ' ' << 7 * tris.size() << '\n';
  for (std::size_t i = 0; i < tris.size(); ++i) {
    f << 6;
    for (int k = 0; k < 6; ++k) f << ' ' << 6 * i + k;
    f << '\n';
  }
  f << "CELL_TYPES " << tris.size() << '\n';
  for (std::size_t i = 0; i < tris.size(); ++i) f << "22\n";
  f << "POINT_DATA " << 6 * tris.size() << '\n';
  if (components == 1)
    f << "SCALARS u double 1\nLOOKUP_TABLE default\n";
  else
    f << "VECTORS u double\n";
  for (const auto& t : tris)
    for (Point p : t) {
      const FieldValue v = evaluate_solution(mesh, coeffs, components, p);
      if (components == 1)
        f << format_double(v.u[0]) << '\n';
      else
        f << format_double(v.u[0]) << ' ' << format_double(v.u[1]) << " 0\n";
    }
  finish(f, path);
}

void write_solution_csv(const std::string& path, const Mesh& mesh, const Eigen::VectorXd& coeffs, int components) {
  auto f = open_out(path);
  f << (components == 1 ? "x,y,u\n" : "x,y,u,v\n");
  for (const auto& t : sample_triangles(mesh))
    for (Point p : t) {
      const FieldValue v = evaluate_solution(mesh, coeffs, components, p);
      f << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(v.u[0]);
      if (components == 2) f << ',' << format_double(v.u[1]);
      f << '\n';
    }
  finish(f, path);
}

void write_errors_csv(const std::string& path, const std::vector<ErrorRow>& rows) {
  auto f = open_out(path);
  f << "n_c,h,L2,H1_semi,energy,n_dof,wall_time_ms\n";
  for (const ErrorRow& r : rows)
    f << r.n_c << ',' << format_double(r.h) << ',' << format_double(r.errors.l2) << ','
      << format_double(r.errors.h1_semi) << ',' << format_double(r.errors.energy) << ',' << r.n_dof << ','
      << format_double(r.wall_time_ms) << '\n';
  finish(f, path);
}

} // namespace mollified
