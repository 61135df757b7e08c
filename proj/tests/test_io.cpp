#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mollified/errors.hpp"
#include "mollified/io.hpp"

using namespace mollified;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mollified_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("seed csv round trip") {
  const fs::path d = scratch("seeds");
  const std::vector<Point> seeds{{0.1, 0.2}, {1.0 / 3.0, 0.7}, {-2.5e-7, 1e10}};
  write_seeds_csv((d / "s.csv").string(), seeds);
  const auto back = read_seeds_csv((d / "s.csv").string());
  REQUIRE(back.size() == seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) CHECK(back[i] == seeds[i]);
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("malformed seed files") {
  const fs::path d = scratch("bad");
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(d / name) << text;
    return (d / name).string();
  };
  CHECK_THROWS_AS(read_seeds_csv(write("header.csv", "a,b\n0,0\n")), ConfigError);
  CHECK_THROWS_AS(read_seeds_csv(write("nan.csv", "x,y\n0,zz\n")), ConfigError);
  CHECK_THROWS_AS(read_seeds_csv(write("cols.csv", "x,y\n0,1,2\n")), ConfigError);
  CHECK_THROWS_AS(read_seeds_csv(write("empty.csv", "x,y\n\n")), ConfigError);
  CHECK_THROWS_AS(read_seeds_csv((d / "missing.csv").string()), IoError);
  CHECK(read_seeds_csv(write("crlf.csv", "x,y\r\n0.5, 0.25\r\n")).front() == Point{0.5, 0.25});
}

TEST_CASE("mesh and error tables") {
  const fs::path d = scratch("mesh");
  const Mesh m = build_mesh(SignedDistance::box({0, 0}, {1, 1}), lattice_partition({2, 1, 0.0, 1}), {});
  write_mesh_csv((d / "m.csv").string(), m);
  write_mesh_vtk((d / "m.vtk").string(), m);
  const std::string csv = slurp(d / "m.csv");
  CHECK(csv.rfind("cell,label,block,vertex,x,y\n", 0) == 0);
  // 16 squares with four vertices each
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 16 * 4);
  const std::string vtk = slurp(d / "m.vtk");
  CHECK(vtk.find("POLYGONS 16 80") != std::string::npos);
  CHECK(vtk.find("CELL_DATA 16") != std::string::npos);

  ErrorRow r;
  r.n_c = 4;
  r.h = 0.5;
  r.errors = {1e-3, 2e-2, 3e-2};
  r.n_dof = 48;
  r.wall_time_ms = 1.5;
  write_errors_csv((d / "e.csv").string(), {r});
  CHECK(slurp(d / "e.csv") == "n_c,h,L2,H1_semi,energy,n_dof,wall_time_ms\n4,0.5,0.001,0.02,0.03,48,1.5\n");
  CHECK_THROWS_AS(write_errors_csv((d / "no" / "such" / "e.csv").string(), {r}), IoError);
}
