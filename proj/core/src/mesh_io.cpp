#include "vortcert/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vortcert/error.hpp"

namespace vortcert {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path.string());
  return os;
}

const char* flag_name(VertexFlag f) {
  switch (f) {
    case VertexFlag::interior: return "interior";
    case VertexFlag::sigma1: return "sigma1";
    case VertexFlag::sigma2: return "sigma2";
  }
  return "?";
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& dir) {
  auto vs = open_out(dir / "vertices.csv");
  vs << "id,x,y,flag\n";
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Vec2& p = mesh.vertices()[i];
    vs << i << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
       << flag_name(mesh.vertex_flags()[i]) << '\n';
  }
  auto ts = open_out(dir / "triangles.csv");
  ts << "v0,v1,v2\n";
  for (const auto& t : mesh.triangles()) ts << t[0] << ',' << t[1] << ',' << t[2] << '\n';
}

void write_vtk(const Mesh& mesh, const std::filesystem::path& path,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_data) {
  auto os = open_out(path);
  os << "# vtk DataFile Version 3.0\nvortcert\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices())
    os << format_double(p.x()) << ' ' << format_double(p.y()) << " 0\n";
  os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t i = 0; i < mesh.num_triangles(); ++i) os << "5\n";
  if (point_data.empty()) return;
  os << "POINT_DATA " << mesh.num_vertices() << '\n';
  for (const auto& [name, values] : point_data) {
    if (static_cast<std::size_t>(values.size()) != mesh.num_vertices())
      fail(ErrorKind::MeshMismatch, "point data '" + name + "' has wrong length");
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) os << format_double(values[i]) << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const Eigen::VectorXd& values,
                     const std::string& column) {
  auto os = open_out(path);
  os << "id," << column << '\n';
  for (Eigen::Index i = 0; i < values.size(); ++i) os << i << ',' << format_double(values[i]) << '\n';
}

Eigen::VectorXd read_field_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::IoError, "cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  std::vector<std::pair<long, double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorKind::IoError, "malformed row in " + path.string());
    rows.emplace_back(std::stol(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
  for (const auto& [id, val] : rows) {
    if (id < 0 || id >= v.size()) fail(ErrorKind::IoError, "vertex id out of range in " + path.string());
    v[id] = val;
  }
  return v;
}

}  // namespace vortcert
