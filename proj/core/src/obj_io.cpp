#include "devquad/obj_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "devquad/error.hpp"

namespace devquad {

namespace {

struct ObjData {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;
  std::vector<std::vector<int>> lines;
};

int parse_index(const std::string& token, int vertex_count, int line_no) {
  const std::string head = token.substr(0, token.find('/'));
  int value = 0;
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), value);
  if (ec != std::errc() || ptr != head.data() + head.size() || value == 0)
    throw Error(ErrorCode::ParseError, "bad index '" + token + "' on line " + std::to_string(line_no));
  return value > 0 ? value - 1 : vertex_count + value;
}

ObjData parse(std::istream& in) {
  ObjData data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z))
        throw Error(ErrorCode::ParseError, "bad vertex on line " + std::to_string(line_no));
      data.vertices.emplace_back(x, y, z);
    } else if (tag == "f" || tag == "l") {
      std::vector<int> idx;
      std::string tok;
      const int nv = static_cast<int>(data.vertices.size());
      while (ss >> tok) idx.push_back(parse_index(tok, nv, line_no));
      (tag == "f" ? data.faces : data.lines).push_back(std::move(idx));
    }
  }
  return data;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

QuadMesh read_obj(std::istream& in) {
  ObjData data = parse(in);
  if (data.faces.empty()) throw Error(ErrorCode::ParseError, "OBJ holds no faces");
  std::vector<Face> faces;
  faces.reserve(data.faces.size());
  for (std::size_t f = 0; f < data.faces.size(); ++f) {
    const auto& idx = data.faces[f];
    if (idx.size() != 4)
      throw Error(ErrorCode::NonQuadFace,
                  "face has " + std::to_string(idx.size()) + " vertices", {static_cast<int>(f)});
    faces.push_back({idx[0], idx[1], idx[2], idx[3]});
  }
  return QuadMesh(std::move(data.vertices), std::move(faces));
}

QuadMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_obj(in);
}

void write_obj(std::span<const Vec3> vertices, std::span<const Face> faces, std::ostream& out) {
  char buf[96];
  for (const Vec3& v : vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const Face& f : faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << ' ' << f[3] + 1 << '\n';
}

void write_obj(const QuadMesh& mesh, std::ostream& out) {
  write_obj(mesh.vertices(), mesh.faces(), out);
}

void save_mesh(const QuadMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_obj(mesh, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<Polyline3> read_curves(std::istream& in) {
  const ObjData data = parse(in);
  std::vector<Polyline3> curves;
  if (data.lines.empty()) {
    if (!data.vertices.empty()) curves.push_back({data.vertices, false});
    return curves;
  }
  const int nv = static_cast<int>(data.vertices.size());
  for (const auto& idx : data.lines) {
    Polyline3 c;
    std::vector<int> ids = idx;
    if (ids.size() > 2 && ids.front() == ids.back()) {
      c.closed = true;
      ids.pop_back();
    }
    for (int i : ids) {
      if (i < 0 || i >= nv) throw Error(ErrorCode::InvalidIndex, "line index out of range", {i});
      c.points.push_back(data.vertices[i]);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::vector<Polyline3> load_curves(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_curves(in);
}

ReferenceSurface read_reference(std::istream& in) {
  ObjData data = parse(in);
  if (data.faces.empty()) throw Error(ErrorCode::EmptyReference, "reference OBJ has no faces");
  const int nv = static_cast<int>(data.vertices.size());
  std::vector<std::array<int, 3>> tris;
  for (std::size_t f = 0; f < data.faces.size(); ++f) {
    const auto& idx = data.faces[f];
    if (idx.size() < 3) throw Error(ErrorCode::ParseError, "face with fewer than 3 vertices", {static_cast<int>(f)});
    for (int i : idx)
      if (i < 0 || i >= nv) throw Error(ErrorCode::InvalidIndex, "face index out of range", {static_cast<int>(f)});
    for (std::size_t k = 1; k + 1 < idx.size(); ++k) tris.push_back({idx[0], idx[k], idx[k + 1]});
  }
  return ReferenceSurface::from_triangles(std::move(data.vertices), std::move(tris));
}

ReferenceSurface load_reference(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_reference(in);
}

std::vector<Vec3> load_points(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return parse(in).vertices;
}

}  // namespace devquad
