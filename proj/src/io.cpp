#include "linereg/io.hpp"

#include <unistd.h>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <utility>

#include <json.hpp>

namespace linereg {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw FileFormatError(path.string() + ": cannot open file");
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  if (!f.good() && !f.eof()) {
    throw FileFormatError(path.string() + ": read failed");
  }
  return std::move(buf).str();
}

// --- little-endian scalar encoding (the on-disk convention everywhere) ---

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32le(std::string& out, float v) { put_u32le(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64le(std::string& out, double v) { put_u64le(out, std::bit_cast<std::uint64_t>(v)); }
void put_i32le(std::string& out, std::int32_t v) {
  put_u32le(out, static_cast<std::uint32_t>(v));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

float get_f32le(const unsigned char* p) { return std::bit_cast<float>(get_u32le(p)); }
double get_f64le(const unsigned char* p) { return std::bit_cast<double>(get_u64le(p)); }
std::int32_t get_i32le(const unsigned char* p) {
  return static_cast<std::int32_t>(get_u32le(p));
}

// --- text formatting with exact round-trip ---

std::string fmt_f64(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_f32(float v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  return buf;
}

}  // namespace

void atomic_write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw std::runtime_error("atomic_write_file: cannot open " + tmp.string());
    }
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("atomic_write_file: write to " + tmp.string() + " failed");
    }
  }
  std::filesystem::rename(tmp, path);  // atomic on POSIX within one filesystem
}

PointCloud read_kitti_bin(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() % 16 != 0) {
    throw FileFormatError(path.string() + ": truncated record at byte offset " +
                          std::to_string((bytes.size() / 16) * 16) + " (file size " +
                          std::to_string(bytes.size()) + " is not a multiple of 16)");
  }
  PointCloud cloud;
  const std::size_t n = bytes.size() / 16;
  cloud.points.reserve(n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i, p += 16) {
    // fourth float is the intensity, which this pipeline does not use
    cloud.points.emplace_back(get_f32le(p), get_f32le(p + 4), get_f32le(p + 8));
  }
  return cloud;
}

void write_kitti_bin(const std::filesystem::path& path, const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 16);
  for (const auto& q : cloud.points) {
    put_f32le(out, static_cast<float>(q.x()));
    put_f32le(out, static_cast<float>(q.y()));
    put_f32le(out, static_cast<float>(q.z()));
    put_f32le(out, 0.0f);
  }
  atomic_write_file(path, out);
}

// ---------------------------------------------------------------------------
// PLY
// ---------------------------------------------------------------------------

namespace {

const char* format_line(PlyFormat f) {
  return f == PlyFormat::Ascii ? "format ascii 1.0" : "format binary_little_endian 1.0";
}

enum class PropType { Float64, Float32, Uint8, Int32 };

std::size_t prop_size(PropType t) {
  switch (t) {
    case PropType::Float64: return 8;
    case PropType::Float32: return 4;
    case PropType::Uint8: return 1;
    case PropType::Int32: return 4;
  }
  return 0;
}

struct Property {
  PropType type;
  std::string name;
  std::size_t line;  // header line it was declared on
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::size_t line = 0;
  std::vector<Property> props;
};

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& what) {
  throw FileFormatError(path.string() + ": line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_f64_token(const std::filesystem::path& path, std::size_t line,
                       const std::string& tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(path, line, "expected a number, got '" + tok + "'");
  }
  return v;
}

long parse_int_token(const std::filesystem::path& path, std::size_t line, const std::string& tok,
                     long lo, long hi) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(path, line, "expected an integer, got '" + tok + "'");
  }
  if (v < lo || v > hi) {
    fail(path, line, "integer '" + tok + "' outside [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  return v;
}

PropType parse_prop_type(const std::filesystem::path& path, std::size_t line,
                         const std::string& name) {
  if (name == "double" || name == "float64") return PropType::Float64;
  if (name == "float" || name == "float32") return PropType::Float32;
  if (name == "uchar" || name == "uint8") return PropType::Uint8;
  if (name == "int" || name == "int32") return PropType::Int32;
  fail(path, line, "unsupported property type '" + name + "'");
}

struct Header {
  PlyFormat format = PlyFormat::Ascii;
  std::vector<Element> elements;
  std::size_t lines = 0;        // header line count, including end_header
  std::size_t payload_off = 0;  // byte offset just past the end_header newline
};

Header parse_header(const std::filesystem::path& path, const std::string& bytes) {
  Header h;
  std::size_t pos = 0, line_no = 0;
  bool saw_format = false, done = false;
  while (!done) {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) {
      fail(path, line_no + 1, "header ended before end_header");
    }
    ++line_no;
    std::string line = bytes.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = eol + 1;

    if (line_no == 1) {
      if (line != "ply") fail(path, 1, "not a PLY file (expected 'ply')");
      continue;
    }
    const auto tok = split_ws(line);
    if (tok.empty()) fail(path, line_no, "blank line inside header");
    if (tok[0] == "comment") continue;
    if (tok[0] == "format") {
      if (saw_format) fail(path, line_no, "duplicate format line");
      if (tok.size() != 3 || tok[2] != "1.0") fail(path, line_no, "malformed format line");
      if (tok[1] == "ascii") {
        h.format = PlyFormat::Ascii;
      } else if (tok[1] == "binary_little_endian") {
        h.format = PlyFormat::BinaryLittleEndian;
      } else {
        fail(path, line_no, "unsupported format '" + tok[1] + "'");
      }
      saw_format = true;
      continue;
    }
    if (tok[0] == "element") {
      if (!saw_format) fail(path, line_no, "element before format line");
      if (tok.size() != 3) fail(path, line_no, "malformed element line");
      Element e;
      e.name = tok[1];
      e.count = static_cast<std::size_t>(
          parse_int_token(path, line_no, tok[2], 0, std::numeric_limits<long>::max()));
      e.line = line_no;
      h.elements.push_back(std::move(e));
      continue;
    }
    if (tok[0] == "property") {
      if (h.elements.empty()) fail(path, line_no, "property before any element");
      if (tok.size() == 3) {
        h.elements.back().props.push_back(
            {parse_prop_type(path, line_no, tok[1]), tok[2], line_no});
      } else {
        fail(path, line_no, "malformed property line (list properties are not supported)");
      }
      continue;
    }
    if (tok[0] == "end_header") {
      done = true;
      continue;
    }
    fail(path, line_no, "unrecognized header keyword '" + tok[0] + "'");
  }
  if (h.elements.empty()) fail(path, line_no, "no elements declared");
  h.lines = line_no;
  h.payload_off = pos;
  return h;
}

// Vertex property table: name -> required type, plus descriptor columns.
struct VertexLayout {
  int ix = -1, iy = -1, iz = -1, ilabel = -1, iscore = -1;
  std::vector<int> idesc;  // property slot of desc_k, in k order
};

VertexLayout check_vertex_layout(const std::filesystem::path& path, const Element& e) {
  VertexLayout lay;
  auto want = [&](const Property& p, PropType t, const char* what) {
    if (p.type != t) {
      fail(path, p.line, std::string("property '") + p.name + "' must be " + what);
    }
  };
  for (std::size_t s = 0; s < e.props.size(); ++s) {
    const auto& p = e.props[s];
    const int slot = static_cast<int>(s);
    if (p.name == "x") {
      want(p, PropType::Float64, "double");
      lay.ix = slot;
    } else if (p.name == "y") {
      want(p, PropType::Float64, "double");
      lay.iy = slot;
    } else if (p.name == "z") {
      want(p, PropType::Float64, "double");
      lay.iz = slot;
    } else if (p.name == "line_label") {
      want(p, PropType::Uint8, "uchar");
      lay.ilabel = slot;
    } else if (p.name == "score") {
      want(p, PropType::Float32, "float");
      lay.iscore = slot;
    } else if (p.name.rfind("desc_", 0) == 0) {
      want(p, PropType::Float32, "float");
      const long k = parse_int_token(path, p.line, p.name.substr(5), 0, 1 << 20);
      if (k != static_cast<long>(lay.idesc.size())) {
        fail(path, p.line, "descriptor properties must appear in order desc_0, desc_1, ...");
      }
      lay.idesc.push_back(slot);
    } else {
      fail(path, p.line, "unknown vertex property '" + p.name + "'");
    }
  }
  if (lay.ix < 0) fail(path, e.line, "vertex element is missing required property x");
  if (lay.iy < 0) fail(path, e.line, "vertex element is missing required property y");
  if (lay.iz < 0) fail(path, e.line, "vertex element is missing required property z");
  return lay;
}

void check_edge_layout(const std::filesystem::path& path, const Element& e) {
  if (e.props.size() != 2 || e.props[0].name != "vertex1" || e.props[1].name != "vertex2" ||
      e.props[0].type != PropType::Int32 || e.props[1].type != PropType::Int32) {
    fail(path, e.line, "edge element must declare exactly 'property int vertex1' and "
                       "'property int vertex2'");
  }
}

std::string header_for_cloud(const PointCloud& cloud, PlyFormat format) {
  std::string out = "ply\n";
  out += format_line(format);
  out += "\nelement vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_labels()) out += "property uchar line_label\n";
  if (cloud.has_scores()) out += "property float score\n";
  for (Eigen::Index j = 0; j < cloud.descriptors.cols(); ++j) {
    out += "property float desc_" + std::to_string(j) + "\n";
  }
  out += "end_header\n";
  return out;
}

}  // namespace

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, PlyFormat format) {
  cloud.check_channels();
  const bool desc = cloud.has_descriptors();
  std::string out = header_for_cloud(cloud, format);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& q = cloud.points[i];
    if (format == PlyFormat::Ascii) {
      std::string row = fmt_f64(q.x()) + " " + fmt_f64(q.y()) + " " + fmt_f64(q.z());
      if (cloud.has_labels()) row += " " + std::to_string(cloud.labels[i]);
      if (cloud.has_scores()) row += " " + fmt_f32(cloud.scores[i]);
      if (desc) {
        for (Eigen::Index j = 0; j < cloud.descriptors.cols(); ++j) {
          row += " " + fmt_f32(cloud.descriptors(static_cast<Eigen::Index>(i), j));
        }
      }
      out += row + "\n";
    } else {
      put_f64le(out, q.x());
      put_f64le(out, q.y());
      put_f64le(out, q.z());
      if (cloud.has_labels()) out.push_back(static_cast<char>(cloud.labels[i]));
      if (cloud.has_scores()) put_f32le(out, cloud.scores[i]);
      if (desc) {
        for (Eigen::Index j = 0; j < cloud.descriptors.cols(); ++j) {
          put_f32le(out, cloud.descriptors(static_cast<Eigen::Index>(i), j));
        }
      }
    }
  }
  atomic_write_file(path, out);
}

void write_ply(const std::filesystem::path& path, const std::vector<LineSegment>& segments,
               PlyFormat format) {
  std::string out = "ply\n";
  out += format_line(format);
  out += "\nelement vertex " + std::to_string(2 * segments.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "element edge " + std::to_string(segments.size()) + "\n";
  out += "property int vertex1\nproperty int vertex2\n";
  out += "end_header\n";
  auto put_vertex = [&](const Point3& p) {
    if (format == PlyFormat::Ascii) {
      out += fmt_f64(p.x()) + " " + fmt_f64(p.y()) + " " + fmt_f64(p.z()) + "\n";
    } else {
      put_f64le(out, p.x());
      put_f64le(out, p.y());
      put_f64le(out, p.z());
    }
  };
  for (const auto& s : segments) {
    put_vertex(s.e0);
    put_vertex(s.e1);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto a = static_cast<std::int32_t>(2 * i);
    const auto b = static_cast<std::int32_t>(2 * i + 1);
    if (format == PlyFormat::Ascii) {
      out += std::to_string(a) + " " + std::to_string(b) + "\n";
    } else {
      put_i32le(out, a);
      put_i32le(out, b);
    }
  }
  atomic_write_file(path, out);
}

PlyData read_ply(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const Header h = parse_header(path, bytes);

  if (h.elements[0].name != "vertex") {
    fail(path, h.elements[0].line, "first element must be 'vertex'");
  }
  if (h.elements.size() > 2) {
    fail(path, h.elements[2].line, "unsupported element '" + h.elements[2].name + "'");
  }
  if (h.elements.size() == 2 && h.elements[1].name != "edge") {
    fail(path, h.elements[1].line, "unsupported element '" + h.elements[1].name + "'");
  }
  const Element& ve = h.elements[0];
  const VertexLayout lay = check_vertex_layout(path, ve);
  if (h.elements.size() == 2) check_edge_layout(path, h.elements[1]);

  PlyData data;
  auto& cloud = data.cloud;
  cloud.points.resize(ve.count);
  if (lay.ilabel >= 0) cloud.labels.resize(ve.count);
  if (lay.iscore >= 0) cloud.scores.resize(ve.count);
  const Eigen::Index d = static_cast<Eigen::Index>(lay.idesc.size());
  if (d > 0) cloud.descriptors.resize(static_cast<Eigen::Index>(ve.count), d);

  if (h.format == PlyFormat::Ascii) {
    std::size_t pos = h.payload_off, line_no = h.lines;
    auto next_row = [&](std::size_t n_props) -> std::vector<std::string> {
      while (pos < bytes.size()) {
        const std::size_t eol = bytes.find('\n', pos);
        const std::size_t end = eol == std::string::npos ? bytes.size() : eol;
        ++line_no;
        std::string line = bytes.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = eol == std::string::npos ? bytes.size() : eol + 1;
        auto tok = split_ws(line);
        if (tok.empty()) continue;  // tolerate blank lines between rows
        if (tok.size() != n_props) {
          fail(path, line_no, "expected " + std::to_string(n_props) + " values, got " +
                                  std::to_string(tok.size()));
        }
        return tok;
      }
      fail(path, line_no + 1, "file ended before all declared elements were read");
    };

    for (std::size_t i = 0; i < ve.count; ++i) {
      const auto tok = next_row(ve.props.size());
      std::vector<double> vals(ve.props.size());
      for (std::size_t s = 0; s < ve.props.size(); ++s) {
        if (ve.props[s].type == PropType::Uint8) {
          vals[s] = static_cast<double>(parse_int_token(path, line_no, tok[s], 0, 255));
        } else {
          vals[s] = parse_f64_token(path, line_no, tok[s]);
        }
      }
      cloud.points[i] = Point3(vals[static_cast<std::size_t>(lay.ix)],
                               vals[static_cast<std::size_t>(lay.iy)],
                               vals[static_cast<std::size_t>(lay.iz)]);
      if (lay.ilabel >= 0) {
        cloud.labels[i] = static_cast<std::uint8_t>(vals[static_cast<std::size_t>(lay.ilabel)]);
      }
      if (lay.iscore >= 0) {
        cloud.scores[i] = static_cast<float>(vals[static_cast<std::size_t>(lay.iscore)]);
      }
      for (Eigen::Index j = 0; j < d; ++j) {
        cloud.descriptors(static_cast<Eigen::Index>(i), j) =
            static_cast<float>(vals[static_cast<std::size_t>(lay.idesc[static_cast<std::size_t>(j)])]);
      }
    }
    if (h.elements.size() == 2) {
      for (std::size_t i = 0; i < h.elements[1].count; ++i) {
        const auto tok = next_row(2);
        const long a = parse_int_token(path, line_no, tok[0], 0, static_cast<long>(ve.count) - 1);
        const long b = parse_int_token(path, line_no, tok[1], 0, static_cast<long>(ve.count) - 1);
        data.edges.push_back({static_cast<int>(a), static_cast<int>(b)});
      }
    }
    // Anything left beyond whitespace is unexpected.
    while (pos < bytes.size()) {
      const std::size_t eol = bytes.find('\n', pos);
      const std::size_t end = eol == std::string::npos ? bytes.size() : eol;
      ++line_no;
      const std::string line = bytes.substr(pos, end - pos);
      pos = eol == std::string::npos ? bytes.size() : eol + 1;
      if (!split_ws(line).empty()) {
        fail(path, line_no, "unexpected content after the last declared element");
      }
    }
  } else {
    const unsigned char* base = reinterpret_cast<const unsigned char*>(bytes.data());
    std::size_t off = h.payload_off;
    auto need = [&](std::size_t want) {
      if (off + want > bytes.size()) {
        throw FileFormatError(path.string() + ": unexpected end of data at byte offset " +
                              std::to_string(bytes.size()) + " (needed " +
                              std::to_string(off + want) + " bytes)");
      }
    };
    std::size_t row_size = 0;
    for (const auto& p : ve.props) row_size += prop_size(p.type);
    for (std::size_t i = 0; i < ve.count; ++i) {
      need(row_size);
      std::vector<double> vals(ve.props.size());
      for (std::size_t s = 0; s < ve.props.size(); ++s) {
        const auto& p = ve.props[s];
        switch (p.type) {
          case PropType::Float64: vals[s] = get_f64le(base + off); break;
          case PropType::Float32: vals[s] = static_cast<double>(get_f32le(base + off)); break;
          case PropType::Uint8: vals[s] = static_cast<double>(base[off]); break;
          case PropType::Int32: vals[s] = static_cast<double>(get_i32le(base + off)); break;
        }
        off += prop_size(p.type);
      }
      cloud.points[i] = Point3(vals[static_cast<std::size_t>(lay.ix)],
                               vals[static_cast<std::size_t>(lay.iy)],
                               vals[static_cast<std::size_t>(lay.iz)]);
      if (lay.ilabel >= 0) {
        cloud.labels[i] = static_cast<std::uint8_t>(vals[static_cast<std::size_t>(lay.ilabel)]);
      }
      if (lay.iscore >= 0) {
        cloud.scores[i] = static_cast<float>(vals[static_cast<std::size_t>(lay.iscore)]);
      }
      for (Eigen::Index j = 0; j < d; ++j) {
        cloud.descriptors(static_cast<Eigen::Index>(i), j) =
            static_cast<float>(vals[static_cast<std::size_t>(lay.idesc[static_cast<std::size_t>(j)])]);
      }
    }
    if (h.elements.size() == 2) {
      for (std::size_t i = 0; i < h.elements[1].count; ++i) {
        need(8);
        const auto a = get_i32le(base + off);
        const auto b = get_i32le(base + off + 4);
        off += 8;
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= ve.count ||
            static_cast<std::size_t>(b) >= ve.count) {
          throw FileFormatError(path.string() + ": edge " + std::to_string(i) +
                                " references a vertex outside the file");
        }
        data.edges.push_back({a, b});
      }
    }
    if (off != bytes.size()) {
      throw FileFormatError(path.string() + ": " + std::to_string(bytes.size() - off) +
                            " unexpected trailing bytes at offset " + std::to_string(off));
    }
  }
  cloud.check_channels();
  return data;
}

// ---------------------------------------------------------------------------
// JSON-lines segment sidecar
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json vec3_json(const Vec3& v) {
  return nlohmann::ordered_json::array({v.x(), v.y(), v.z()});
}

Vec3 json_vec3(const std::filesystem::path& path, std::size_t line, const nlohmann::json& j,
               const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
    fail(path, line, std::string("segment object needs a 3-array '") + key + "'");
  }
  return Vec3(j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>());
}

}  // namespace

void write_segments_jsonl(const std::filesystem::path& path,
                          const std::vector<LineSegment>& segments) {
  std::string out;
  for (const auto& s : segments) {
    nlohmann::ordered_json j;
    j["e0"] = vec3_json(s.e0);
    j["e1"] = vec3_json(s.e1);
    j["direction"] = vec3_json(s.direction);
    j["members"] = s.member_indices;
    if (s.has_descriptor()) {
      std::vector<float> desc(s.mean_descriptor.data(),
                              s.mean_descriptor.data() + s.mean_descriptor.size());
      j["descriptor"] = desc;
    }
    out += j.dump() + "\n";
  }
  atomic_write_file(path, out);
}

std::vector<LineSegment> read_segments_jsonl(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::vector<LineSegment> segments;
  std::size_t pos = 0, line_no = 0;
  while (pos < bytes.size()) {
    const std::size_t eol = bytes.find('\n', pos);
    const std::size_t end = eol == std::string::npos ? bytes.size() : eol;
    ++line_no;
    const std::string line = bytes.substr(pos, end - pos);
    pos = eol == std::string::npos ? bytes.size() : eol + 1;
    if (split_ws(line).empty()) continue;

    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      fail(path, line_no, "not a JSON object");
    }
    LineSegment s;
    s.e0 = json_vec3(path, line_no, j, "e0");
    s.e1 = json_vec3(path, line_no, j, "e1");
    s.direction = json_vec3(path, line_no, j, "direction");
    if (!j.contains("members") || !j["members"].is_array()) {
      fail(path, line_no, "segment object needs an array 'members'");
    }
    s.member_indices = j["members"].get<std::vector<int>>();
    if (j.contains("descriptor")) {
      const auto desc = j["descriptor"].get<std::vector<float>>();
      s.mean_descriptor =
          Eigen::Map<const Eigen::VectorXf>(desc.data(), static_cast<Eigen::Index>(desc.size()));
    }
    segments.push_back(std::move(s));
  }
  return segments;
}

}  // namespace linereg
