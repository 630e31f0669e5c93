#include "scenefill/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace scenefill::io {

namespace {

using json = nlohmann::json;

/// Sequential reader over a memory buffer tracking the byte offset for errors.
struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;

  explicit ByteReader(const std::string& b) : buf(b) {}

  bool eof() const { return pos >= buf.size(); }

  int peek() const { return eof() ? -1 : static_cast<unsigned char>(buf[pos]); }

  int get() {
    const int c = peek();
    if (c >= 0) ++pos;
    return c;
  }

  // PNM whitespace: blanks plus '#' comments to end of line.
  void skip_space_and_comments() {
    while (!eof()) {
      const int c = peek();
      if (c == '#') {
        while (!eof() && get() != '\n') {
        }
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::string token(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos;
    while (!eof()) {
      const int c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
      ++pos;
    }
    if (pos == start) throw ParseError("bad-header", start, std::string("expected ") + what);
    return buf.substr(start, pos - start);
  }

  long parse_int(const char* what) {
    const std::size_t at = pos;
    const std::string t = token(what);
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(t, &used);
    } catch (const std::exception&) {
      throw ParseError("bad-header", at, std::string("non-numeric ") + what + " '" + t + "'");
    }
    if (used != t.size())
      throw ParseError("bad-header", at, std::string("non-numeric ") + what + " '" + t + "'");
    return value;
  }

  double parse_double(const char* what) {
    const std::size_t at = pos;
    const std::string t = token(what);
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(t, &used);
    } catch (const std::exception&) {
      throw ParseError("bad-header", at, std::string("non-numeric ") + what + " '" + t + "'");
    }
    if (used != t.size())
      throw ParseError("bad-header", at, std::string("non-numeric ") + what + " '" + t + "'");
    return value;
  }

  // Consumes exactly one whitespace byte (the single separator before a raw payload).
  void expect_single_space(const char* context) {
    const int c = get();
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n')
      throw ParseError("bad-header", pos == 0 ? 0 : pos - 1,
                       std::string("missing separator before ") + context);
  }

  const char* raw(std::size_t n, const char* context) {
    if (pos + n > buf.size())
      throw ParseError("truncated-payload", buf.size(),
                       std::string("need ") + std::to_string(pos + n - buf.size()) +
                           " more bytes of " + context);
    const char* p = buf.data() + pos;
    pos += n;
    return p;
  }
};

void check_dims(long w, long h, std::size_t at) {
  if (w < 1 || h < 1 || w > (1L << 20) || h > (1L << 20))
    throw ParseError("bad-dimensions", at, "width/height out of range: " + std::to_string(w) + "x" +
                                               std::to_string(h));
}

float byte_swapped(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  u = __builtin_bswap32(u);
  std::memcpy(&f, &u, 4);
  return f;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

GridF pfm_read(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  ByteReader r(buf);
  const std::string magic = r.token("magic");
  if (magic == "PF") throw ParseError("bad-magic", 0, "color PFM is unsupported, expected 'Pf'");
  if (magic != "Pf") throw ParseError("bad-magic", 0, "expected 'Pf', got '" + magic + "'");
  const std::size_t dim_at = r.pos;
  const long w = r.parse_int("width");
  const long h = r.parse_int("height");
  check_dims(w, h, dim_at);
  const std::size_t scale_at = r.pos;
  const double scale = r.parse_double("scale");
  if (scale == 0.0) throw ParseError("bad-scale", scale_at, "scale must be nonzero");
  r.expect_single_space("pixel data");
  const bool little_endian = scale < 0.0;

  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const char* data = r.raw(count * 4, "float32 pixels");
  if (r.pos != buf.size())
    throw ParseError("trailing-bytes", r.pos, "unexpected bytes after pixel data");

  GridF grid(h, w);
  // PFM rows are stored bottom-up.
  for (long row = 0; row < h; ++row) {
    const char* src = data + static_cast<std::size_t>(h - 1 - row) * w * 4;
    std::memcpy(grid.data() + static_cast<std::size_t>(row) * w, src, static_cast<std::size_t>(w) * 4);
  }
  if constexpr (std::endian::native == std::endian::little) {
    if (!little_endian)
      for (long i = 0; i < grid.size(); ++i) grid.data()[i] = byte_swapped(grid.data()[i]);
  } else {
    if (little_endian)
      for (long i = 0; i < grid.size(); ++i) grid.data()[i] = byte_swapped(grid.data()[i]);
  }
  return grid;
}

void pfm_write(const std::filesystem::path& path, const GridF& grid) {
  if (grid.rows() < 1 || grid.cols() < 1) throw DataError("pfm_write: empty grid");
  std::string out;
  out += "Pf\n" + std::to_string(grid.cols()) + " " + std::to_string(grid.rows()) + "\n-1.0\n";
  const long w = grid.cols(), h = grid.rows();
  std::string payload(static_cast<std::size_t>(w) * h * 4, '\0');
  for (long row = 0; row < h; ++row) {
    std::memcpy(payload.data() + static_cast<std::size_t>(h - 1 - row) * w * 4,
                grid.data() + static_cast<std::size_t>(row) * w, static_cast<std::size_t>(w) * 4);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < payload.size(); i += 4) std::swap(payload[i], payload[i + 3]), std::swap(payload[i + 1], payload[i + 2]);
  }
  out += payload;
  write_file(path, out);
}

namespace {

GridU8 pnm_read_gray(const std::string& buf, const char* magic_want) {
  ByteReader r(buf);
  const std::string magic = r.token("magic");
  if (magic != magic_want)
    throw ParseError("bad-magic", 0,
                     std::string("expected '") + magic_want + "', got '" + magic + "'");
  const std::size_t dim_at = r.pos;
  const long w = r.parse_int("width");
  const long h = r.parse_int("height");
  check_dims(w, h, dim_at);
  const std::size_t maxval_at = r.pos;
  const long maxval = r.parse_int("maxval");
  if (maxval != 255)
    throw ParseError("bad-maxval", maxval_at, "only maxval 255 is supported, got " + std::to_string(maxval));
  r.expect_single_space("pixel data");
  const char* data = r.raw(static_cast<std::size_t>(w) * h, "pixel bytes");
  if (r.pos != buf.size())
    throw ParseError("trailing-bytes", r.pos, "unexpected bytes after pixel data");
  GridU8 grid(h, w);
  std::memcpy(grid.data(), data, static_cast<std::size_t>(w) * h);
  return grid;
}

}  // namespace

GridU8 pgm_read(const std::filesystem::path& path) { return pnm_read_gray(read_file(path), "P5"); }

void pgm_write(const std::filesystem::path& path, const GridU8& gray) {
  if (gray.rows() < 1 || gray.cols() < 1) throw DataError("pgm_write: empty grid");
  std::string out = "P5\n" + std::to_string(gray.cols()) + " " + std::to_string(gray.rows()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(gray.data()), static_cast<std::size_t>(gray.size()));
  write_file(path, out);
}

RgbImage ppm_read(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  ByteReader r(buf);
  const std::string magic = r.token("magic");
  if (magic != "P6") throw ParseError("bad-magic", 0, "expected 'P6', got '" + magic + "'");
  const std::size_t dim_at = r.pos;
  const long w = r.parse_int("width");
  const long h = r.parse_int("height");
  check_dims(w, h, dim_at);
  const std::size_t maxval_at = r.pos;
  const long maxval = r.parse_int("maxval");
  if (maxval != 255)
    throw ParseError("bad-maxval", maxval_at, "only maxval 255 is supported, got " + std::to_string(maxval));
  r.expect_single_space("pixel data");
  const char* data = r.raw(static_cast<std::size_t>(w) * h * 3, "rgb bytes");
  if (r.pos != buf.size())
    throw ParseError("trailing-bytes", r.pos, "unexpected bytes after pixel data");
  GridU8 cr(h, w), cg(h, w), cb(h, w);
  for (long i = 0; i < w * h; ++i) {
    cr.data()[i] = static_cast<std::uint8_t>(data[3 * i]);
    cg.data()[i] = static_cast<std::uint8_t>(data[3 * i + 1]);
    cb.data()[i] = static_cast<std::uint8_t>(data[3 * i + 2]);
  }
  return {std::move(cr), std::move(cg), std::move(cb)};
}

void ppm_write(const std::filesystem::path& path, const RgbImage& img) {
  if (img.height() < 1 || img.width() < 1) throw DataError("ppm_write: empty image");
  std::string out = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(img.r.size()) * 3);
  for (long i = 0; i < img.r.size(); ++i) {
    out.push_back(static_cast<char>(img.r.data()[i]));
    out.push_back(static_cast<char>(img.g.data()[i]));
    out.push_back(static_cast<char>(img.b.data()[i]));
  }
  write_file(path, out);
}

BinaryMask mask_from_gray(const GridU8& gray, bool* had_intermediate) {
  bool warn = false;
  GridU8 m(gray.rows(), gray.cols());
  for (long i = 0; i < gray.size(); ++i) {
    const std::uint8_t g = gray.data()[i];
    if (g != 0 && g != 255) warn = true;
    m.data()[i] = g >= 128 ? 1 : 0;
  }
  if (had_intermediate) *had_intermediate = warn;
  return BinaryMask{std::move(m)};
}

GridU8 gray_from_mask(const BinaryMask& mask) {
  return (mask.values * std::uint8_t(255)).eval();
}

BinaryMask mask_read_pgm(const std::filesystem::path& path) {
  return mask_from_gray(pgm_read(path), nullptr);
}

void mask_write_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  pgm_write(path, gray_from_mask(mask));
}

void ply_write(const std::filesystem::path& path, const std::vector<PlyVertex>& vertices) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(vertices.size()) + "\n";
  out +=
      "property float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  char line[128];
  for (const PlyVertex& p : vertices) {
    std::snprintf(line, sizeof(line), "%.9g %.9g %.9g %d %d %d\n", p.x, p.y, p.z, int(p.red),
                  int(p.green), int(p.blue));
    out += line;
  }
  write_file(path, out);
}

std::vector<PlyVertex> ply_read(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  ByteReader r(buf);
  if (r.token("magic") != "ply") throw ParseError("bad-magic", 0, "expected 'ply'");
  long vertex_count = -1;
  bool saw_end = false;
  while (!r.eof()) {
    r.skip_space_and_comments();
    const std::size_t at = r.pos;
    const std::string word = r.token("header keyword");
    if (word == "end_header") {
      saw_end = true;
      break;
    }
    if (word == "element") {
      const std::string kind = r.token("element kind");
      const long n = r.parse_int("element count");
      if (kind == "vertex") {
        if (n < 0) throw ParseError("bad-vertex-count", at, "negative vertex count");
        vertex_count = n;
      }
    }
    // other header lines: skip to end of line
    while (!r.eof() && r.peek() != '\n') r.get();
  }
  if (!saw_end) throw ParseError("missing-end-header", r.pos, "no end_header line");
  if (vertex_count < 0) throw ParseError("bad-vertex-count", r.pos, "no vertex element declared");

  std::vector<PlyVertex> verts;
  verts.reserve(static_cast<std::size_t>(vertex_count));
  for (long i = 0; i < vertex_count; ++i) {
    PlyVertex p{};
    const std::size_t at = r.pos;
    try {
      p.x = r.parse_double("x");
      p.y = r.parse_double("y");
      p.z = r.parse_double("z");
      p.red = static_cast<std::uint8_t>(r.parse_int("red"));
      p.green = static_cast<std::uint8_t>(r.parse_int("green"));
      p.blue = static_cast<std::uint8_t>(r.parse_int("blue"));
    } catch (const ParseError&) {
      throw ParseError("truncated-payload", at,
                       "vertex row " + std::to_string(i) + " of " + std::to_string(vertex_count));
    }
    verts.push_back(p);
  }
  return verts;
}

std::vector<ViewEntry> cameras_read(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  json doc;
  try {
    doc = json::parse(buf);
  } catch (const json::parse_error& e) {
    throw ParseError("bad-json", e.byte, e.what());
  }
  if (!doc.contains("views") || !doc["views"].is_array())
    throw ParseError("bad-json", 0, "cameras file must contain a 'views' array");
  std::vector<ViewEntry> out;
  for (const auto& v : doc["views"]) {
    ViewEntry e;
    try {
      e.id = v.at("id").get<std::string>();
      const auto& k = v.at("intrinsics");
      e.intrinsics = CameraIntrinsics(k.at("fx").get<double>(), k.at("fy").get<double>(),
                                      k.at("cx").get<double>(), k.at("cy").get<double>(),
                                      k.at("width").get<int>(), k.at("height").get<int>());
      const auto& m = v.at("world_to_camera");
      if (!m.is_array() || m.size() != 16)
        throw DataError("world_to_camera must be a 16-element row-major array");
      Eigen::Matrix3d r;
      Eigen::Vector3d t;
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) r(row, col) = m[4 * row + col].get<double>();
        t(row) = m[4 * row + 3].get<double>();
      }
      const double w0 = m[12].get<double>(), w1 = m[13].get<double>(), w2 = m[14].get<double>(),
                   w3 = m[15].get<double>();
      if (w0 != 0 || w1 != 0 || w2 != 0 || w3 != 1)
        throw DataError("world_to_camera bottom row must be [0 0 0 1]");
      e.pose = Pose(r, t);
    } catch (const json::exception& ex) {
      throw ParseError("bad-json", 0, std::string("view entry: ") + ex.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

void cameras_write(const std::filesystem::path& path, const std::vector<ViewEntry>& views) {
  json doc;
  doc["views"] = json::array();
  for (const ViewEntry& e : views) {
    json v;
    v["id"] = e.id;
    v["intrinsics"] = {{"fx", e.intrinsics.fx},       {"fy", e.intrinsics.fy},
                       {"cx", e.intrinsics.cx},       {"cy", e.intrinsics.cy},
                       {"width", e.intrinsics.width}, {"height", e.intrinsics.height}};
    std::vector<double> m(16, 0.0);
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) m[4 * row + col] = e.pose.rotation(row, col);
      m[4 * row + 3] = e.pose.translation(row);
    }
    m[15] = 1.0;
    v["world_to_camera"] = m;
    doc["views"].push_back(v);
  }
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace scenefill::io
