// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

// PLY reader (ascii and binary_little_endian) and ascii writer, plus frame sequence
// discovery. Only vertex x,y,z and the face index list are kept; every other
// element and property is parsed and skipped.

#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mochi/error.hpp"
#include "mochi/geometry.hpp"
#include "mochi/mesh.hpp"

namespace mochi {

struct PlyMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

namespace detail {

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline PlyType parse_ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  throw ParseError("unknown property type '" + name + "'");
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

// Sequential value reader over the body in either encoding.
class PlyBodyReader {
 public:
  PlyBodyReader(std::string_view body, bool binary) : body_(body), binary_(binary) {}

  double read(PlyType type) {
    if (binary_) return read_binary(type);
    return read_ascii();
  }

  bool at_end() const { return pos_ >= body_.size(); }

 private:
  double read_ascii() {
    while (pos_ < body_.size() && std::isspace(static_cast<unsigned char>(body_[pos_]))) ++pos_;
    if (pos_ >= body_.size()) throw ParseError("unexpected end of ascii body");
    std::size_t end = pos_;
    while (end < body_.size() && !std::isspace(static_cast<unsigned char>(body_[end]))) ++end;
    const std::string token(body_.substr(pos_, end - pos_));
    char* parsed_end = nullptr;
    const double value = std::strtod(token.c_str(), &parsed_end);
    if (parsed_end != token.c_str() + token.size())
      throw ParseError("malformed number '" + token + "'");
    pos_ = end;
    return value;
  }

  template <class T>
  T take() {
    if (pos_ + sizeof(T) > body_.size()) throw ParseError("unexpected end of binary body");
    T value;
    std::memcpy(&value, body_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
      auto* bytes = reinterpret_cast<unsigned char*>(&value);
      std::reverse(bytes, bytes + sizeof(T));
    }
    return value;
  }

  double read_binary(PlyType type) {
    switch (type) {
      case PlyType::Int8: return take<std::int8_t>();
      case PlyType::UInt8: return take<std::uint8_t>();
      case PlyType::Int16: return take<std::int16_t>();
      case PlyType::UInt16: return take<std::uint16_t>();
      case PlyType::Int32: return take<std::int32_t>();
      case PlyType::UInt32: return take<std::uint32_t>();
      case PlyType::Float32: return take<float>();
      case PlyType::Float64: return take<double>();
    }
    return 0.0;
  }

  std::string_view body_;
  bool binary_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline PlyMesh parse_ply(std::string_view data) {
  using namespace detail;
  constexpr std::string_view kEnd = "end_header";
  if (data.substr(0, 3) != "ply") throw ParseError("missing 'ply' magic");
  const std::size_t end_pos = data.find(kEnd);
  if (end_pos == std::string_view::npos) throw ParseError("missing end_header");
  std::size_t body_start = end_pos + kEnd.size();
  if (body_start < data.size() && data[body_start] == '\r') ++body_start;
  if (body_start < data.size() && data[body_start] == '\n') ++body_start;

  std::istringstream header{std::string(data.substr(0, end_pos))};
  std::string line;
  std::getline(header, line);  // magic
  std::vector<PlyElement> elements;
  bool binary = false;
  bool have_format = false;
  while (std::getline(header, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream words(line);
    std::string keyword;
    if (!(words >> keyword)) continue;
    if (keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "format") {
      std::string format;
      words >> format;
      if (format == "ascii") binary = false;
      else if (format == "binary_little_endian") binary = true;
      else if (format == "binary_big_endian")
        throw UnsupportedFormat("binary_big_endian PLY is not supported");
      else throw ParseError("unknown format '" + format + "'");
      have_format = true;
    } else if (keyword == "element") {
      PlyElement element;
      long long count = -1;
      if (!(words >> element.name >> count) || count < 0)
        throw ParseError("malformed element line: " + line);
      element.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(element));
    } else if (keyword == "property") {
      if (elements.empty()) throw ParseError("property before any element");
      PlyProperty prop;
      std::string type;
      if (!(words >> type)) throw ParseError("malformed property line: " + line);
      if (type == "list") {
        std::string count_type, item_type;
        if (!(words >> count_type >> item_type >> prop.name))
          throw ParseError("malformed list property: " + line);
        prop.is_list = true;
        prop.count_type = parse_ply_type(count_type);
        prop.type = parse_ply_type(item_type);
      } else {
        if (!(words >> prop.name)) throw ParseError("malformed property line: " + line);
        prop.type = parse_ply_type(type);
      }
      elements.back().properties.push_back(std::move(prop));
    } else {
      throw ParseError("unknown header keyword '" + keyword + "'");
    }
  }
  if (!have_format) throw ParseError("missing format line");

  PlyMesh mesh;
  PlyBodyReader reader(data.substr(body_start), binary);
  bool saw_vertex = false;
  for (const PlyElement& element : elements) {
    int xyz[3] = {-1, -1, -1};
    int index_list = -1;
    for (std::size_t p = 0; p < element.properties.size(); ++p) {
      const auto& prop = element.properties[p];
      if (element.name == "vertex" && !prop.is_list) {
        if (prop.name == "x") xyz[0] = static_cast<int>(p);
        if (prop.name == "y") xyz[1] = static_cast<int>(p);
        if (prop.name == "z") xyz[2] = static_cast<int>(p);
      }
      if (element.name == "face" && prop.is_list &&
          (prop.name == "vertex_indices" || prop.name == "vertex_index"))
        index_list = static_cast<int>(p);
    }
    if (element.name == "vertex") {
      if (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0)
        throw ParseError("vertex element lacks x, y or z");
      saw_vertex = true;
      mesh.vertices.reserve(element.count);
    }
    if (element.name == "face" && index_list < 0)
      throw ParseError("face element lacks a vertex_indices list");

    std::vector<double> polygon;
    for (std::size_t r = 0; r < element.count; ++r) {
      Vec3 v;
      for (std::size_t p = 0; p < element.properties.size(); ++p) {
        const auto& prop = element.properties[p];
        if (prop.is_list) {
          const double n = reader.read(prop.count_type);
          if (n < 0 || n != std::floor(n)) throw ParseError("bad list length");
          const bool keep = static_cast<int>(p) == index_list;
          if (keep) polygon.clear();
          for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
            const double value = reader.read(prop.type);
            if (keep) polygon.push_back(value);
          }
          continue;
        }
        const double value = reader.read(prop.type);
        for (int axis = 0; axis < 3; ++axis)
          if (static_cast<int>(p) == xyz[axis]) v[axis] = value;
      }
      if (element.name == "vertex") mesh.vertices.push_back(v);
      if (element.name == "face") {
        if (polygon.size() < 3) throw ParseError("face with fewer than 3 vertices");
        for (double idx : polygon)
          if (idx < 0 || idx != std::floor(idx))
            throw IndexOutOfRange("negative or fractional vertex index");
        for (std::size_t k = 1; k + 1 < polygon.size(); ++k)
          mesh.faces.push_back({static_cast<std::uint32_t>(polygon[0]),
                                static_cast<std::uint32_t>(polygon[k]),
                                static_cast<std::uint32_t>(polygon[k + 1])});
      }
    }
  }
  if (!saw_vertex) throw ParseError("no vertex element");
  for (const Face& f : mesh.faces)
    for (std::uint32_t idx : f)
      if (idx >= mesh.vertices.size())
        throw IndexOutOfRange("face index " + std::to_string(idx) + " >= vertex count " +
                              std::to_string(mesh.vertices.size()));
  return mesh;
}

inline PlyMesh load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_ply(buffer.str());
}

inline void write_ply_ascii(std::ostream& out, const PlyMesh& mesh) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const Face& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void write_ply_ascii(const std::filesystem::path& path, const PlyMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw InvalidParams("cannot write " + path.string());
  write_ply_ascii(out, mesh);
}

/// Frame files of a sequence: a directory of frame_NNNN.ply files, or a manifest
/// listing one path per line (relative paths resolve against the manifest's folder).
inline std::vector<std::filesystem::path> sequence_paths(const std::filesystem::path& source) {
  namespace fs = std::filesystem;
  std::vector<fs::path> paths;
  if (fs::is_directory(source)) {
    const fs::path manifest = source / "manifest.txt";
    if (fs::exists(manifest)) return sequence_paths(manifest);
    static const std::regex pattern(R"(frame_\d{4,}\.ply)");
    for (const auto& entry : fs::directory_iterator(source))
      if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), pattern))
        paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    return paths;
  }
  std::ifstream in(source);
  if (!in) throw ParseError("cannot open sequence source " + source.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    fs::path p = line.substr(first);
    if (p.is_relative()) p = source.parent_path() / p;
    paths.push_back(p);
  }
  return paths;
}

inline TriangleFrame frame_from_ply(const PlyMesh& mesh) { return make_frame(mesh.vertices, mesh.faces); }

inline FrameSequence load_sequence(const std::filesystem::path& source, std::size_t max_frames = 0) {
  std::vector<TriangleFrame> frames;
  for (const auto& path : sequence_paths(source)) {
    if (max_frames != 0 && frames.size() >= max_frames) break;
    frames.push_back(frame_from_ply(load_ply(path)));
  }
  if (frames.empty()) throw ParseError("no frames found at " + source.string());
  return make_sequence(std::move(frames));
}

}  // namespace mochi
