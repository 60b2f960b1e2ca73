#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "linereg/types.hpp"

namespace linereg {

// Malformed input file. Messages name the offending byte offset (binary
// formats) or line number (text formats).
class FileFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A loaded scan plus its provenance.
struct ScanRecord {
  PointCloud cloud;
  std::string source_file;
  SE3Transform applied = SE3Transform::identity();  // transform applied after load

  void validate() const { cloud.check_channels(); }
};

// Raw LiDAR scan format: little-endian 32-bit floats, four per point
// (x, y, z, intensity). Intensity is discarded on read and written as zero.
// Throws FileFormatError when the byte count is not a multiple of 16 (the
// message names the offset where the truncated record starts).
PointCloud read_kitti_bin(const std::filesystem::path& path);
void write_kitti_bin(const std::filesystem::path& path, const PointCloud& cloud);

enum class PlyFormat { Ascii, BinaryLittleEndian };

// Everything a PLY in this project can carry: points with optional label /
// score / descriptor channels, plus edge pairs when the file stores segments.
struct PlyData {
  PointCloud cloud;
  std::vector<std::array<int, 2>> edges;  // endpoint-vertex index pairs
};

// Vertex properties, in file order: x, y, z (float64), then optionally
// line_label (uint8), score (float32), and desc_0..desc_{d-1} (float32).
// Properties may appear in any order in a foreign file but names and types
// must match this table; a missing coordinate or an unknown property is a
// FileFormatError naming the header line.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
               PlyFormat format = PlyFormat::Ascii);

// Segment export for external viewers: one vertex per endpoint (x, y, z) and
// one edge element (int32 vertex1, vertex2) per segment, so n segments
// produce 2n vertices and n edges.
void write_ply(const std::filesystem::path& path, const std::vector<LineSegment>& segments,
               PlyFormat format = PlyFormat::Ascii);

PlyData read_ply(const std::filesystem::path& path);

// Full segment persistence (endpoints, direction, members, descriptor) as
// JSON lines: one object per segment. PLY keeps viewers happy; this keeps
// the data round-trippable.
void write_segments_jsonl(const std::filesystem::path& path,
                          const std::vector<LineSegment>& segments);
std::vector<LineSegment> read_segments_jsonl(const std::filesystem::path& path);

// Write-temp-then-rename in the target directory, so readers never observe a
// partially written file. Throws std::runtime_error on I/O failure.
void atomic_write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace linereg
