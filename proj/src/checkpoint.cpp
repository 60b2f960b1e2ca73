#include "linereg/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace linereg {

namespace {

constexpr char kMagic[8] = {'L', 'R', 'E', 'G', 'N', 'E', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint code assumes a little-endian host");

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
}

void write_i32(std::ofstream& out, std::int32_t v) { write_bytes(out, &v, 4); }
void write_u64(std::ofstream& out, std::uint64_t v) { write_bytes(out, &v, 8); }

std::int32_t read_i32(std::ifstream& in) {
  std::int32_t v;
  read_bytes(in, &v, 4);
  return v;
}
std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v;
  read_bytes(in, &v, 8);
  return v;
}

void write_blob(std::ofstream& out, const std::vector<float>& v) {
  write_u64(out, v.size());
  write_bytes(out, v.data(), v.size() * sizeof(float));
}

void read_blob(std::ifstream& in, std::vector<float>& v) {
  const std::uint64_t count = read_u64(in);
  if (count != v.size()) {
    throw std::runtime_error("checkpoint: parameter blob size does not match the stored config");
  }
  read_bytes(in, v.data(), v.size() * sizeof(float));
}

}  // namespace

void save_checkpoint(const MicroNet<float>& net, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + tmp + " for writing");
    write_bytes(out, kMagic, sizeof(kMagic));
    const NetConfig& c = net.config();
    write_i32(out, c.k);
    write_i32(out, c.stride);
    write_i32(out, c.channels);
    write_i32(out, c.descriptor_dim);
    write_i32(out, c.scale_invariant_first_layer ? 1 : 0);
    net.blocks().for_each([&](const Affine<float>& a) {
      write_blob(out, a.w);
      write_blob(out, a.b);
    });
    if (!out) throw std::runtime_error("checkpoint: write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("checkpoint: rename to " + path + " failed: " + ec.message());
  }
}

MicroNet<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: " + path + " is not a model checkpoint");
  }
  NetConfig cfg;
  cfg.k = read_i32(in);
  cfg.stride = read_i32(in);
  cfg.channels = read_i32(in);
  cfg.descriptor_dim = read_i32(in);
  cfg.scale_invariant_first_layer = read_i32(in) != 0;
  cfg.validate();

  MicroNet<float> net(cfg, /*seed=*/0);
  net.blocks().for_each([&](Affine<float>& a) {
    read_blob(in, a.w);
    read_blob(in, a.b);
  });
  return net;
}

}  // namespace linereg
