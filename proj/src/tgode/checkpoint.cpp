#include "tgode/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "tgode/errors.hpp"

namespace tgode {

namespace {

constexpr char kMagic[] = "TGODE1";

void write_u32(std::ostream& os, std::uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

bool read_u32(std::istream& is, std::uint32_t& x) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  x = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

void write_f32(std::ostream& os, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(os, bits);
}

bool read_f32(std::istream& is, float& f) {
  std::uint32_t bits;
  if (!read_u32(is, bits)) return false;
  std::memcpy(&f, &bits, 4);
  return true;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<const Param*>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os.write(kMagic, 6);
  for (const Param* p : params) {
    write_u32(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u32(os, 2);
    write_u32(os, static_cast<std::uint32_t>(p->value.rows));
    write_u32(os, static_cast<std::uint32_t>(p->value.cols));
    for (double x : p->value.v) write_f32(os, static_cast<float>(x));
  }
  if (!os) throw IoError("write failed for " + path);
}

std::vector<CheckpointEntry> read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[6];
  if (!is.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0)
    throw MismatchError(path + ": not a TGODE1 checkpoint");
  std::vector<CheckpointEntry> out;
  std::uint32_t name_len;
  while (read_u32(is, name_len)) {
    CheckpointEntry e;
    e.name.resize(name_len);
    if (!is.read(e.name.data(), name_len)) throw MismatchError(path + ": truncated record");
    std::uint32_t rank;
    if (!read_u32(is, rank)) throw MismatchError(path + ": truncated record");
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      std::uint32_t d;
      if (!read_u32(is, d)) throw MismatchError(path + ": truncated record");
      e.dims.push_back(static_cast<int>(d));
      count *= d;
    }
    e.data.resize(count);
    for (std::size_t i = 0; i < count; ++i)
      if (!read_f32(is, e.data[i])) throw MismatchError(path + ": truncated payload");
    out.push_back(std::move(e));
  }
  return out;
}

void load_checkpoint(const std::string& path, const std::vector<Param*>& params) {
  auto entries = read_checkpoint(path);
  std::map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;
  for (Param* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw MismatchError(path + ": missing tensor '" + p->name + "'");
    const CheckpointEntry& e = *it->second;
    if (e.dims.size() != 2 || e.dims[0] != p->value.rows || e.dims[1] != p->value.cols)
      throw MismatchError(path + ": shape mismatch for '" + p->name + "'");
    for (std::size_t i = 0; i < e.data.size(); ++i) p->value.v[i] = static_cast<double>(e.data[i]);
    p->zero_grad();
  }
}

}  // namespace tgode
