#include "mfg/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mfg {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename to '" + path.string() + "' failed");
  }
}

void write_field_csv(const fs::path& path, const GridField& field) {
  const PeriodicGrid& g = field.grid();
  std::ostringstream os;
  os.precision(17);
  os << "N=" << g.dim << ",n=" << g.n << ",h=" << g.h << "\n";
  for (std::int64_t p = 0; p < field.size(); ++p) {
    for (int a = 0; a < g.dim; ++a) os << g.position(p, a) << ",";
    os << field[p] << "\n";
  }
  atomic_write(path, os.str());
}

GridField read_field_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty field file '" + path.string() + "'");
  int dim = 0, n = 0;
  double h = 0.0;
  if (std::sscanf(header.c_str(), "N=%d,n=%d,h=%lf", &dim, &n, &h) != 3)
    throw IoError("bad field header in '" + path.string() + "'");
  GridField f(PeriodicGrid::make(dim, n));
  std::string line;
  std::int64_t p = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos || p >= f.size())
      throw IoError("bad field row in '" + path.string() + "'");
    f[p++] = std::stod(line.substr(comma + 1));
  }
  if (p != f.size()) throw IoError("field file '" + path.string() + "' is truncated");
  return f;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + k])) << (8 * k);
  return v;
}

}  // namespace

void write_fields_binary(const fs::path& path, const std::vector<GridField>& components) {
  if (components.empty()) throw IoError("write_fields_binary: no components");
  const PeriodicGrid& g = components.front().grid();
  std::string out;
  out.reserve(17 + components.size() * static_cast<std::size_t>(g.size()) * 8);
  out += "MFGW1";
  put_u32(out, static_cast<std::uint32_t>(g.dim));
  put_u32(out, static_cast<std::uint32_t>(g.n));
  put_u32(out, static_cast<std::uint32_t>(components.size()));
  for (const GridField& f : components) {
    if (!(f.grid() == g)) throw IoError("write_fields_binary: component grids differ");
    for (std::int64_t p = 0; p < f.size(); ++p) {
      std::uint64_t bits;
      const double v = f[p];
      std::memcpy(&bits, &v, 8);
      for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
    }
  }
  atomic_write(path, out);
}

std::vector<GridField> read_fields_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  if (bytes.size() < 17 || bytes.compare(0, 5, "MFGW1") != 0)
    throw IoError("'" + path.string() + "' is not a MFGW1 field file");
  const int dim = static_cast<int>(get_u32(bytes, 5));
  const int n = static_cast<int>(get_u32(bytes, 9));
  const std::uint32_t count = get_u32(bytes, 13);
  PeriodicGrid g = PeriodicGrid::make(dim, n);
  const std::size_t payload = static_cast<std::size_t>(g.size()) * 8;
  if (bytes.size() != 17 + payload * count)
    throw IoError("'" + path.string() + "' is truncated");
  std::vector<GridField> out;
  std::size_t at = 17;
  for (std::uint32_t c = 0; c < count; ++c) {
    GridField f(g);
    for (std::int64_t p = 0; p < f.size(); ++p, at += 8) {
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + k])) << (8 * k);
      double v;
      std::memcpy(&v, &bits, 8);
      f[p] = v;
    }
    out.push_back(std::move(f));
  }
  return out;
}

DirectoryLock::DirectoryLock(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  lock_path_ = dir / ".lock";
  std::FILE* f = std::fopen(lock_path_.c_str(), "wx");
  if (!f)
    throw IoError("output directory '" + dir.string() +
                  "' is locked by another run (remove .lock if stale)");
  std::fclose(f);
  held_ = true;
}

DirectoryLock::~DirectoryLock() {
  if (held_) {
    std::error_code ec;
    fs::remove(lock_path_, ec);
  }
}

}  // namespace mfg
