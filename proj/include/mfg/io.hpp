#pragma once

#include "mfg/grid.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfg {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All writes go through a temp file in the same directory followed by a
// rename, so readers never see partial artifacts.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

// One field per file: a one-line header "N=..,n=..,h=.." then one row per
// grid point, "x1[,x2[,x3]],value" in storage order.
void write_field_csv(const std::filesystem::path& path, const GridField& field);
GridField read_field_csv(const std::filesystem::path& path);

// Compact twin for large runs: magic "MFGW1", then little-endian uint32
// N, n, component count, then the float64 samples of each component.
void write_fields_binary(const std::filesystem::path& path,
                         const std::vector<GridField>& components);
std::vector<GridField> read_fields_binary(const std::filesystem::path& path);

// Exclusive lock file guarding an output directory; removed on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path lock_path_;
  bool held_ = false;
};

}  // namespace mfg
