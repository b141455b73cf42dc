#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace faqforge {

// Self-describing checkpoint:
//   "FAQFORGE-ARCHIVE 1\n"
//   <header byte length, uint64 little-endian>
//   <header JSON: kind, meta, byte_order, dtype, tensors[name, shape, offset]>
//   <tensor payload: float64 little-endian, row-major, concatenated>
struct Archive {
  struct Tensor {
    std::string name;
    Eigen::MatrixXd value;
  };

  std::string kind;
  nlohmann::ordered_json meta;
  std::vector<Tensor> tensors;

  const Eigen::MatrixXd &tensor(const std::string &name) const;
};

void write_archive(std::ostream &out, const Archive &archive);
Archive read_archive(std::istream &in);  // throws BadArchive

void save_archive(const std::filesystem::path &path, const Archive &archive);
Archive load_archive(const std::filesystem::path &path);

// Hex SHA-256 of a byte string / a file.
std::string sha256_hex(const std::string &bytes);
std::string sha256_file(const std::filesystem::path &path);

} // namespace faqforge
