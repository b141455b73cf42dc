#include "faqforge/archive.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "faqforge/error.hpp"

namespace faqforge {

namespace {

constexpr std::string_view kMagic = "FAQFORGE-ARCHIVE 1\n";

void put_u64(std::ostream &out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream &in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char *>(b.data()), 8);
  if (in.gcount() != 8) throw Error(ErrorKind::BadArchive, "truncated archive header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

} // namespace

const Eigen::MatrixXd &Archive::tensor(const std::string &name) const {
  for (const auto &t : tensors)
    if (t.name == name) return t.value;
  throw Error(ErrorKind::BadArchive, "archive has no tensor '" + name + "'");
}

void write_archive(std::ostream &out, const Archive &archive) {
  nlohmann::ordered_json header;
  header["kind"] = archive.kind;
  header["byte_order"] = "little";
  header["dtype"] = "float64";
  header["layout"] = "row-major";
  header["meta"] = archive.meta;
  header["tensors"] = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto &t : archive.tensors) {
    header["tensors"].push_back({{"name", t.name},
                                 {"shape", {t.value.rows(), t.value.cols()}},
                                 {"offset", offset}});
    offset += static_cast<std::uint64_t>(t.value.size()) * 8;
  }
  const std::string text = header.dump();
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto &t : archive.tensors)
    for (Eigen::Index i = 0; i < t.value.rows(); ++i)
      for (Eigen::Index j = 0; j < t.value.cols(); ++j)
        put_u64(out, std::bit_cast<std::uint64_t>(t.value(i, j)));
}

Archive read_archive(std::istream &in) {
  std::string magic(kMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (magic != kMagic) throw Error(ErrorKind::BadArchive, "not a faqforge archive");
  const std::uint64_t length = get_u64(in);
  if (length > (1ULL << 31)) throw Error(ErrorKind::BadArchive, "implausible header size");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (static_cast<std::uint64_t>(in.gcount()) != length)
    throw Error(ErrorKind::BadArchive, "truncated archive header");

  Archive archive;
  try {
    const auto header = nlohmann::ordered_json::parse(text);
    if (header.at("byte_order") != "little" || header.at("dtype") != "float64")
      throw Error(ErrorKind::BadArchive, "unsupported tensor encoding");
    archive.kind = header.at("kind").get<std::string>();
    archive.meta = header.at("meta");
    for (const auto &t : header.at("tensors")) {
      const auto rows = t.at("shape").at(0).get<Eigen::Index>();
      const auto cols = t.at("shape").at(1).get<Eigen::Index>();
      Archive::Tensor tensor{t.at("name").get<std::string>(),
                             Eigen::MatrixXd(rows, cols)};
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
          tensor.value(i, j) = std::bit_cast<double>(get_u64(in));
      archive.tensors.push_back(std::move(tensor));
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::BadArchive, std::string("bad archive header: ") + e.what());
  }
  return archive;
}

void save_archive(const std::filesystem::path &path, const Archive &archive) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_archive(out, archive);
}

Archive load_archive(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingArtifact, "cannot open " + path.string());
  return read_archive(in);
}

std::string sha256_hex(const std::string &bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingArtifact, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

} // namespace faqforge
