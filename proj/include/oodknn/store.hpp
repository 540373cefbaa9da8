#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodknn/matrix.hpp"

namespace oodknn {

// Binary layout, all integers little-endian:
//   magic "OODE" (4) | version u16 | kind u8 | reserved u8 (zero)
//   | rows u64 | cols u32 | rows*cols float32 LE, row-major
inline constexpr std::array<char, 4> kMagic{'O', 'O', 'D', 'E'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderSize = 20;

std::vector<std::byte> encode_matrix(const Matrix& m);
Matrix decode_matrix(std::span<const std::byte> bytes,
                     std::string_view source = "<memory>");

void write_matrix(const Matrix& m, const std::filesystem::path& path);

/// Reads a matrix file. Files ending in `.csv` are parsed as comma-separated
/// decimals (optional header row) and tagged with `csv_kind`; everything else
/// must be the binary format.
Matrix read_matrix(const std::filesystem::path& path,
                   MatrixKind csv_kind = MatrixKind::Embeddings);

Matrix parse_csv(std::string_view text, MatrixKind kind,
                 std::string_view source = "<memory>");

enum class DatasetRole { IdTrain, IdTest, OodTest };

std::string_view role_name(DatasetRole role) noexcept;

struct DatasetEntry {
  DatasetRole role;
  std::string name;
  std::filesystem::path embedding_path;
  std::optional<std::filesystem::path> logit_path;
};

/// Line-oriented manifest: `role<TAB>name<TAB>embedding_path[<TAB>logit_path]`.
/// Blank lines and lines starting with '#' are ignored. Relative paths are
/// resolved against the manifest's directory.
class DatasetManifest {
 public:
  static DatasetManifest parse(std::string_view text,
                               const std::filesystem::path& base_dir = {});
  /// Parses and additionally checks that every referenced file exists.
  static DatasetManifest load(const std::filesystem::path& path);

  std::span<const DatasetEntry> entries() const noexcept { return entries_; }
  const DatasetEntry& id_train() const;
  /// Throws ErrorKind::Config when there is no id-test entry.
  const DatasetEntry& id_test() const;
  std::vector<const DatasetEntry*> ood_tests() const;

 private:
  std::vector<DatasetEntry> entries_;
};

}  // namespace oodknn
