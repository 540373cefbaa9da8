#include "oodknn/store.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "oodknn/error.hpp"

namespace oodknn {

namespace fs = std::filesystem;

namespace {

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const std::byte* p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(std::to_integer<unsigned>(p[i])) << (8 * i);
  }
  return value;
}

std::string display(const fs::path& path) { return path.string(); }

std::vector<std::byte> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + display(path));
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::Io, "read failed for " + display(path));
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_float(std::string_view field, float& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::vector<std::byte> encode_matrix(const Matrix& m) {
  std::vector<std::byte> out;
  out.reserve(kHeaderSize + m.data().size() * sizeof(float));
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(m.kind()));
  put_le<std::uint8_t>(out, 0);
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (float v : m.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Matrix decode_matrix(std::span<const std::byte> bytes, std::string_view source) {
  const std::string where(source);
  if (bytes.size() < kMagic.size() ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorKind::Format, where + ": bad magic, not an OODE matrix file");
  }
  if (bytes.size() < kHeaderSize) {
    fail(ErrorKind::Corruption, where + ": truncated header");
  }
  const auto version = get_le<std::uint16_t>(bytes.data() + 4);
  if (version != kFormatVersion) {
    fail(ErrorKind::Format,
         where + ": unsupported format version " + std::to_string(version));
  }
  const auto kind = get_le<std::uint8_t>(bytes.data() + 6);
  if (kind > 1) {
    fail(ErrorKind::Format, where + ": unknown matrix kind " + std::to_string(kind));
  }
  if (get_le<std::uint8_t>(bytes.data() + 7) != 0) {
    fail(ErrorKind::Format, where + ": reserved header byte is not zero");
  }
  const auto rows = get_le<std::uint64_t>(bytes.data() + 8);
  const auto cols = get_le<std::uint32_t>(bytes.data() + 16);
  if (rows == 0 || cols == 0) {
    fail(ErrorKind::Validation, where + ": matrix has zero rows or columns");
  }
  const std::size_t payload = bytes.size() - kHeaderSize;
  if (rows > payload / sizeof(float) / cols ||
      rows * cols * sizeof(float) != payload) {
    fail(ErrorKind::Corruption,
         where + ": header declares " + std::to_string(rows) + "x" +
             std::to_string(cols) + " but payload holds " +
             std::to_string(payload) + " bytes");
  }
  std::vector<float> data(rows * cols);
  const std::byte* p = bytes.data() + kHeaderSize;
  for (std::size_t i = 0; i < data.size(); ++i, p += 4) {
    data[i] = std::bit_cast<float>(get_le<std::uint32_t>(p));
  }
  try {
    return Matrix(static_cast<MatrixKind>(kind), rows, cols, std::move(data));
  } catch (const Error& e) {
    fail(e.kind(), where + ": " + e.what());
  }
}

void write_matrix(const Matrix& m, const fs::path& path) {
  const auto bytes = encode_matrix(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + display(path) + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) fail(ErrorKind::Io, "write failed for " + display(path));
}

Matrix parse_csv(std::string_view text, MatrixKind kind, std::string_view source) {
  const std::string where(source);
  std::vector<float> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first = true;
  for (auto line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    std::vector<float> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i) {
      numeric = parse_float(fields[i], values[i]);
    }
    if (first) {
      first = false;
      cols = fields.size();
      if (!numeric) continue;  // header row
    }
    if (!numeric) {
      fail(ErrorKind::Format,
           where + ":" + std::to_string(line_no) + ": unparsable number");
    }
    if (fields.size() != cols) {
      fail(ErrorKind::Format, where + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(cols) +
                                  " columns, found " +
                                  std::to_string(fields.size()));
    }
    data.insert(data.end(), values.begin(), values.end());
    ++rows;
  }
  if (rows == 0) fail(ErrorKind::Validation, where + ": CSV has no data rows");
  try {
    return Matrix(kind, rows, cols, std::move(data));
  } catch (const Error& e) {
    fail(e.kind(), where + ": " + e.what());
  }
}

Matrix read_matrix(const fs::path& path, MatrixKind csv_kind) {
  if (!fs::exists(path)) fail(ErrorKind::Io, display(path) + ": no such file");
  const auto bytes = read_file_bytes(path);
  if (path.extension() == ".csv") {
    return parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                      bytes.size()),
                     csv_kind, display(path));
  }
  return decode_matrix(bytes, display(path));
}

// Manifest -------------------------------------------------------------------

std::string_view role_name(DatasetRole role) noexcept {
  switch (role) {
    case DatasetRole::IdTrain: return "id-train";
    case DatasetRole::IdTest: return "id-test";
    case DatasetRole::OodTest: return "ood-test";
  }
  return "unknown";
}

DatasetManifest DatasetManifest::parse(std::string_view text,
                                       const fs::path& base_dir) {
  DatasetManifest manifest;
  std::size_t line_no = 0;
  auto resolve = [&](std::string_view p) {
    fs::path path{std::string(p)};
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split(line, '\t');
    const std::string at = "manifest line " + std::to_string(line_no);
    if (fields.size() < 3 || fields.size() > 4) {
      fail(ErrorKind::Config, at + ": expected 3 or 4 tab-separated fields");
    }
    DatasetEntry entry;
    if (fields[0] == "id-train") {
      entry.role = DatasetRole::IdTrain;
    } else if (fields[0] == "id-test") {
      entry.role = DatasetRole::IdTest;
    } else if (fields[0] == "ood-test") {
      entry.role = DatasetRole::OodTest;
    } else {
      fail(ErrorKind::Config, at + ": unknown role '" + std::string(fields[0]) + "'");
    }
    entry.name = std::string(fields[1]);
    if (entry.name.empty() || fields[2].empty()) {
      fail(ErrorKind::Config, at + ": empty name or embedding path");
    }
    entry.embedding_path = resolve(fields[2]);
    if (fields.size() == 4 && !fields[3].empty()) entry.logit_path = resolve(fields[3]);
    manifest.entries_.push_back(std::move(entry));
  }
  std::size_t train = 0;
  for (const auto& e : manifest.entries_) train += e.role == DatasetRole::IdTrain;
  if (train != 1) {
    fail(ErrorKind::Config, "manifest must have exactly one id-train entry, found " +
                                std::to_string(train));
  }
  return manifest;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest " + display(path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto manifest = parse(buffer.str(), path.parent_path());
  for (const auto& e : manifest.entries_) {
    for (const auto* p : {&e.embedding_path,
                          e.logit_path ? &*e.logit_path : nullptr}) {
      if (p && !fs::is_regular_file(*p)) {
        fail(ErrorKind::Io, "dataset '" + e.name + "': missing file " + display(*p));
      }
    }
  }
  return manifest;
}

const DatasetEntry& DatasetManifest::id_train() const {
  for (const auto& e : entries_) {
    if (e.role == DatasetRole::IdTrain) return e;
  }
  fail(ErrorKind::Config, "manifest has no id-train entry");
}

const DatasetEntry& DatasetManifest::id_test() const {
  const DatasetEntry* found = nullptr;
  for (const auto& e : entries_) {
    if (e.role != DatasetRole::IdTest) continue;
    if (found) fail(ErrorKind::Config, "manifest has more than one id-test entry");
    found = &e;
  }
  if (!found) fail(ErrorKind::Config, "manifest has no id-test entry");
  return *found;
}

std::vector<const DatasetEntry*> DatasetManifest::ood_tests() const {
  std::vector<const DatasetEntry*> out;
  for (const auto& e : entries_) {
    if (e.role == DatasetRole::OodTest) out.push_back(&e);
  }
  return out;
}

}  // namespace oodknn
