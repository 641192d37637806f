#include "survctl/grid_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include <openssl/evp.h>

#include "survctl/error.hpp"

namespace survctl {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMetaSuffix = ".meta.json";
constexpr const char* kPayloadSuffix = ".f64le";

std::vector<unsigned char> encode(std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * sizeof(double));
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return bytes;
}

std::vector<double> decode(std::span<const unsigned char> bytes) {
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 computation failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

std::string payload_sha256(std::span<const double> values) {
  return sha256_hex(encode(values));
}

GridFiles grid_files(const fs::path& dir, const std::string& name) {
  return {dir / (name + kMetaSuffix), dir / (name + kPayloadSuffix)};
}

GridFiles resolve_grid_files(const fs::path& path) {
  const std::string s = path.string();
  std::string stem = s;
  if (ends_with(s, kMetaSuffix)) {
    stem = s.substr(0, s.size() - std::strlen(kMetaSuffix));
  } else if (ends_with(s, kPayloadSuffix)) {
    stem = s.substr(0, s.size() - std::strlen(kPayloadSuffix));
  }
  return {fs::path(stem + kMetaSuffix), fs::path(stem + kPayloadSuffix)};
}

nlohmann::json grid_metadata(const ValueGrid& grid) {
  const GridSpec& s = grid.spec();
  return nlohmann::json{
      {"format_version", kGridFormatVersion},
      {"kind", kind_label(s.kind)},
      {"n", s.dim},
      {"m", s.nodes},
      {"b", s.params.drift},
      {"budget", s.params.budget},
      {"tolerance", grid.tolerance},
      {"residual", grid.residual},
      {"iterations", grid.iterations},
      {"index_order", "row-major"},
      {"payload_sha256", payload_sha256(grid.values())},
  };
}

GridFiles save_grid(const ValueGrid& grid, const fs::path& dir, const std::string& name,
                    const nlohmann::json& provenance) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
  const GridFiles files = grid_files(dir, name);
  const std::vector<unsigned char> bytes = encode(grid.values());
  {
    std::ofstream out(files.payload, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + files.payload.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + files.payload.string());
  }
  nlohmann::json meta = grid_metadata(grid);
  if (!provenance.is_null()) meta["provenance"] = provenance;
  std::ofstream out(files.meta, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + files.meta.string());
  out << meta.dump(2) << '\n';
  return files;
}

ValueGrid load_grid(const fs::path& path) {
  const GridFiles files = resolve_grid_files(path);
  if (!fs::exists(files.meta)) throw Error(ErrorCode::kIo, "missing grid metadata " + files.meta.string());
  if (!fs::exists(files.payload)) throw Error(ErrorCode::kIo, "missing grid payload " + files.payload.string());

  nlohmann::json meta;
  try {
    std::ifstream in(files.meta);
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, "unparsable grid metadata " + files.meta.string() + ": " + e.what());
  }

  GridSpec spec;
  std::string expected_sha;
  try {
    const int version = meta.at("format_version").get<int>();
    if (version != kGridFormatVersion) {
      throw Error(ErrorCode::kFormat, "grid format version " + std::to_string(version) +
                                          " is not supported (expected " +
                                          std::to_string(kGridFormatVersion) + ")");
    }
    if (meta.at("index_order").get<std::string>() != "row-major") {
      throw Error(ErrorCode::kFormat, "unsupported index order");
    }
    spec.kind = parse_kind(meta.at("kind").get<std::string>());
    spec.dim = meta.at("n").get<int>();
    spec.nodes = meta.at("m").get<int>();
    spec.params = DriftBudget{meta.at("b").get<double>(), meta.at("budget").get<double>()};
    expected_sha = meta.at("payload_sha256").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, "malformed grid metadata " + files.meta.string() + ": " + e.what());
  }
  spec.validate();

  const std::vector<unsigned char> bytes = read_bytes(files.payload);
  if (bytes.size() != spec.size() * sizeof(double)) {
    throw Error(ErrorCode::kFormat, "grid payload shape mismatch: " + std::to_string(bytes.size()) +
                                        " bytes, expected " +
                                        std::to_string(spec.size() * sizeof(double)));
  }
  if (sha256_hex(bytes) != expected_sha) {
    throw Error(ErrorCode::kFormat, "grid payload checksum mismatch for " + files.payload.string());
  }
  ValueGrid grid(spec, decode(bytes));
  grid.tolerance = meta.value("tolerance", 0.0);
  grid.residual = meta.value("residual", 0.0);
  grid.iterations = meta.value("iterations", 0);
  return grid;
}

ValueGrid load_grid_of_kind(const fs::path& path, ValueKind kind) {
  ValueGrid grid = load_grid(path);
  if (grid.spec().kind != kind) {
    throw Error(ErrorCode::kKind, "grid " + path.string() + " is a " +
                                      kind_label(grid.spec().kind) + "-grid, expected a " +
                                      kind_label(kind) + "-grid");
  }
  return grid;
}

}  // namespace survctl
