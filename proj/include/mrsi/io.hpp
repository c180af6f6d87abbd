#pragma once

// On-disk formats. Complex arrays are little-endian float32 pairs (re, im);
// every binary has a JSON sidecar with its dimensions and SHA-256 hashes.
// Text outputs (CSV, PGM) start with a comment line carrying the config hash.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrsi/model.hpp"
#include "mrsi/phantom.hpp"

namespace mrsi::io {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "mrsi 1.0.0";

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const fs::path& path);

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_text(const fs::path& path, const std::string& text);
std::vector<std::uint8_t> read_bytes(const fs::path& path);
std::string read_text(const fs::path& path);
/// Pretty-printed JSON with sorted keys and a trailing newline.
void write_json(const fs::path& path, const nlohmann::json& j);

std::vector<std::uint8_t> encode_complex_f32(std::span<const cplx> data);
std::vector<cplx> decode_complex_f32(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_f32(std::span<const double> data);
std::vector<double> decode_f32(std::span<const std::uint8_t> bytes);

/// <stem>.bin + <stem>.json. `extra` is merged into the sidecar.
void write_raw(const fs::path& stem, const RawKSpace& raw, const nlohmann::json& extra);
/// Reads <stem>.bin / <stem>.json, checks dimensions and the data hash.
RawKSpace read_raw(const fs::path& stem, nlohmann::json* sidecar = nullptr);

void write_dataset(const fs::path& stem, const SpectroDataset& ds, const nlohmann::json& extra);
SpectroDataset read_dataset(const fs::path& stem, nlohmann::json* sidecar = nullptr);

/// <stem>.f32 (+ .json sidecar), <stem>.pgm preview, <stem>.csv of valid voxels.
void write_map(const fs::path& stem, const MapImage& map, const std::string& config_hash,
               double pgm_lo, double pgm_hi);
MapImage read_map(const fs::path& stem);

/// Minimal CSV writer: first line "# config_sha256=<hash>", then rows.
class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> header, const std::string& config_hash);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return out_; }
  void save(const fs::path& path) const { write_text(path, out_); }

 private:
  std::size_t n_cols_;
  std::string out_;
};

/// Fixed, locale-independent number formatting (shortest round-trip form).
std::string fmt(double v);
std::string fmt_fixed(double v, int decimals);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};
/// Reads a CSV written by CsvWriter; '#' comment lines are skipped.
CsvTable read_csv(const fs::path& path);

}  // namespace mrsi::io
