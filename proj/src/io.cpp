#include "mrsi/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "mrsi/errors.hpp"

namespace mrsi::io {

using nlohmann::json;

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument("write failed: " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::span<const std::uint8_t>(
                        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path) {
  const auto b = read_bytes(path);
  return {b.begin(), b.end()};
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

void put_f32(std::uint8_t* dst, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int i = 0; i < 4; ++i) dst[i] = static_cast<std::uint8_t>(bits >> (8 * i));
}

double get_f32(const std::uint8_t* src) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(src[i]) << (8 * i);
  return static_cast<double>(std::bit_cast<float>(bits));
}

json with_extra(json base, const json& extra) {
  if (!extra.is_null()) {
    if (!extra.is_object()) throw InvalidArgument("sidecar extras must be a JSON object");
    for (auto it = extra.begin(); it != extra.end(); ++it) base[it.key()] = it.value();
  }
  return base;
}

fs::path with_suffix(const fs::path& stem, const char* ext) {
  return fs::path(stem.string() + ext);
}

template <class T>
T sidecar_get(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) throw ConfigError(std::string("/") + key, "missing in " + where.string());
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("/") + key, "wrong type in " + where.string());
  }
}

void check_hash(const std::vector<std::uint8_t>& bytes, const json& side, const fs::path& where) {
  const auto expect = sidecar_get<std::string>(side, "data_sha256", where);
  if (sha256_hex(bytes) != expect) {
    throw InvalidArgument("data hash mismatch for " + where.string());
  }
}

}  // namespace

std::vector<std::uint8_t> encode_complex_f32(std::span<const cplx> data) {
  std::vector<std::uint8_t> out(data.size() * 8);
  for (std::size_t i = 0; i < data.size(); ++i) {
    put_f32(&out[8 * i], data[i].real());
    put_f32(&out[8 * i + 4], data[i].imag());
  }
  return out;
}

std::vector<cplx> decode_complex_f32(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 8) throw InvalidArgument("complex float32 payload size not a multiple of 8");
  std::vector<cplx> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {get_f32(&bytes[8 * i]), get_f32(&bytes[8 * i + 4])};
  }
  return out;
}

std::vector<std::uint8_t> encode_f32(std::span<const double> data) {
  std::vector<std::uint8_t> out(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) put_f32(&out[4 * i], data[i]);
  return out;
}

std::vector<double> decode_f32(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4) throw InvalidArgument("float32 payload size not a multiple of 4");
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_f32(&bytes[4 * i]);
  return out;
}

void write_raw(const fs::path& stem, const RawKSpace& raw, const json& extra) {
  const auto bytes = encode_complex_f32(raw.data);
  write_bytes(with_suffix(stem, ".bin"), bytes);
  json side{{"format", "complex float32 little-endian, interleaved re/im"},
            {"layout", "[arm][temporal][spectral][sample]"},
            {"n_arms", raw.n_arms},
            {"n_temporal", raw.n_temporal},
            {"n_spectral", raw.n_spectral},
            {"n_samples", raw.n_samples},
            {"noise_sigma", raw.noise_sigma},
            {"rng_seed", raw.rng_seed},
            {"data_sha256", sha256_hex(bytes)},
            {"tool_version", kToolVersion}};
  write_json(with_suffix(stem, ".json"), with_extra(std::move(side), extra));
}

RawKSpace read_raw(const fs::path& stem, json* sidecar) {
  const auto side_path = with_suffix(stem, ".json");
  const json side = json::parse(read_text(side_path));
  RawKSpace raw;
  raw.n_arms = sidecar_get<int>(side, "n_arms", side_path);
  raw.n_temporal = sidecar_get<int>(side, "n_temporal", side_path);
  raw.n_spectral = sidecar_get<int>(side, "n_spectral", side_path);
  raw.n_samples = sidecar_get<int>(side, "n_samples", side_path);
  raw.noise_sigma = sidecar_get<double>(side, "noise_sigma", side_path);
  raw.rng_seed = sidecar_get<std::uint64_t>(side, "rng_seed", side_path);
  const auto bytes = read_bytes(with_suffix(stem, ".bin"));
  check_hash(bytes, side, side_path);
  raw.data = decode_complex_f32(bytes);
  const std::size_t expect = static_cast<std::size_t>(raw.n_arms) * raw.n_temporal *
                             raw.n_spectral * raw.n_samples;
  if (raw.data.size() != expect) {
    throw InvalidArgument("raw payload holds " + std::to_string(raw.data.size()) +
                          " samples, sidecar dims give " + std::to_string(expect));
  }
  if (sidecar) *sidecar = side;
  return raw;
}

void write_dataset(const fs::path& stem, const SpectroDataset& ds, const json& extra) {
  ds.validate();
  const auto bytes = encode_complex_f32(ds.fids);
  write_bytes(with_suffix(stem, ".bin"), bytes);
  json side{{"format", "complex float32 little-endian, interleaved re/im"},
            {"layout", "[y][x][t]"},
            {"nx", ds.nx},
            {"ny", ds.ny},
            {"n_points", ds.n_points},
            {"dwell_s", ds.dwell_s},
            {"te_s", ds.te_s},
            {"larmor_mhz", ds.field.larmor_mhz},
            {"water_ref_ppm", ds.field.water_ref_ppm},
            {"data_sha256", sha256_hex(bytes)},
            {"tool_version", kToolVersion}};
  write_json(with_suffix(stem, ".json"), with_extra(std::move(side), extra));
}

SpectroDataset read_dataset(const fs::path& stem, json* sidecar) {
  const auto side_path = with_suffix(stem, ".json");
  const json side = json::parse(read_text(side_path));
  FieldConstants field;
  field.larmor_mhz = sidecar_get<double>(side, "larmor_mhz", side_path);
  field.water_ref_ppm = sidecar_get<double>(side, "water_ref_ppm", side_path);
  auto ds = make_dataset(sidecar_get<int>(side, "nx", side_path), sidecar_get<int>(side, "ny", side_path),
                         sidecar_get<std::size_t>(side, "n_points", side_path),
                         sidecar_get<double>(side, "dwell_s", side_path), field,
                         sidecar_get<double>(side, "te_s", side_path));
  const auto bytes = read_bytes(with_suffix(stem, ".bin"));
  check_hash(bytes, side, side_path);
  auto fids = decode_complex_f32(bytes);
  if (fids.size() != ds.fids.size()) throw InvalidArgument("dataset payload size mismatch");
  ds.fids = std::move(fids);
  if (sidecar) *sidecar = side;
  return ds;
}

void write_map(const fs::path& stem, const MapImage& map, const std::string& config_hash,
               double pgm_lo, double pgm_hi) {
  map.validate();
  std::vector<double> vals(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) vals[i] = map.valid[i] ? map.values[i] : 0.0;
  const auto bytes = encode_f32(vals);
  write_bytes(with_suffix(stem, ".f32"), bytes);
  std::vector<std::uint8_t> mask(map.valid.begin(), map.valid.end());
  write_json(with_suffix(stem, ".json"),
             json{{"format", "float32 little-endian, row-major [y][x]; invalid voxels stored as 0"},
                  {"nx", map.nx},
                  {"ny", map.ny},
                  {"valid_sha256", sha256_hex(mask)},
                  {"valid", map.valid},
                  {"data_sha256", sha256_hex(bytes)},
                  {"config_sha256", config_hash},
                  {"tool_version", kToolVersion}});

  // PGM preview, top row = largest y
  std::ostringstream pgm;
  pgm << "P2\n# config_sha256=" << config_hash << "\n" << map.nx << " " << map.ny << "\n255\n";
  const double span = pgm_hi > pgm_lo ? pgm_hi - pgm_lo : 1.0;
  for (int y = map.ny - 1; y >= 0; --y) {
    for (int x = 0; x < map.nx; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * map.nx + x;
      int g = 0;
      if (map.valid[i]) {
        g = static_cast<int>(std::lround(255.0 * std::clamp((map.values[i] - pgm_lo) / span, 0.0, 1.0)));
      }
      pgm << g << (x + 1 < map.nx ? " " : "\n");
    }
  }
  write_text(with_suffix(stem, ".pgm"), pgm.str());

  CsvWriter csv({"x", "y", "value"}, config_hash);
  for (int y = 0; y < map.ny; ++y) {
    for (int x = 0; x < map.nx; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * map.nx + x;
      if (map.valid[i]) csv.row({std::to_string(x), std::to_string(y), fmt(map.values[i])});
    }
  }
  csv.save(with_suffix(stem, ".csv"));
}

MapImage read_map(const fs::path& stem) {
  const auto side_path = with_suffix(stem, ".json");
  const json side = json::parse(read_text(side_path));
  MapImage m(sidecar_get<int>(side, "nx", side_path), sidecar_get<int>(side, "ny", side_path));
  const auto bytes = read_bytes(with_suffix(stem, ".f32"));
  check_hash(bytes, side, side_path);
  m.values = decode_f32(bytes);
  m.valid = sidecar_get<std::vector<std::uint8_t>>(side, "valid", side_path);
  if (m.values.size() != m.size() || m.valid.size() != m.size()) {
    throw InvalidArgument("map payload size mismatch in " + stem.string());
  }
  return m;
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> header, const std::string& config_hash)
    : n_cols_(header.size()) {
  out_ = "# config_sha256=" + config_hash + "\n";
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_cols_) throw InvalidArgument("CSV row has the wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += csv_cell(cells[i]);
  }
  out_ += '\n';
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string fmt_fixed(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return {buf, res.ptr};
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidArgument("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != t.header.size()) {
        throw InvalidArgument("ragged CSV row in " + path.string());
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw InvalidArgument("CSV without header: " + path.string());
  return t;
}

}  // namespace mrsi::io
