// Flat-file plumbing for the command-line tools: CSV tables written with
// round-trip double precision, a small CSV reader so plots can be rebuilt
// from the data files alone, and per-run manifests that fingerprint what
// produced each output directory.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qsn/hash.hpp"

namespace qsn {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kDataFormatVersion = 1;

// %.17g: the shortest printf format that survives a text round trip for
// every finite double, so rerunning a seeded command reproduces files byte
// for byte.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {
    if (header_.empty())
      throw std::invalid_argument("csv: header must not be empty");
  }

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(uint64_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  template <class... Ts>
  void push_row(const Ts&... vals) {
    std::vector<std::string> r;
    r.reserve(sizeof...(Ts));
    (r.push_back(cell(vals)), ...);
    add_row(std::move(r));
  }

  void add_row(std::vector<std::string> r) {
    if (r.size() != header_.size())
      throw std::invalid_argument("csv: row width does not match header");
    rows_.push_back(std::move(r));
  }

  const std::vector<std::string>& header() const { return header_; }
  size_t row_count() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    for (size_t i = 0; i < header_.size(); ++i) {
      if (i) out += ',';
      out += detail::csv_escape(header_[i]);
    }
    out += '\n';
    for (const auto& r : rows_) {
      for (size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += detail::csv_escape(r[i]);
      }
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_text(const std::filesystem::path& path,
                       std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string out((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return out;
}

// Parsed CSV with header lookup; cells stay as text so the caller decides
// what is numeric.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::out_of_range("csv: no column named \"" + name + "\"");
  }

  double number(size_t row, int col) const {
    const std::string& s = rows.at(row).at(static_cast<size_t>(col));
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
      throw std::invalid_argument("csv: cell is not a number: \"" + s + "\"");
    return v;
  }
};

inline Csv parse_csv(std::string_view text) {
  Csv out;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  auto end_cell = [&] {
    row.push_back(std::move(cell));
    cell.clear();
  };
  auto end_row = [&] {
    end_cell();
    if (out.header.empty())
      out.header = std::move(row);
    else
      out.rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      any = true;
    } else if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      end_cell();
      any = true;
    } else if (c == '\n') {
      if (any || !cell.empty() || !row.empty()) end_row();
    } else if (c != '\r') {
      cell += c;
      any = true;
    }
  }
  if (any || !cell.empty() || !row.empty()) end_row();
  for (const auto& r : out.rows)
    if (r.size() != out.header.size())
      throw std::invalid_argument("csv: ragged row");
  return out;
}

inline Csv read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text(path));
}

// Every command stamps its output directory with one of these. Two runs
// with equal manifests were produced by the same code from the same
// effective configuration and seed, so their data files match byte for
// byte.
struct Manifest {
  std::string command;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  std::string library_version = kLibraryVersion;
  int format_version = kDataFormatVersion;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    char hex[19];
    std::snprintf(hex, sizeof(hex), "0x%016llx",
                  static_cast<unsigned long long>(config_hash));
    return nlohmann::json{{"command", command},
                          {"seed", seed},
                          {"config_hash", hex},
                          {"library_version", library_version},
                          {"format_version", format_version},
                          {"outputs", outputs}};
  }
};

inline std::filesystem::path write_manifest(const std::filesystem::path& dir,
                                            const Manifest& m) {
  const auto path = dir / (m.command + "_manifest.json");
  write_text(path, m.to_json().dump(2) + "\n");
  return path;
}

}  // namespace qsn
