#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "idla/core.hpp"
#include "idla/rng.hpp"

namespace idla::io {

/// Formats a double deterministically (shortest form with 12 significant
/// digits); data files must be byte-identical across reruns of a seed.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
inline std::string fmt(std::int64_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt(const std::string& v) { return v; }

/// Everything needed to reproduce a data file. Timestamps are deliberately
/// not part of the manifest lines written into data files; identical
/// manifests must give byte-identical outputs.
struct Manifest {
  std::string schema;       // e.g. "idla.scan/1"
  std::string command;      // reconstructed command line
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> params;

  void add(const std::string& key, const std::string& value) { params.push_back({key, value}); }
  template <class T>
  void add_value(const std::string& key, const T& v) {
    params.push_back({key, fmt(v)});
  }

  std::vector<std::string> header_lines() const {
    std::vector<std::string> lines;
    lines.push_back("# schema=" + schema);
    lines.push_back("# version=" + std::string(kVersion));
    lines.push_back("# generator=" + std::string(kGeneratorId));
    lines.push_back("# seed=" + std::to_string(seed));
    if (!command.empty()) lines.push_back("# command=" + command);
    for (const auto& [k, v] : params) lines.push_back("# " + k + "=" + v);
    return lines;
  }
};

class CsvWriter {
public:
  CsvWriter(const std::string& path, const Manifest& manifest,
            const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw_usage("cannot open output file " + path);
    for (const auto& line : manifest.header_lines()) out_ << line << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

  bool good() const { return static_cast<bool>(out_); }

private:
  std::ofstream out_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw_usage("cannot open output file " + path);
  out << text;
}

}  // namespace idla::io
