#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evea/errors.hpp"
#include "evea/objectives.hpp"

namespace evea {

// Shortest round-trip decimal form; byte-stable across platforms.
inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

// Write-then-rename so readers never observe partial files and an
// interrupted grid leaves completed outputs intact.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Front CSV: provenance comment, then "generation,influence,cost,time,hv",
// one row per front member (objectives in max/min/min orientation).
inline std::string front_csv(const std::vector<ObjectiveVector>& front, std::uint32_t generation,
                             double hypervolume, const std::string& provenance) {
  std::vector<ObjectiveVector> rows = front;
  std::sort(rows.begin(), rows.end(), [](const ObjectiveVector& a, const ObjectiveVector& b) {
    return a.min_triple() < b.min_triple();
  });
  std::string out = "# " + provenance + "\n";
  out += "generation,influence,cost,time,hv\n";
  for (const auto& r : rows) {
    out += std::to_string(generation) + ',' + format_double(r.spread()) + ',' +
           format_double(r.cost()) + ',' + format_double(r.time()) + ',' +
           format_double(hypervolume) + '\n';
  }
  return out;
}

// Trace CSV: same header; one row per generation where influence/cost/time
// are the front's per-objective best values (ideal point) and hv is the
// generation's front-0 hypervolume.
struct TraceRow {
  std::uint32_t generation = 0;
  double best_influence = 0.0;
  double best_cost = 0.0;
  double best_time = 0.0;
  double hypervolume = 0.0;
};

inline std::string trace_csv(const std::vector<TraceRow>& rows, const std::string& provenance) {
  std::string out = "# " + provenance + "\n";
  out += "generation,influence,cost,time,hv\n";
  for (const auto& r : rows) {
    out += std::to_string(r.generation) + ',' + format_double(r.best_influence) + ',' +
           format_double(r.best_cost) + ',' + format_double(r.best_time) + ',' +
           format_double(r.hypervolume) + '\n';
  }
  return out;
}

// Reads the objective columns of a front CSV back into vectors.
inline std::vector<ObjectiveVector> read_front_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());
  std::vector<ObjectiveVector> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("generation,", 0) != 0)
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": missing header");
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad numeric cell");
      }
    }
    if (values.size() != 5)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 5 columns");
    rows.push_back(ObjectiveVector::from_max(values[1], values[2], values[3]));
  }
  if (!header_seen) throw DataError(path.string() + ": empty front file");
  return rows;
}

}  // namespace evea
