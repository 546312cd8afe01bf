#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "featadapt/bench.hpp"

namespace featadapt {

// Flat key = value text. Blank lines and lines starting with '#' are ignored.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct KeyValueConfig {
  std::string source;
  std::vector<ConfigEntry> entries;  // file order, keys unique

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
};

// Throws FormatError naming the source and line for malformed lines,
// duplicate keys and keys outside the recognised set.
KeyValueConfig parse_config(std::istream& in, const std::string& source = "<config>");
KeyValueConfig load_config(const std::string& path);
std::string format_config(const KeyValueConfig& c);

extern const std::vector<std::string> kConfigKeys;

// Grid syntax: "40,60,80" or "start:stop:step" (inclusive).
std::vector<int> parse_grid(const std::string& text);

// Builds a bench config. Seeds are seed, seed+1, ..., seed+seeds-1.
BenchConfig bench_config_from(const KeyValueConfig& c);

// Runs the job and writes its CSV to `out` (path key) or to `log` when unset.
// Returns 0 on success; hard errors propagate.
int run_config(const std::string& path, std::ostream& log);
int run_config(const KeyValueConfig& c, std::ostream& log);

// Replaces the value of `key` or appends it.
void set_config_value(KeyValueConfig& c, const std::string& key, const std::string& value);

}  // namespace featadapt
