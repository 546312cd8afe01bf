#include "featadapt/run_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "featadapt/errors.hpp"

namespace featadapt {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

const ConfigEntry& entry(const KeyValueConfig& c, const std::string& key) {
  for (const auto& e : c.entries) {
    if (e.key == key) return e;
  }
  throw ValidationError(c.source + ": missing key '" + key + "'");
}

template <class T, class Parse>
T convert(const KeyValueConfig& c, const std::string& key, Parse parse) {
  const ConfigEntry& e = entry(c, key);
  try {
    std::size_t used = 0;
    T v = parse(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw FormatError(c.source + ":" + std::to_string(e.line) + ": bad value '" + e.value + "' for key '" + key + "'");
  }
}

int get_int(const KeyValueConfig& c, const std::string& key) {
  return convert<int>(c, key, [](const std::string& s, std::size_t* u) { return std::stoi(s, u); });
}

double get_double(const KeyValueConfig& c, const std::string& key) {
  return convert<double>(c, key, [](const std::string& s, std::size_t* u) { return std::stod(s, u); });
}

std::uint64_t get_u64(const KeyValueConfig& c, const std::string& key) {
  return convert<std::uint64_t>(c, key, [](const std::string& s, std::size_t* u) { return std::stoull(s, u); });
}

}  // namespace

const std::vector<std::string> kConfigKeys{"job",      "template", "scale",   "n",        "methods",
                                           "grid",     "seeds",    "seed",    "noise_var", "holdout",
                                           "threads",  "out",      "max_iter", "obj_tol",  "feas_tol"};

bool KeyValueConfig::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(), [&](const ConfigEntry& e) { return e.key == key; });
}

const std::string& KeyValueConfig::get(const std::string& key) const { return entry(*this, key).value; }

KeyValueConfig parse_config(std::istream& in, const std::string& source) {
  KeyValueConfig c;
  c.source = source;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    const std::string where = source + ":" + std::to_string(line);
    if (eq == std::string::npos) throw FormatError(where + ": expected key = value");
    ConfigEntry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    if (e.key.empty()) throw FormatError(where + ": empty key");
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), e.key) == kConfigKeys.end()) {
      throw FormatError(where + ": unknown key '" + e.key + "'");
    }
    if (c.has(e.key)) throw FormatError(where + ": duplicate key '" + e.key + "'");
    c.entries.push_back(std::move(e));
  }
  return c;
}

KeyValueConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  return parse_config(in, path);
}

std::string format_config(const KeyValueConfig& c) {
  std::ostringstream o;
  for (const auto& e : c.entries) o << e.key << " = " << e.value << "\n";
  return o.str();
}

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> out;
  try {
    if (text.find(':') != std::string::npos) {
      const auto p = split(text, ':');
      if (p.size() != 3) throw std::invalid_argument("range");
      const int a = std::stoi(p[0]), b = std::stoi(p[1]), step = std::stoi(p[2]);
      if (step <= 0) throw std::invalid_argument("step");
      for (int m = a; m <= b; m += step) out.push_back(m);
    } else {
      for (const auto& item : split(text, ',')) out.push_back(std::stoi(item));
    }
  } catch (const std::exception&) {
    throw FormatError("bad grid '" + text + "': expected a,b,c or start:stop:step");
  }
  return out;
}

BenchConfig bench_config_from(const KeyValueConfig& c) {
  BenchConfig b;
  if (c.has("template")) b.template_name = c.get("template");
  if (b.template_name == "suppfig") b.methods = {"bp"};
  if (c.has("scale")) b.scale = get_double(c, "scale");
  if (c.has("n")) b.n = get_int(c, "n");
  if (c.has("methods")) b.methods = split(c.get("methods"), ',');
  b.grid = parse_grid(c.get("grid"));
  const std::uint64_t base = c.has("seed") ? get_u64(c, "seed") : 0;
  const int count = c.has("seeds") ? get_int(c, "seeds") : 1;
  for (int i = 0; i < count; ++i) b.seeds.push_back(base + static_cast<std::uint64_t>(i));
  if (c.has("noise_var")) b.noise_var = get_double(c, "noise_var");
  if (c.has("holdout")) b.holdout = get_int(c, "holdout");
  if (c.has("threads")) b.threads = get_int(c, "threads");
  if (c.has("max_iter")) b.solver.max_iter = get_int(c, "max_iter");
  if (c.has("obj_tol")) b.solver.obj_tol = get_double(c, "obj_tol");
  if (c.has("feas_tol")) b.solver.feas_tol = get_double(c, "feas_tol");
  b.validate();
  return b;
}

void set_config_value(KeyValueConfig& c, const std::string& key, const std::string& value) {
  if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
    throw ValidationError("unknown key '" + key + "'");
  }
  for (auto& e : c.entries) {
    if (e.key == key) {
      e.value = value;
      return;
    }
  }
  c.entries.push_back({key, value, 0});
}

int run_config(const std::string& path, std::ostream& log) { return run_config(load_config(path), log); }

int run_config(const KeyValueConfig& c, std::ostream& log) {
  const std::string& path = c.source;
  const std::string job = c.has("job") ? c.get("job") : "bench";
  if (job != "bench") throw ValidationError(path + ": unknown job '" + job + "'");
  const BenchConfig b = bench_config_from(c);
  const BenchResult r = b.template_name == "suppfig" ? bench_suppfig(b) : bench_figure1(b);
  if (c.has("out")) {
    const std::filesystem::path out(c.get("out"));
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream f(out);
    if (!f) throw IoError("cannot open " + out.string() + " for writing");
    write_bench_csv(f, r);
  } else {
    write_bench_csv(log, r);
  }
  return 0;
}

}  // namespace featadapt
