#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "featadapt/solvers.hpp"
#include "featadapt/synth.hpp"

namespace featadapt {

struct BenchConfig {
  std::string template_name = "figure1";  // figure1 | suppfig
  double scale = 1.0;                     // figure1 only
  int n = 1000;                           // suppfig only
  std::vector<std::string> methods{"bp", "adapted-bp"};
  std::vector<int> grid;                  // sample sizes, strictly increasing
  std::vector<std::uint64_t> seeds;
  double noise_var = 0.0;
  int holdout = 10000;
  int threads = 1;
  SolverConfig solver;

  void validate() const;
  // Canonical key=value text; the config hash is FNV-1a 64 of this string.
  std::string canonical() const;
  std::string hash() const;
};

struct BenchRow {
  std::string method;
  int m = 0;
  std::string seed;           // seed, or mean | std | median on summary rows
  double holdout_error = 0.0; // mean squared prediction error on fresh samples
  double excess_risk = 0.0;   // ||v_hat - v*||_Sigma^2
  double rel_excess_risk = 0.0;
  double converged = 0.0;     // 0/1 per run, fraction on summary rows
  std::string status = "ok";  // ok, or the solver failure message
};

struct BenchResult {
  std::vector<BenchRow> rows;     // (m, seed, method) order
  std::vector<BenchRow> summary;  // (m, method, statistic) order
  std::string version;
  std::string config_hash;
  double v_star_norm_sq = 0.0;

  // Median of a column over the runs of one method at one m.
  double median(const std::string& method, int m, bool holdout = false) const;
};

// BP and adapted BP on the triplet template; S comes from peeling with the
// planted d_l and t.
BenchResult bench_figure1(const BenchConfig& cfg);
// BP on the single-triplet instance.
BenchResult bench_suppfig(const BenchConfig& cfg);
BenchResult run_bench(const PlantedInstance& inst, const BenchConfig& cfg);

extern const char* const kBenchCsvHeader;
void write_bench_csv(std::ostream& out, const BenchResult& r);

std::uint64_t fnv1a64(const std::string& s);
std::string library_version();

}  // namespace featadapt
