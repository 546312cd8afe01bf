#include "featadapt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "featadapt/errors.hpp"
#include "featadapt/parallel.hpp"
#include "featadapt/peeling.hpp"

#ifndef FEATADAPT_VERSION
#define FEATADAPT_VERSION "0.0.0"
#endif

namespace featadapt {
namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct Stats {
  double mean = 0, std = 0, median = 0;
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return {std::nan(""), std::nan(""), std::nan("")};
  for (double x : v) s.mean += x;
  s.mean /= v.size();
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(s.std / (v.size() - 1)) : 0.0;
  s.median = median_of(v);
  return s;
}

}  // namespace

const char* const kBenchCsvHeader =
    "method,m,seed,holdout_error,excess_risk,rel_excess_risk,converged,status,version,config_hash";

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string library_version() { return FEATADAPT_VERSION; }

void BenchConfig::validate() const {
  if (template_name != "figure1" && template_name != "suppfig") {
    throw ValidationError("bench: unknown template '" + template_name + "'");
  }
  if (grid.empty()) throw ValidationError("bench: empty sample-size grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1) throw ValidationError("bench: grid entries must be positive");
    if (i > 0 && grid[i] <= grid[i - 1]) throw ValidationError("bench: grid must be strictly increasing");
  }
  if (seeds.empty()) throw ValidationError("bench: need at least one seed");
  if (methods.empty()) throw ValidationError("bench: need at least one method");
  for (const auto& m : methods) {
    if (m != "bp" && m != "adapted-bp") throw ValidationError("bench: unknown method '" + m + "'");
  }
  if (!(noise_var >= 0)) throw ValidationError("bench: noise_var must be nonnegative");
  if (holdout < 1) throw ValidationError("bench: holdout must be positive");
  if (!(scale > 0)) throw ValidationError("bench: scale must be positive");
  solver.validate();
}

std::string BenchConfig::canonical() const {
  std::ostringstream o;
  o << "template=" << template_name << "\nscale=" << fmt(scale) << "\nn=" << n << "\nmethods=";
  for (std::size_t i = 0; i < methods.size(); ++i) o << (i ? "," : "") << methods[i];
  o << "\ngrid=";
  for (std::size_t i = 0; i < grid.size(); ++i) o << (i ? "," : "") << grid[i];
  o << "\nseeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) o << (i ? "," : "") << seeds[i];
  o << "\nnoise_var=" << fmt(noise_var) << "\nholdout=" << holdout << "\nmax_iter=" << solver.max_iter
    << "\nobj_tol=" << fmt(solver.obj_tol) << "\nfeas_tol=" << fmt(solver.feas_tol) << "\n";
  return o.str();
}

std::string BenchConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

double BenchResult::median(const std::string& method, int m, bool holdout) const {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.method == method && r.m == m && r.status == "ok") v.push_back(holdout ? r.holdout_error : r.excess_risk);
  }
  return median_of(std::move(v));
}

BenchResult run_bench(const PlantedInstance& inst, const BenchConfig& cfg) {
  cfg.validate();
  const EigenDecomp e = eig(inst.sigma);
  const Matrix root = psd_sqrt(e);
  IndexSet exempt;
  if (std::find(cfg.methods.begin(), cfg.methods.end(), "adapted-bp") != cfg.methods.end()) {
    exempt = iterative_peeling(e, inst.d_l, inst.t).S;
  }

  BenchResult res;
  res.version = library_version();
  res.config_hash = cfg.hash();
  res.v_star_norm_sq = sigma_norm_sq(inst.sigma, inst.v_star);

  const std::size_t nm = cfg.grid.size();
  const std::size_t nmeth = cfg.methods.size();
  std::vector<BenchRow> table(cfg.seeds.size() * nm * nmeth);
  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    const std::uint64_t seed = cfg.seeds[si];
    const SampleSet test = sample_gaussian(root, cfg.holdout, cfg.noise_var, inst.v_star, mix_seed(seed, 0x686f6c64ULL));
    parallel_for(nm, cfg.threads, [&](std::size_t gi) {
      const int m = cfg.grid[gi];
      const SampleSet train = sample_gaussian(root, m, cfg.noise_var, inst.v_star, mix_seed(seed, m));
      for (std::size_t k = 0; k < nmeth; ++k) {
        BenchRow row;
        row.method = cfg.methods[k];
        row.m = m;
        row.seed = std::to_string(seed);
        try {
          const IndexSet& ex = row.method == "adapted-bp" ? exempt : IndexSet{};
          FitReport fit = basis_pursuit(train.X, train.y, ex, cfg.solver);
          attach_excess_risk(fit, inst.sigma, inst.v_star);
          row.excess_risk = *fit.excess_risk;
          row.rel_excess_risk = res.v_star_norm_sq > 0 ? row.excess_risk / res.v_star_norm_sq : std::nan("");
          row.holdout_error = (test.X * fit.v_hat - test.y).squaredNorm() / test.m();
          row.converged = fit.converged ? 1.0 : 0.0;
        } catch (const std::exception& ex) {
          row.holdout_error = row.excess_risk = row.rel_excess_risk = std::nan("");
          row.status = std::string("failed: ") + ex.what();
        }
        table[(si * nm + gi) * nmeth + k] = std::move(row);
      }
    });
  }
  // Rows in (m, seed, method) order.
  for (std::size_t gi = 0; gi < nm; ++gi) {
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      for (std::size_t k = 0; k < nmeth; ++k) res.rows.push_back(table[(si * nm + gi) * nmeth + k]);
    }
  }
  for (int m : cfg.grid) {
    for (const auto& method : cfg.methods) {
      std::vector<double> hold, ex, rel;
      double conv = 0;
      int total = 0;
      for (const auto& r : res.rows) {
        if (r.m != m || r.method != method) continue;
        ++total;
        conv += r.converged;
        if (r.status != "ok") continue;
        hold.push_back(r.holdout_error);
        ex.push_back(r.excess_risk);
        rel.push_back(r.rel_excess_risk);
      }
      const Stats h = stats_of(hold), x = stats_of(ex), q = stats_of(rel);
      const double cf = total ? conv / total : 0.0;
      const std::string st = hold.size() == static_cast<std::size_t>(total) ? "ok" : "partial";
      res.summary.push_back({method, m, "mean", h.mean, x.mean, q.mean, cf, st});
      res.summary.push_back({method, m, "std", h.std, x.std, q.std, cf, st});
      res.summary.push_back({method, m, "median", h.median, x.median, q.median, cf, st});
    }
  }
  return res;
}

BenchResult bench_figure1(const BenchConfig& cfg) {
  if (cfg.template_name != "figure1") throw ValidationError("bench_figure1: template must be figure1");
  return run_bench(gen_figure1_instance(cfg.scale), cfg);
}

BenchResult bench_suppfig(const BenchConfig& cfg) {
  if (cfg.template_name != "suppfig") throw ValidationError("bench_suppfig: template must be suppfig");
  return run_bench(gen_suppfig_instance(cfg.n), cfg);
}

void write_bench_csv(std::ostream& out, const BenchResult& r) {
  out << kBenchCsvHeader << "\n";
  auto emit = [&](const BenchRow& row) {
    std::string status = row.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << row.method << "," << row.m << "," << row.seed << "," << fmt(row.holdout_error) << ","
        << fmt(row.excess_risk) << "," << fmt(row.rel_excess_risk) << "," << fmt(row.converged) << "," << status
        << "," << r.version << "," << r.config_hash << "\n";
  };
  for (const auto& row : r.rows) emit(row);
  for (const auto& row : r.summary) emit(row);
}

}  // namespace featadapt
