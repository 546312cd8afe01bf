#include "featadapt/expander.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "featadapt/config.hpp"
#include "featadapt/matrix_io.hpp"
#include "featadapt/parallel.hpp"

namespace featadapt {

Vector ExpanderInstance::apply_sigma(const Vector& v) const {
  if (v.size() != n) throw ValidationError("apply_sigma: dimension mismatch");
  return (1.0 + eps) * v - row_basis * (row_basis.transpose() * v);
}

double ExpanderInstance::sigma_norm(const Vector& v) const {
  return std::sqrt(std::max(0.0, v.dot(apply_sigma(v))));
}

SymMatrix ExpanderInstance::sigma(int max_dim) const {
  if (n > max_dim) {
    throw BudgetError("expander sigma: n = " + std::to_string(n) + " exceeds the dense limit " +
                      std::to_string(max_dim));
  }
  Matrix s = (1.0 + eps) * Matrix::Identity(n, n) - row_basis * row_basis.transpose();
  s = 0.5 * (s + s.transpose()).eval();
  return SymMatrix(std::move(s));
}

double ExpanderInstance::dist_to_row_space(const Vector& v) const {
  if (v.size() != n) throw ValidationError("dist_to_row_space: dimension mismatch");
  const Matrix g = row_gram + tolerances().ridge * Matrix::Identity(rows(), rows());
  const Vector z = g.ldlt().solve(M * v);
  return (v - M.transpose() * z).norm();
}

IndexSet ExpanderInstance::row_support(int j) const {
  IndexSet out;
  for (int i = 0; i < n; ++i) {
    if (M(j, i) != 0.0) out.push_back(i);
  }
  return out;
}

void finalize_expander(ExpanderInstance& inst) {
  inst.n = static_cast<int>(inst.M.cols());
  inst.row_gram = inst.M * inst.M.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(inst.row_gram);
  const Vector& lam = es.eigenvalues();
  int r = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) r += lam(i) > tolerances().kernel ? 1 : 0;
  inst.row_basis.resize(inst.n, r);
  int col = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) <= tolerances().kernel) continue;
    inst.row_basis.col(col++) = inst.M.transpose() * es.eigenvectors().col(i) / std::sqrt(lam(i));
  }
}

ExpanderInstance gen_expander_sigma(int n, int k, double eps, std::uint64_t seed) {
  if (n < 1) throw ValidationError("gen_expander_sigma: n must be positive");
  if (k < 1 || k > n) throw ValidationError("gen_expander_sigma: need 1 <= k <= n");
  if (!(eps >= 0)) throw ValidationError("gen_expander_sigma: eps must be nonnegative");
  ExpanderInstance inst;
  inst.n_requested = n;
  const int nn = (n + 99) / 100 * 100;
  inst.k = k;
  inst.eps = eps;
  inst.seed = seed;
  inst.M = Matrix::Zero(nn / 100, nn);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution ber(static_cast<double>(k) / nn);
  for (Eigen::Index j = 0; j < inst.M.rows(); ++j) {
    for (Eigen::Index i = 0; i < nn; ++i) inst.M(j, i) = ber(rng) ? 1.0 : 0.0;
  }
  finalize_expander(inst);
  return inst;
}

namespace {

struct BfsCounts {
  int ci = 0;
  int cii = 0;
};

// Vertices 0..n-1 are I, n..n+rows-1 are J.
BfsCounts tree_likeness(int root, int n, int max_r, const std::vector<IndexSet>& row_adj,
                        const std::vector<IndexSet>& col_adj) {
  const int rows = static_cast<int>(row_adj.size());
  std::vector<int> dist(n + rows, -1);
  std::vector<std::vector<int>> layers{{root}};
  dist[root] = 0;
  for (int r = 0; r < max_r + 2 && !layers.back().empty(); ++r) {
    std::vector<int> next;
    for (int u : layers.back()) {
      const IndexSet& nb = u < n ? col_adj[u] : row_adj[u - n];
      for (int w : nb) {
        const int id = u < n ? n + w : w;
        if (dist[id] < 0) {
          dist[id] = r + 1;
          next.push_back(id);
        }
      }
    }
    layers.push_back(std::move(next));
  }
  auto within = [&](int id, int r) { return dist[id] >= 0 && dist[id] <= r; };
  BfsCounts out;
  for (int r = 0; r <= max_r && r + 1 < static_cast<int>(layers.size()); r += 2) {
    if (layers[r + 1].empty()) break;
    for (int jid : layers[r + 1]) {
      int ci = 0;
      int cii = 0;
      for (int i : row_adj[jid - n]) {
        if (within(i, r)) {
          ++cii;
          continue;
        }
        int hits = 0;
        for (int j2 : col_adj[i]) hits += within(n + j2, r + 1) ? 1 : 0;
        ci += hits > 1 ? 1 : 0;
      }
      out.ci = std::max(out.ci, ci);
      out.cii = std::max(out.cii, cii);
    }
  }
  return out;
}

}  // namespace

ExpanderReport check_expander_properties(const ExpanderInstance& inst, const ExpanderCheckConfig& cfg) {
  if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw ValidationError("check_expander_properties: alpha must lie in (0,1)");
  const int n = inst.n;
  const int rows = inst.rows();
  const double k = inst.k;
  ExpanderReport rep;

  std::vector<IndexSet> row_adj(rows);
  std::vector<IndexSet> col_adj(n);
  for (int j = 0; j < rows; ++j) {
    row_adj[j] = inst.row_support(j);
    for (int i : row_adj[j]) col_adj[i].push_back(j);
  }

  const double lo_a = (1 - cfg.alpha) * k / 100.0;
  const double hi_a = (1 + cfg.alpha) * k / 100.0;
  rep.left_degree_min = rows;
  for (int i = 0; i < n; ++i) {
    const int deg = static_cast<int>(col_adj[i].size());
    rep.left_degree_min = std::min(rep.left_degree_min, deg);
    rep.left_degree_max = std::max(rep.left_degree_max, deg);
    rep.a_violations += (deg < lo_a || deg > hi_a) ? 1 : 0;
  }
  rep.a_pass = rep.a_violations == 0;

  rep.right_degree_min = n;
  for (int j = 0; j < rows; ++j) {
    const int deg = static_cast<int>(row_adj[j].size());
    rep.right_degree_min = std::min(rep.right_degree_min, deg);
    rep.right_degree_max = std::max(rep.right_degree_max, deg);
    rep.b_violations += (deg < (1 - cfg.alpha) * k || deg > (1 + cfg.alpha) * k) ? 1 : 0;
  }
  rep.b_pass = rep.b_violations == 0;

  const double ll = n > 2 ? std::log(std::log(static_cast<double>(n))) : 0.0;
  rep.max_radius = 2 * static_cast<int>(std::floor(std::max(0.0, 100.0 * ll) / 2.0));
  const int roots = std::min(n, std::max(1, cfg.max_roots));
  std::vector<BfsCounts> counts(roots);
  parallel_for(roots, cfg.threads, [&](std::size_t q) {
    const int root = static_cast<int>(static_cast<long long>(q) * n / roots);
    counts[q] = tree_likeness(root, n, rep.max_radius, row_adj, col_adj);
  });
  for (const auto& c : counts) {
    rep.ci_max = std::max(rep.ci_max, c.ci);
    rep.cii_max = std::max(rep.cii_max, c.cii);
  }
  rep.roots_checked = roots;
  rep.ci_pass = rep.ci_max <= 2;
  rep.cii_pass = rep.cii_max <= 2;

  Eigen::SelfAdjointEigenSolver<Matrix> es(inst.row_gram, Eigen::EigenvaluesOnly);
  rep.sigma_min_ratio = std::sqrt(std::max(0.0, es.eigenvalues()(0))) / std::sqrt(k);
  rep.sigma_max_ratio = std::sqrt(std::max(0.0, es.eigenvalues()(rows - 1))) / std::sqrt(k);
  rep.d_pass = rep.sigma_min_ratio >= cfg.ratio_lo && rep.sigma_max_ratio <= cfg.ratio_hi;
  return rep;
}

std::optional<SignedRow> majority_sign_row(const Matrix& M, const Vector& v, int k) {
  if (v.size() != M.cols()) throw ValidationError("majority_sign_row: dimension mismatch");
  const double half = k / 2.0;
  for (Eigen::Index j = 0; j < M.rows(); ++j) {
    int pos = 0;
    int neg = 0;
    for (Eigen::Index i = 0; i < M.cols(); ++i) {
      if (M(j, i) == 0.0) continue;
      pos += v(i) > 0 ? 1 : 0;
      neg += v(i) < 0 ? 1 : 0;
    }
    if (pos > half) return SignedRow{static_cast<int>(j), 1};
    if (neg > half) return SignedRow{static_cast<int>(j), -1};
  }
  return std::nullopt;
}

GreedyResult greedy_integer_representation(const ExpanderInstance& inst, const Vector& v, const GreedyConfig& cfg) {
  const int n = inst.n;
  if (v.size() != n) throw ValidationError("greedy_integer_representation: dimension mismatch");
  if (!v.allFinite()) throw ValidationError("greedy_integer_representation: non-finite entry");
  if (!cfg.allow_real) {
    for (int i = 0; i < n; ++i) {
      if (v(i) != std::round(v(i))) throw ValidationError("greedy_integer_representation: v must be integer-valued");
    }
  }
  if (v.lpNorm<1>() > cfg.max_l1) throw ValidationError("greedy_integer_representation: ||v||_1 exceeds R");

  std::vector<IndexSet> support(inst.rows());
  for (int j = 0; j < inst.rows(); ++j) support[j] = inst.row_support(j);
  const double half = inst.k / 2.0;
  // Integer steps must shed a full unit; real steps only need to shed something.
  const double required = cfg.allow_real ? 0.0 : 1.0;

  GreedyResult res;
  res.beta = Vector::Zero(inst.rows());
  res.residual = v;
  for (;;) {
    const double l1 = res.residual.lpNorm<1>();
    res.l1_trace.push_back(l1);
    if (res.residual.isZero(0.0) || (cfg.allow_real && res.residual.lpNorm<Eigen::Infinity>() <= 1e-12)) {
      res.status = GreedyStatus::Zero;
      return res;
    }
    if (inst.dist_to_row_space(res.residual) >= 1.0 / 3.0) {
      res.status = GreedyStatus::StandardBasisBranch;
      return res;
    }
    if (res.steps >= cfg.max_steps) {
      throw BudgetError("greedy_integer_representation: exceeded " + std::to_string(cfg.max_steps) + " steps");
    }
    bool majority_seen = false;
    int pick = -1;
    int sign = 0;
    for (int j = 0; j < inst.rows() && pick < 0; ++j) {
      int pos = 0;
      int neg = 0;
      for (int i : support[j]) {
        pos += res.residual(i) > 0 ? 1 : 0;
        neg += res.residual(i) < 0 ? 1 : 0;
      }
      for (int s : {1, -1}) {
        if ((s > 0 ? pos : neg) <= half) continue;
        majority_seen = true;
        double change = 0.0;
        for (int i : support[j]) change += std::abs(res.residual(i) - s) - std::abs(res.residual(i));
        if (change <= -required && change < 0) {
          pick = j;
          sign = s;
          break;
        }
      }
    }
    if (pick < 0) {
      if (majority_seen) {
        throw NumericalError("greedy_integer_representation: no majority row decreases the l1 norm at step " +
                             std::to_string(res.steps));
      }
      throw SignAgreementCounterexample(
          "greedy_integer_representation: no majority-sign row while dist(v, span M) < 1/3 at step " +
              std::to_string(res.steps),
          res.residual, res.steps);
    }
    for (int i : support[pick]) res.residual(i) -= sign;
    res.beta(pick) += sign;
    ++res.steps;
    const double after = res.residual.lpNorm<1>();
    if (!(after <= l1 - required) || !(after < l1)) {
      throw NumericalError("greedy_integer_representation: l1 norm failed to decrease");
    }
  }
}

void save_expander(const std::string& dir, const ExpanderInstance& inst) {
  std::filesystem::create_directories(dir);
  write_spm1(dir + "/M.spm1", inst.M);
  std::ofstream meta(dir + "/meta.txt");
  if (!meta) throw IoError("cannot write " + dir + "/meta.txt");
  meta.precision(17);
  meta << "n=" << inst.n << "\nn_requested=" << inst.n_requested << "\nk=" << inst.k << "\neps=" << inst.eps
       << "\nseed=" << inst.seed << "\n";
}

ExpanderInstance load_expander(const std::string& dir) {
  std::ifstream meta(dir + "/meta.txt");
  if (!meta) throw IoError("cannot open " + dir + "/meta.txt");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(meta, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(dir + "/meta.txt:" + std::to_string(lineno) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"n", "n_requested", "k", "eps", "seed"}) {
    if (!kv.count(key)) throw FormatError(dir + "/meta.txt: missing key " + std::string(key));
  }
  ExpanderInstance inst;
  inst.M = read_spm1(dir + "/M.spm1");
  inst.n_requested = std::stoi(kv["n_requested"]);
  inst.k = std::stoi(kv["k"]);
  inst.eps = std::stod(kv["eps"]);
  inst.seed = std::stoull(kv["seed"]);
  finalize_expander(inst);
  if (inst.n != std::stoi(kv["n"])) throw FormatError(dir + ": M has " + std::to_string(inst.n) + " columns, meta says " + kv["n"]);
  for (Eigen::Index j = 0; j < inst.M.rows(); ++j) {
    for (Eigen::Index i = 0; i < inst.M.cols(); ++i) {
      if (inst.M(j, i) != 0.0 && inst.M(j, i) != 1.0) throw FormatError(dir + ": M must be binary");
    }
  }
  return inst;
}

}  // namespace featadapt
