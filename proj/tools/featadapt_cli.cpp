#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "featadapt/arbitrary_rep.hpp"
#include "featadapt/bench.hpp"
#include "featadapt/boosting.hpp"
#include "featadapt/dictionary.hpp"
#include "featadapt/errors.hpp"
#include "featadapt/expander.hpp"
#include "featadapt/matrix_io.hpp"
#include "featadapt/peeling.hpp"
#include "featadapt/run_config.hpp"
#include "featadapt/solvers.hpp"
#include "featadapt/synth.hpp"

namespace fa = featadapt;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join(const fa::IndexSet& s, const char* sep = " ") {
  std::ostringstream o;
  for (std::size_t i = 0; i < s.size(); ++i) o << (i ? sep : "") << s[i];
  return o.str();
}

// Writes to --out when given, stdout otherwise.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  const std::filesystem::path p(g.out);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw fa::IoError("cannot open " + g.out + " for writing");
  f << text;
}

fa::SymMatrix load_sigma(const std::string& path) { return fa::SymMatrix(fa::read_spm1(path)); }

fa::IndexSet read_index_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fa::IoError("cannot open " + path);
  fa::IndexSet out;
  std::string tok;
  while (in >> tok) {
    std::stringstream ss(tok);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(std::stoi(item));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const char* const kFitHeader = "record,round,method,seed,objective,iterations,converged,excess_risk,notes\n";

std::string fit_row(const fa::FitReport& r, const std::string& record, int round) {
  std::ostringstream o;
  std::string notes;
  for (std::size_t i = 0; i < r.notes.size(); ++i) notes += (i ? "; " : "") + r.notes[i];
  std::replace(notes.begin(), notes.end(), ',', ';');
  o << record << "," << round << "," << r.method << "," << r.seed << "," << num(r.objective) << "," << r.iterations
    << "," << (r.converged ? 1 : 0) << "," << (r.excess_risk ? num(*r.excess_risk) : "") << "," << notes << "\n";
  return o.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature adaptation for sparse linear regression"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file or directory");

  // peel
  auto* peel = app.add_subcommand("peel", "Iterative peeling of small-eigenvalue coordinates");
  std::string peel_sigma;
  int peel_d = 0, peel_t = 1;
  peel->add_option("--sigma", peel_sigma, "Covariance (SPM1)")->required();
  peel->add_option("--d", peel_d, "Number of small eigenvalues")->required();
  peel->add_option("--t", peel_t, "Sparsity")->required();
  peel->callback([&] {
    const fa::PeelResult r = fa::iterative_peeling(load_sigma(peel_sigma), peel_d, peel_t);
    std::ostringstream o;
    o << "field,value\nd," << r.d << "\nt," << r.t << "\nlambda_d1," << num(r.lambda_d1) << "\nvacuous,"
      << (r.vacuous ? 1 : 0) << "\nsize_bound," << num(r.size_bound()) << "\nS," << join(r.S) << "\nS_size,"
      << r.S.size() << "\n";
    for (std::size_t j = 0; j < r.chain.size(); ++j) {
      o << "K_" << (r.t - static_cast<int>(j)) << "_size," << r.chain[j].size() << "\n";
    }
    emit(g, o.str());
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a sparse regression estimator");
  std::string method, fit_sigma, fit_samples, fit_exempt, fit_vstar, fit_vhat;
  double radius = 0, delta = 0.1, B = 1.0, noise_var = 0.0;
  int t = 1, dl = 0, dh = 0, L = 1, max_iter = 50000;
  fit->add_option("--method", method, "Estimator")
      ->required()
      ->check(CLI::IsMember({"bp", "adapted-bp", "arlasso", "classo", "md", "boar", "augdict", "slr"}));
  fit->add_option("--samples", fit_samples, "Samples (SPM1, last column y)")->required();
  fit->add_option("--sigma", fit_sigma, "Covariance (SPM1)");
  fit->add_option("--exempt", fit_exempt, "Exempt coordinates, whitespace or comma separated");
  fit->add_option("--vstar", fit_vstar, "Ground truth for excess risk (SPM1)");
  fit->add_option("--vhat", fit_vhat, "Write the estimate here (SPM1)");
  fit->add_option("--radius", radius, "l1 radius for classo and md");
  fit->add_option("--delta", delta, "Failure probability");
  fit->add_option("--t", t, "Sparsity");
  fit->add_option("--dl", dl, "Small outlier eigenvalues");
  fit->add_option("--dh", dh, "Large outlier eigenvalues");
  fit->add_option("--L", L, "Boosting rounds");
  fit->add_option("--B", B, "Scale of ||w*||_Sigma for slr");
  fit->add_option("--noise-var", noise_var, "Noise variance");
  fit->add_option("--max-iter", max_iter, "Solver iteration cap");
  fit->callback([&] {
    fa::SampleSet s = fa::read_samples(fit_samples);
    s.seed = g.seed;
    fa::SolverConfig cfg;
    cfg.max_iter = max_iter;
    const bool needs_sigma = method == "arlasso" || method == "boar" || method == "augdict";
    if (needs_sigma && fit_sigma.empty()) throw fa::ValidationError("--method " + method + " needs --sigma");
    std::optional<fa::SymMatrix> sigma;
    if (!fit_sigma.empty()) sigma = load_sigma(fit_sigma);
    std::optional<fa::Vector> vstar;
    if (!fit_vstar.empty()) vstar = fa::read_vector(fit_vstar);
    const fa::IndexSet exempt = fit_exempt.empty() ? fa::IndexSet{} : read_index_file(fit_exempt);

    std::string text = kFitHeader;
    fa::FitReport rep;
    if (method == "bp" || method == "adapted-bp") {
      rep = fa::basis_pursuit(s.X, s.y, method == "bp" ? fa::IndexSet{} : exempt, cfg);
    } else if (method == "arlasso") {
      fa::ArLassoParams p;
      p.lambda_high = std::max(0.0, fa::eig(*sigma).lambda(sigma->dim() - dh));
      p.delta = delta;
      rep = fa::adaptively_regularized_lasso(s.X, s.y, exempt, p, cfg);
    } else if (method == "classo") {
      rep = fa::constrained_lasso(s.X, s.y, radius, cfg);
    } else if (method == "md") {
      rep = fa::mirror_descent_lasso(s.X, s.y, radius, s.m(), noise_var, cfg);
    } else if (method == "boar") {
      fa::BoarConfig bc;
      bc.t = t;
      bc.d_l = dl;
      bc.d_h = dh;
      bc.L = L;
      bc.delta = delta;
      bc.solver = cfg;
      const fa::BoostState st = fa::boar_fit(*sigma, s, bc, vstar);
      for (const auto& r : st.rounds) {
        fa::FitReport rr = r.fit;
        if (r.residual) rr.excess_risk = *r.residual;
        rr.notes.push_back("|S| = " + std::to_string(r.S.size()));
        text += fit_row(rr, "round", r.round);
      }
      rep = st.report;
    } else if (method == "augdict") {
      fa::AugDictConfig ac;
      ac.t = t;
      ac.d_l = dl;
      ac.d_h = dh;
      ac.delta = delta;
      ac.threads = g.threads;
      ac.solver = cfg;
      rep = fa::augmented_dictionary_lasso(*sigma, s, ac).report;
    } else {
      fa::SlrConfig sc;
      sc.t = t;
      sc.B = B;
      sc.noise_var = noise_var;
      sc.threads = g.threads;
      sc.solver = cfg;
      rep = fa::slr_arbitrary(s, sc).report;
    }
    rep.seed = g.seed;
    if (vstar && sigma) fa::attach_excess_risk(rep, *sigma, *vstar);
    text += fit_row(rep, "fit", -1);
    if (!fit_vhat.empty()) fa::write_vector(fit_vhat, rep.v_hat);
    emit(g, text);
  });

  // dict
  auto* dict = app.add_subcommand("dict", "Build, verify or price dictionaries");
  std::string build, dict_sigma, dict_path, dict_samples, dict_v;
  bool verify = false, cost = false;
  int dict_d = 0, dict_t = 1, trials = 1000;
  double alpha = 0.1;
  dict->add_option("--build", build, "Construction")->check(CLI::IsMember({"smalleig", "brute", "packing", "arbitrary"}));
  dict->add_flag("--verify", verify, "Sampled (t, alpha)-dictionary check");
  dict->add_flag("--cost", cost, "Representation cost of --v");
  dict->add_option("--dict", dict_path, "Dictionary path for --verify and --cost");
  dict->add_option("--sigma", dict_sigma, "Covariance (SPM1)");
  dict->add_option("--samples", dict_samples, "Samples for --build arbitrary");
  dict->add_option("--v", dict_v, "Vector for --cost (SPM1)");
  dict->add_option("--d", dict_d, "Small eigenvalues for smalleig");
  dict->add_option("--t", dict_t, "Sparsity");
  dict->add_option("--alpha", alpha, "Correlation threshold");
  dict->add_option("--trials", trials, "Random sparse vectors for --verify");
  dict->callback([&] {
    if (static_cast<int>(!build.empty()) + verify + cost != 1) {
      throw fa::ValidationError("dict: give exactly one of --build, --verify, --cost");
    }
    if (!build.empty()) {
      if (g.out.empty()) throw fa::ValidationError("dict --build needs --out");
      fa::Dictionary d;
      if (build == "arbitrary") {
        if (dict_samples.empty()) throw fa::ValidationError("dict --build arbitrary needs --samples");
        fa::L1RepConfig lc;
        lc.t = dict_t;
        lc.threads = g.threads;
        d = fa::compute_l1_representation(fa::read_samples(dict_samples).X, lc);
      } else {
        if (dict_sigma.empty()) throw fa::ValidationError("dict --build " + build + " needs --sigma");
        const fa::SymMatrix sigma = load_sigma(dict_sigma);
        if (build == "smalleig") {
          d = fa::build_small_eig_l1rep(sigma, dict_d, dict_t);
        } else if (build == "brute") {
          d = fa::brute_force_dictionary(sigma, dict_t);
        } else {
          d = fa::greedy_packing(sigma, dict_t, alpha, fa::signed_support_pool(sigma.dim(), dict_t));
        }
      }
      fa::save_dictionary(g.out, d);
      std::cout << "atoms," << d.size() << "\nprovenance," << fa::to_string(d.provenance) << "\n";
      return;
    }
    if (dict_path.empty()) throw fa::ValidationError("dict: --verify and --cost need --dict");
    const fa::Dictionary d = fa::load_dictionary(dict_path);
    if (verify) {
      if (dict_sigma.empty()) throw fa::ValidationError("dict --verify needs --sigma");
      const fa::VerifyReport r = fa::verify_dictionary(d, load_sigma(dict_sigma), dict_t, alpha, trials, g.seed, g.threads);
      emit(g, "field,value\nmin_correlation," + num(r.min_correlation) + "\nvectors_checked," +
                  std::to_string(r.vectors_checked) + "\nexhaustive_sweep," + std::to_string(r.exhaustive_sweep) +
                  "\npass," + std::to_string(r.pass) + "\n");
      if (!r.pass) throw fa::NumericalError("dictionary failed the correlation check");
      return;
    }
    if (dict_v.empty()) throw fa::ValidationError("dict --cost needs --v");
    const fa::CostResult c = fa::representation_cost(d, fa::read_vector(dict_v));
    emit(g, "field,value\ncost," + num(c.cost) + "\nconverged," + std::to_string(c.converged) + "\n");
  });

  // expander
  auto* exp = app.add_subcommand("expander", "Expander covariance instances");
  std::vector<std::string> gen_args;
  std::string check_dir, peel_dir, exp_v;
  double exp_alpha = 0.3;
  bool allow_real = false;
  exp->add_option("--gen", gen_args, "n k eps seed")->expected(4);
  exp->add_option("--check", check_dir, "Instance directory to check");
  exp->add_option("--peel", peel_dir, "Instance directory for greedy peeling");
  exp->add_option("--v", exp_v, "Integer vector (SPM1) for --peel");
  exp->add_option("--alpha", exp_alpha, "Degree tolerance");
  exp->add_flag("--allow-real", allow_real, "Experimental: accept non-integer v");
  exp->callback([&] {
    if (static_cast<int>(!gen_args.empty()) + !check_dir.empty() + !peel_dir.empty() != 1) {
      throw fa::ValidationError("expander: give exactly one of --gen, --check, --peel");
    }
    if (!gen_args.empty()) {
      if (g.out.empty()) throw fa::ValidationError("expander --gen needs --out");
      const fa::ExpanderInstance inst = fa::gen_expander_sigma(std::stoi(gen_args[0]), std::stoi(gen_args[1]),
                                                               std::stod(gen_args[2]), std::stoull(gen_args[3]));
      fa::save_expander(g.out, inst);
      std::cout << "n," << inst.n << "\nrows," << inst.rows() << "\nrank," << inst.rank() << "\n";
      return;
    }
    if (!check_dir.empty()) {
      fa::ExpanderCheckConfig cc;
      cc.alpha = exp_alpha;
      cc.threads = g.threads;
      const fa::ExpanderReport r = fa::check_expander_properties(fa::load_expander(check_dir), cc);
      std::ostringstream o;
      o << "property,pass,statistic\n"
        << "a," << r.a_pass << ",left degree " << r.left_degree_min << ".." << r.left_degree_max << " ("
        << r.a_violations << " violations)\n"
        << "b," << r.b_pass << ",right degree " << r.right_degree_min << ".." << r.right_degree_max << " ("
        << r.b_violations << " violations)\n"
        << "c-i," << r.ci_pass << ",max count " << r.ci_max << " over " << r.roots_checked << " roots\n"
        << "c-ii," << r.cii_pass << ",max count " << r.cii_max << " over " << r.roots_checked << " roots\n"
        << "d," << r.d_pass << ",sigma ratios " << num(r.sigma_min_ratio) << " " << num(r.sigma_max_ratio) << "\n";
      emit(g, o.str());
      return;
    }
    if (exp_v.empty()) throw fa::ValidationError("expander --peel needs --v");
    const fa::ExpanderInstance inst = fa::load_expander(peel_dir);
    fa::GreedyConfig gc;
    gc.allow_real = allow_real;
    try {
      const fa::GreedyResult r = fa::greedy_integer_representation(inst, fa::read_vector(exp_v), gc);
      std::ostringstream o;
      o << "row,beta\n";
      for (Eigen::Index j = 0; j < r.beta.size(); ++j) {
        if (r.beta(j) != 0) o << j << "," << num(r.beta(j)) << "\n";
      }
      std::cerr << "status," << (r.status == fa::GreedyStatus::Zero ? "zero" : "standard-basis-branch")
                << "\nsteps," << r.steps << "\nresidual_l1," << num(r.residual.lpNorm<1>()) << "\n";
      emit(g, o.str());
    } catch (const fa::SignAgreementCounterexample& e) {
      const std::string path = (g.out.empty() ? std::string("counterexample") : g.out) + ".residual.spm1";
      fa::write_vector(path, e.residual());
      std::cerr << "counterexample residual written to " << path << "\n";
      throw;
    }
  });

  // synth
  auto* syn = app.add_subcommand("synth", "Generate planted instances");
  std::string tmpl = "figure1";
  double scale = 1.0, syn_noise = 0.0;
  int syn_n = 1000, syn_d = 2, syn_t = 3, max_support = 3, syn_m = 0;
  syn->add_option("--template", tmpl, "Instance family")->check(CLI::IsMember({"figure1", "suppfig", "planted"}));
  syn->add_option("--scale", scale, "figure1 size factor");
  syn->add_option("--n", syn_n, "Dimension for suppfig and planted");
  syn->add_option("--d", syn_d, "Dependencies for planted");
  syn->add_option("--t", syn_t, "Sparsity of v* for planted");
  syn->add_option("--max-support", max_support, "Largest dependency support for planted");
  syn->add_option("--m", syn_m, "Also draw this many samples");
  syn->add_option("--noise-var", syn_noise, "Noise variance for the samples");
  syn->callback([&] {
    if (g.out.empty()) throw fa::ValidationError("synth needs --out DIR");
    fa::PlantedInstance inst = tmpl == "figure1"   ? fa::gen_figure1_instance(scale)
                               : tmpl == "suppfig" ? fa::gen_suppfig_instance(syn_n)
                                                   : fa::gen_random_planted(syn_n, syn_d, max_support, syn_t, g.seed);
    std::filesystem::create_directories(g.out);
    fa::write_spm1(g.out + "/sigma.spm1", inst.sigma.matrix());
    fa::write_vector(g.out + "/vstar.spm1", inst.v_star);
    std::ofstream man(g.out + "/manifest.csv");
    if (!man) throw fa::IoError("cannot write " + g.out + "/manifest.csv");
    man << "field,value\ntemplate," << tmpl << "\nn," << inst.sigma.dim() << "\nt," << inst.t << "\nd_l," << inst.d_l
        << "\nseed," << g.seed << "\nvstar_sigma_norm_sq," << num(fa::sigma_norm_sq(inst.sigma, inst.v_star))
        << "\ndescription," << inst.description << "\n";
    if (syn_m > 0) {
      man << "m," << syn_m << "\nnoise_var," << num(syn_noise) << "\n";
      fa::write_samples(g.out + "/samples.spm1", fa::sample_gaussian(inst.sigma, syn_m, syn_noise, inst.v_star, g.seed));
    }
  });

  // bench
  auto* bench = app.add_subcommand("bench", "BP versus adapted BP sample-size sweeps");
  fa::BenchConfig bc;
  std::string grid = "40:220:10";
  std::string methods;
  int seeds = 10;
  bench->add_option("--template", bc.template_name, "figure1 or suppfig")->check(CLI::IsMember({"figure1", "suppfig"}));
  bench->add_option("--scale", bc.scale, "figure1 size factor");
  bench->add_option("--n", bc.n, "suppfig dimension");
  bench->add_option("--methods", methods, "Comma-separated: bp, adapted-bp");
  bench->add_option("--grid", grid, "a,b,c or start:stop:step");
  bench->add_option("--seeds", seeds, "Number of seeds (seed, seed+1, ...)");
  bench->add_option("--noise-var", bc.noise_var, "Noise variance");
  bench->add_option("--holdout", bc.holdout, "Holdout samples");
  bench->callback([&] {
    fa::KeyValueConfig kv;
    kv.source = "bench";
    fa::set_config_value(kv, "template", bc.template_name);
    fa::set_config_value(kv, "scale", num(bc.scale));
    fa::set_config_value(kv, "n", std::to_string(bc.n));
    if (!methods.empty()) fa::set_config_value(kv, "methods", methods);
    fa::set_config_value(kv, "grid", grid);
    fa::set_config_value(kv, "seeds", std::to_string(seeds));
    fa::set_config_value(kv, "seed", std::to_string(g.seed));
    fa::set_config_value(kv, "noise_var", num(bc.noise_var));
    fa::set_config_value(kv, "holdout", std::to_string(bc.holdout));
    fa::set_config_value(kv, "threads", std::to_string(g.threads));
    if (!g.out.empty()) fa::set_config_value(kv, "out", g.out);
    fa::run_config(kv, std::cout);
  });

  // run
  auto* run = app.add_subcommand("run", "Execute a key = value job file");
  std::string config_path;
  run->add_option("config", config_path, "Job file")->required();
  run->callback([&] {
    fa::KeyValueConfig kv = fa::load_config(config_path);
    if (app.count("--threads")) fa::set_config_value(kv, "threads", std::to_string(g.threads));
    if (app.count("--seed")) fa::set_config_value(kv, "seed", std::to_string(g.seed));
    if (!g.out.empty()) fa::set_config_value(kv, "out", g.out);
    fa::run_config(kv, std::cout);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
