#include "phdf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "phdf/acceptance.hpp"
#include "phdf/error.hpp"
#include "phdf/estimate.hpp"
#include "phdf/rates.hpp"

namespace phdf {

namespace fs = std::filesystem;
using io::fmt;
using io::Json;

namespace {

struct Common {
  fs::path out;
  ProcessSpec spec;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  EstimateOptions opts;
};

Common common(const RunConfig& cfg, bool needs_process = true) {
  Common c;
  c.out = cfg.text("run.out");
  if (needs_process) c.spec = parse_process(cfg.text("run.process"));
  c.gamma = cfg.real("run.gamma");
  c.seed = cfg.count("run.seed");
  c.replicas = cfg.count("run.replicas");
  c.opts.exact = cfg.flag("run.exact");
  c.opts.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, cfg.count("run.workers")));
  return c;
}

Json header(std::string_view name, const RunConfig& cfg) {
  Json doc;
  doc["command"] = std::string(name);
  // worker count and output path do not affect results and stay out of the echo
  Json config = cfg.to_json();
  config["run"].erase("workers");
  config["run"].erase("out");
  doc["config"] = config;
  return doc;
}

// Simulated (or exact) maximum laws at the requested n on verification grids
// built from the candidate phantom.
MaxLawEstimate maxima_for_verification(const Common& c, const DistFn& g, const std::vector<std::uint64_t>& ns) {
  MaxLawEstimate est;
  est.spec = c.spec.describe();
  if (c.opts.exact && has_exact_max_law(c.spec)) {
    est.exact = true;
    for (auto n : ns) {
      MaxLawTable t;
      t.n = n;
      t.levels = verification_grid(g, n, {});
      for (double x : t.levels) {
        t.p_hat.push_back(exact_max_cdf(c.spec, n, x));
        t.se.push_back(0.0);
      }
      est.tables.push_back(std::move(t));
    }
    return est;
  }
  require(c.replicas >= kMinReplicas, ErrorKind::invalid_argument,
          "at least " + std::to_string(kMinReplicas) + " replicas are required");
  std::vector<std::uint64_t> sorted = ns;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const auto maxima = simulate_running_maxima(c.spec, sorted, c.replicas, derive_seed(c.seed, streams::max_law),
                                              c.opts.workers);
  est.replicas = c.replicas;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    std::vector<double> sample(c.replicas);
    for (std::size_t r = 0; r < c.replicas; ++r) sample[r] = maxima[r][j];
    MaxLawTable t;
    t.n = sorted[j];
    t.levels = verification_grid(g, t.n, sample);
    std::sort(sample.begin(), sample.end());
    for (double x : t.levels) {
      const double p = static_cast<double>(std::upper_bound(sample.begin(), sample.end(), x) - sample.begin()) /
                       static_cast<double>(c.replicas);
      t.p_hat.push_back(p);
      t.se.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(c.replicas)));
    }
    est.tables.push_back(std::move(t));
  }
  return est;
}

io::CsvTable verify_table(const DistFn& g, const MaxLawEstimate& est) {
  io::CsvTable t;
  t.header = {"n", "level", "p_hat", "se", "phantom"};
  for (const auto& tab : est.tables) {
    for (std::size_t i = 0; i < tab.levels.size(); ++i) {
      t.add({std::to_string(tab.n), fmt(tab.levels[i]), fmt(tab.p_hat[i]), fmt(tab.se[i]),
             fmt(g.pow_n(tab.levels[i], static_cast<double>(tab.n)))});
    }
  }
  return t;
}

Json verify_json(const VerifyReport& r) {
  Json doc;
  doc["pass"] = r.pass;
  doc["sup_gap"] = r.sup_gap;
  doc["tolerance"] = r.tolerance;
  Json rows = Json::array();
  for (const auto& row : r.per_n) {
    rows.push_back({{"n", row.n},
                    {"gap", row.gap},
                    {"level", row.level},
                    {"se", row.se},
                    {"worst_excess", row.worst_excess},
                    {"levels_in_band", row.levels_in_band},
                    {"pass", row.pass}});
  }
  doc["per_n"] = rows;
  return doc;
}

Json theta_json(const ThetaEstimate& th) {
  Json doc;
  doc["method"] = th.method;
  doc["marginal"] = th.marginal;
  doc["verdict"] = th.verdict;
  doc["theta_hat"] = th.theta_hat;
  doc["theta_se"] = th.theta_se;
  return doc;
}

io::CsvTable theta_table(const ThetaEstimate& th) {
  io::CsvTable t;
  t.header = {"n", "v_hat", "tail", "n_tail", "gamma_prime", "theta", "theta_se"};
  for (const auto& r : th.rows) {
    t.add({std::to_string(r.n), fmt(r.v_hat), fmt(r.tail), fmt(r.n_tail), fmt(r.gamma_prime), fmt(r.theta),
           fmt(r.theta_se)});
  }
  return t;
}

// B_T decays: exact worst values shrink with n; simulated ones are within
// 4 SE of 0 at the largest n or shrink with n.
bool bt_decays(const BTReport& r) {
  bool shrinking = r.worst.size() >= 2;
  for (std::size_t i = 1; i < r.worst.size(); ++i) shrinking = shrinking && r.worst[i].b_value < r.worst[i - 1].b_value;
  if (r.method == "exact") return shrinking || r.worst.back().b_value < 1e-12;
  return shrinking || r.worst.back().b_value <= 4.0 * r.worst.back().se;
}

Json bt_json(const BTReport& r) {
  Json doc;
  doc["method"] = r.method;
  doc["T"] = r.T;
  doc["r_exponent"] = r.r_exponent;
  doc["r_adjusted"] = r.r_adjusted;
  doc["r_tail_decays"] = r.r_tail_decays;
  Json worst = Json::array();
  for (const auto& w : r.worst) worst.push_back({{"n", w.n}, {"p", w.p}, {"q", w.q}, {"b_value", w.b_value}, {"se", w.se}});
  doc["worst"] = worst;
  doc["decays"] = bt_decays(r);
  return doc;
}

void write_bt_tables(const fs::path& out, const BTReport& r) {
  io::CsvTable pairs;
  pairs.header = {"n", "p", "q", "b_value", "se"};
  for (const auto& p : r.pairs) {
    pairs.add({std::to_string(p.n), std::to_string(p.p), std::to_string(p.q), fmt(p.b_value), fmt(p.se)});
  }
  io::write_csv(out / "bt_pairs.csv", pairs);
  io::CsvTable cov;
  cov.header = {"n", "p", "q", "r", "covariance", "se", "r_tail"};
  for (const auto& c : r.covariance) {
    cov.add({std::to_string(c.n), std::to_string(c.p), std::to_string(c.q), std::to_string(c.r), fmt(c.covariance),
             fmt(c.se), fmt(c.r_tail)});
  }
  io::write_csv(out / "bt_covariance.csv", cov);
}

// Caveats that no tolerance captures: Markov chains start from a burn-in
// rather than the stationary law, so every downstream number inherits that bias.
Json caveats(const ProcessSpec& spec, bool zero_cycle) {
  Json notes = Json::array();
  if (spec.is_markov()) {
    notes.push_back("chain started after a burn-in of " + std::to_string(spec.burn_in) +
                    " steps; near-stationarity is an approximation with unquantified residual bias");
  }
  if (zero_cycle) notes.push_back("zero-cycle maximum Y_0 is taken from a burn-in started path; its law is approximate");
  return notes;
}

CommandResult finish(const fs::path& out, Json summary, bool ok) {
  summary["verdict_ok"] = ok;
  io::write_json(out / "summary.json", summary);
  return {std::move(summary), ok};
}

// ---------------------------------------------------------------------------

CommandResult cmd_simulate(const RunConfig& cfg) {
  const Common c = common(cfg);
  const auto length = cfg.count("simulate.length");
  require(length >= 1, ErrorKind::invalid_argument, "simulate.length must be >= 1");
  const SamplePath path = generate(c.spec, derive_seed(c.seed, streams::path), length);
  io::write_path(c.out / "path.csv", path);
  Json doc = header("simulate", cfg);
  doc["notes"] = caveats(c.spec, false);
  doc["spec"] = path.spec;
  doc["spec_hash"] = io::spec_hash(path.spec);
  doc["length"] = path.values.size();
  doc["burn_in"] = path.burn_in;
  doc["regeneration_marks"] = path.regeneration_marks.size();
  if (path.mixture_component) doc["mixture_component"] = *path.mixture_component;
  return finish(c.out, doc, true);
}

CommandResult cmd_phantom_fit(const RunConfig& cfg) {
  const Common c = common(cfg);
  const auto horizon = cfg.count("phantom-fit.horizon");
  const auto verify_n = cfg.sizes("phantom-fit.verify_n");
  const double tol = cfg.real("phantom-fit.tolerance");
  PhantomFit fit;
  const PhantomDistFn G = fit_continuous_phantom(c.spec, c.gamma, horizon, c.replicas, c.seed, c.opts, &fit);
  io::write_text(c.out / "phantom.txt", G.serialize());
  io::CsvTable levels;
  levels.header = {"m", "v_hat"};
  for (std::size_t i = 0; i < fit.m_grid.size(); ++i) levels.add({std::to_string(fit.m_grid[i]), fmt(fit.v_grid[i])});
  io::write_csv(c.out / "fit_levels.csv", levels);

  const MaxLawEstimate est = maxima_for_verification(c, G.as_distfn(), verify_n);
  const VerifyReport report = verify_phantom(G.as_distfn(), est, tol);
  io::write_csv(c.out / "verify.csv", verify_table(G.as_distfn(), est));

  const ThetaEstimate th =
      estimate_theta_single_sequence(c.spec, c.gamma, cfg.sizes("phantom-fit.theta_n"), c.replicas, c.seed, c.opts);
  io::write_csv(c.out / "theta.csv", theta_table(th));

  const double T = cfg.real("phantom-fit.bt_T");
  const auto bt_n = cfg.sizes("phantom-fit.bt_n");
  const auto dse = estimate_driving_sequence(c.spec, c.gamma, bt_n, c.replicas, derive_seed(c.seed, streams::bt), c.opts);
  const BTReport bt = check_BT(c.spec, dse, T, bt_n, default_pq_grid(T), c.replicas, c.seed, c.opts);
  write_bt_tables(c.out, bt);

  Json doc = header("phantom-fit", cfg);
  doc["notes"] = caveats(c.spec, false);
  doc["horizon"] = horizon;
  doc["fit_points"] = fit.m_grid.size();
  doc["verify"] = verify_json(report);
  doc["theta"] = theta_json(th);
  doc["bt"] = bt_json(bt);
  std::string verdict = report.pass ? "phantom verified" : "phantom rejected";
  if (th.verdict == "zero") {
    verdict += ", θ = 0";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, ", θ ≈ %.2f (SE %.2f)", th.theta_hat, th.theta_se);
    verdict += buf;
  }
  doc["verdict"] = verdict;
  return finish(c.out, doc, report.pass);
}

CommandResult cmd_verify(const RunConfig& cfg) {
  const Common c = common(cfg);
  const PhantomDistFn G = PhantomDistFn::deserialize(io::read_text(cfg.text("verify.phantom")));
  const MaxLawEstimate est = maxima_for_verification(c, G.as_distfn(), cfg.sizes("verify.n"));
  const VerifyReport report = verify_phantom(G.as_distfn(), est, cfg.real("verify.tolerance"));
  io::write_csv(c.out / "verify.csv", verify_table(G.as_distfn(), est));
  Json doc = header("verify", cfg);
  doc["notes"] = caveats(c.spec, false);
  doc["verify"] = verify_json(report);
  doc["verdict"] = report.pass ? "phantom verified" : "phantom rejected";
  return finish(c.out, doc, report.pass);
}

CommandResult cmd_bt_check(const RunConfig& cfg) {
  const Common c = common(cfg);
  const double T = cfg.real("bt-check.T");
  const auto ns = cfg.sizes("bt-check.n");
  const auto dse = estimate_driving_sequence(c.spec, c.gamma, ns, c.replicas, derive_seed(c.seed, streams::bt), c.opts);
  const BTReport bt = check_BT(c.spec, dse, T, ns, default_pq_grid(T), c.replicas, c.seed, c.opts);
  write_bt_tables(c.out, bt);
  Json doc = header("bt-check", cfg);
  doc["notes"] = caveats(c.spec, false);
  doc["bt"] = bt_json(bt);
  const bool ok = bt_decays(bt);
  doc["verdict"] = ok ? "B_T decays" : "B_T does not decay";
  return finish(c.out, doc, ok);
}

CommandResult cmd_regen(const RunConfig& cfg) {
  const Common c = common(cfg);
  const auto length = cfg.count("regen.length");
  const SamplePath path = generate(c.spec, derive_seed(c.seed, streams::regen), length);
  RegenStats stats = decompose_regenerative(path);
  const DistFn G = rootzen_phantom(stats, cfg.flag("regen.smooth"));
  zero_cycle_diagnostic(c.spec, cfg.sizes("regen.zero_cycle_n"), c.replicas, c.seed, c.opts.workers, stats);

  Common mc = c;
  mc.opts.exact = false;
  const MaxLawEstimate est = maxima_for_verification(mc, G, cfg.sizes("regen.verify_n"));
  const auto* law = dynamic_cast<const RootzenLaw*>(&G.law());
  const VerifyReport report = verify_phantom(G, est, cfg.real("regen.tolerance"),
                                             [law](double x, double n) { return law->power_se(x, n); });
  io::write_csv(c.out / "verify.csv", verify_table(G, est));

  // cycle-maximum tail against mu (1 - H) at an upper quantile of Y
  std::vector<double> Y = stats.Y;
  std::sort(Y.begin(), Y.end());
  const double q = cfg.real("regen.band_quantile");
  require(q > 0.0 && q < 1.0, ErrorKind::invalid_argument, "regen.band_quantile must lie in (0,1)");
  const double y = empirical_quantile_sorted(Y, q);
  const double p_y = static_cast<double>(Y.end() - std::upper_bound(Y.begin(), Y.end(), y)) / static_cast<double>(Y.size());
  const double step_tail = c.spec.law.sf(y);
  const double band_ratio = step_tail > 0.0 ? p_y / (stats.mu_hat * step_tail) : kInf;
  const bool band_ok = band_ratio >= 0.5 && band_ratio <= 2.0;

  Json tail = nullptr;
  if (path.values.size() >= 100000) {
    const auto cmp = lindley_step_tail_vs_stationary(c.spec.law, path.values);
    tail = std::string(to_string(cmp.verdict));
    io::CsvTable t;
    t.header = {"x", "ratio"};
    for (std::size_t i = 0; i < cmp.probe_levels.size(); ++i) t.add({fmt(cmp.probe_levels[i]), fmt(cmp.ratio_track[i])});
    io::write_csv(c.out / "stationary_tail.csv", t);
  }

  io::CsvTable phantom;
  phantom.header = {"x", "cycle_cdf", "phantom_cdf"};
  for (int i = 1; i < 200; ++i) {
    const double x = empirical_quantile_sorted(Y, i / 200.0);
    phantom.add({fmt(x), fmt(law->cycle_cdf(x)), fmt(G.cdf(x))});
  }
  io::write_csv(c.out / "rootzen.csv", phantom);
  io::CsvTable zc;
  zc.header = {"n", "p_hat", "se"};
  for (std::size_t i = 0; i < stats.zero_cycle_n.size(); ++i) {
    zc.add({std::to_string(stats.zero_cycle_n[i]), fmt(stats.zero_cycle_diag[i]), fmt(stats.zero_cycle_se[i])});
  }
  io::write_csv(c.out / "zero_cycle.csv", zc);

  Json doc = header("regen", cfg);
  doc["notes"] = caveats(c.spec, true);
  doc["cycles"] = stats.cycles;
  doc["mu_hat"] = stats.mu_hat;
  doc["mu_se"] = stats.mu_se;
  doc["verify"] = verify_json(report);
  doc["band"] = {{"quantile", q}, {"y", y}, {"ratio", band_ratio}, {"pass", band_ok}};
  doc["stationary_tail_verdict"] = tail;
  const bool ok = report.pass && band_ok;
  doc["verdict"] = ok ? "rootzen phantom verified" : "rootzen phantom rejected";
  return finish(c.out, doc, ok);
}

CommandResult cmd_rates(const RunConfig& cfg) {
  const fs::path out = cfg.text("run.out");
  const auto kind = parse_dependence_kind(cfg.text("rates.kind"));
  const double b = cfg.real("rates.b");
  const RateVerdict v = check_rate_sufficiency(kind, kind == DependenceKind::alpha ? 0.0 : cfg.real("rates.beta"), b);
  Json rc;
  rc["kind"] = std::string(to_string(v.kind));
  rc["b"] = v.b;
  rc["beta"] = v.beta;
  rc["threshold"] = v.threshold;
  rc["sufficient"] = v.sufficient;
  rc["margin"] = v.margin;
  if (!v.note.empty()) rc["note"] = v.note;

  const std::string case_name = cfg.text("rates.case");
  if (case_name != "none") {
    MixingCase mc;
    const double param = cfg.real("rates.case_param");
    if (case_name == "m_dependent") {
      mc.type = MixingCase::Type::m_dependent;
      mc.m = param;
    } else if (case_name == "exponential") {
      mc.type = MixingCase::Type::exponential;
      mc.rho = param;
    } else if (case_name == "polynomial") {
      mc.type = MixingCase::Type::polynomial;
      mc.beta = param;
    } else {
      fail(ErrorKind::invalid_argument, "config: rates.case must be none, m_dependent, exponential or polynomial");
    }
    DeltaReport dr;
    dr.delta0 = cfg.flag("rates.delta0");
    // "0.1:true,0.5:false"
    std::istringstream in(cfg.text("rates.delta_xi"));
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto colon = item.find(':');
      require(colon != std::string::npos, ErrorKind::invalid_argument, "config: rates.delta_xi items are xi:bool");
      dr.delta_xi[parse_real("rates.delta_xi", item.substr(0, colon))] =
          parse_flag("rates.delta_xi", item.substr(colon + 1));
    }
    const AlphaCaseVerdict av = alpha_discontinuous_case(mc, dr);
    rc["discontinuous_case"] = {{"case", case_name}, {"admits_phantom", av.admits_phantom}, {"which_case", av.which_case}};
  }
  Json doc = header("rates", cfg);
  doc["rate_check"] = rc;
  return finish(out, doc, v.sufficient);
}

CommandResult cmd_extremal_index(const RunConfig& cfg) {
  const Common c = common(cfg);
  const ThetaEstimate th =
      estimate_theta_single_sequence(c.spec, c.gamma, cfg.sizes("extremal-index.n"), c.replicas, c.seed, c.opts);
  io::write_csv(c.out / "theta.csv", theta_table(th));
  Json doc = header("extremal-index", cfg);
  doc["notes"] = caveats(c.spec, false);
  doc["theta"] = theta_json(th);
  return finish(c.out, doc, true);
}

CommandResult cmd_acceptance(const RunConfig& cfg) {
  AcceptanceOptions opts;
  opts.seed = cfg.count("run.seed");
  opts.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, cfg.count("run.workers")));
  opts.tolerance_scale = cfg.real("acceptance.tolerance_scale");
  require(opts.tolerance_scale >= 0.0, ErrorKind::invalid_argument, "acceptance.tolerance_scale must be >= 0");
  opts.scratch = fs::path(cfg.text("run.out")) / "determinism";
  std::istringstream in(cfg.text("acceptance.only"));
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) opts.only.push_back(static_cast<int>(parse_count("acceptance.only", item)));
  }
  const auto results = run_acceptance(opts);
  Json doc = header("acceptance", cfg);
  Json rows = Json::array();
  bool ok = true;
  for (const auto& r : results) {
    rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    ok = ok && r.pass;
  }
  doc["criteria"] = rows;
  return finish(cfg.text("run.out"), doc, ok);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "phantom-fit", "verify", "bt-check",
                                                 "regen", "rates", "extremal-index", "acceptance"};
  return names;
}

CommandResult run_command(std::string_view name, const RunConfig& config) {
  if (name == "simulate") return cmd_simulate(config);
  if (name == "phantom-fit") return cmd_phantom_fit(config);
  if (name == "verify") return cmd_verify(config);
  if (name == "bt-check") return cmd_bt_check(config);
  if (name == "regen") return cmd_regen(config);
  if (name == "rates") return cmd_rates(config);
  if (name == "extremal-index") return cmd_extremal_index(config);
  if (name == "acceptance") return cmd_acceptance(config);
  fail(ErrorKind::invalid_argument, "unknown command '" + std::string(name) + "'");
}

}  // namespace phdf
