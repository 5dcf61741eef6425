#include "bhp_cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "bhp/error.hpp"
#include "bhp/estimators.hpp"
#include "bhp/renorm.hpp"
#include "bhp/rng.hpp"

namespace bhp::cli {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvRow base_row(const ExperimentConfig& cfg, const std::string& experiment) {
  CsvRow row;
  row.experiment = experiment;
  row.d = cfg.model.d;
  row.lambda = cfg.model.lambda;
  row.lambda_prime = cfg.model.lambda_prime;
  return row;
}

void put_estimate(CsvRow& row, const Estimate& e) {
  row.estimate = e.value;
  row.std_error = e.std_error;
  row.ci_lo = e.ci_lo();
  row.ci_hi = e.ci_hi();
  row.n_reps = e.n_replicates;
}

McConfig mc_of(const ExperimentConfig& cfg, std::size_t reps, std::initializer_list<std::uint64_t> tags) {
  McConfig mc;
  mc.seed = tags.size() == 0 ? cfg.seed : derive_seed(cfg.seed, tags);
  mc.n_reps = reps;
  mc.threads = cfg.threads;
  return mc;
}

void raise(RunOutcome& out, int code) { out.exit_code = std::max(out.exit_code, code); }

void run_theta_kr(const ExperimentConfig& cfg, const ThetaKrSettings& s, RunOutcome& out, std::ostream& log) {
  const McConfig mc = mc_of(cfg, cfg.n_reps, {});
  auto emit = [&](const ThetaKrResult& res, const char* name) {
    for (std::size_t j = 0; j < res.k.size(); ++j) {
      CsvRow row = base_row(cfg, "theta_kr");
      row.r = cfg.model.r;
      row.k_or_a = res.k[j];
      put_estimate(row, res.estimates[j]);
      row.extra = {{"estimator", name}, {"core_volume", res.core_volume}, {"window", s.window}};
      out.rows.push_back(std::move(row));
    }
  };
  if (s.estimator != "mass_transport") {
    log << "theta_kr: window estimator, " << mc.n_reps << " replicates\n";
    emit(theta_kr_window(cfg.model, s.k, s.window, mc), "window");
  }
  if (s.estimator != "window") {
    log << "theta_kr: mass-transport estimator, " << mc.n_reps << " replicates\n";
    emit(theta_kr_mass_transport(cfg.model, s.k, s.window, mc), "mass_transport");
  }
}

void run_subcritical(const ExperimentConfig& cfg, const SubcriticalSettings& s, RunOutcome& out, std::ostream& log) {
  BoundSettings settings;
  settings.window_size = s.window;
  settings.palm_window = s.palm_window;
  settings.theta_mc = mc_of(cfg, cfg.n_reps, {});
  settings.palm_mc = mc_of(cfg, s.palm_reps, {1});
  settings.decay_r = s.decay_r;
  settings.decay_window = s.decay_window;
  settings.slack_sigmas = s.slack_sigmas;
  log << "subcritical_bound: " << s.k.size() << " hop budgets, " << s.palm_reps << " Palm replicates\n";
  const SubcriticalReport rep = check_subcritical_bound(cfg.model, s.k, settings);

  CsvRow size = base_row(cfg, "mean_cluster_size");
  put_estimate(size, rep.mean_cluster_size);
  size.extra = {{"palm_window", s.palm_window}};
  out.rows.push_back(std::move(size));
  for (const BoundRow& b : rep.rows) {
    CsvRow row = base_row(cfg, "subcritical_bound");
    row.r = cfg.model.r;
    row.k_or_a = b.k;
    put_estimate(row, b.theta);
    row.extra = {{"bound", b.bound.value}, {"bound_se", b.bound.std_error}, {"z", b.z}, {"violation", b.violation}};
    out.rows.push_back(std::move(row));
  }
  for (const DecayRow& dr : rep.decay) {
    CsvRow row = base_row(cfg, "small_k_decay");
    row.r = dr.r;
    row.k_or_a = dr.k;
    put_estimate(row, dr.theta);
    row.extra = {{"bound", dr.bound.value}, {"bound_se", dr.bound.std_error}};
    out.rows.push_back(std::move(row));
  }
  out.summary["any_violation"] = rep.any_violation;
  if (rep.any_violation) raise(out, kCheckFailed);
}

void run_theta(const ExperimentConfig& cfg, const ThetaSettings& s, RunOutcome& out, std::ostream& log) {
  log << "theta: " << cfg.n_reps << " replicates in a window of side " << s.window << "\n";
  const ThetaEstimate t = estimate_theta(cfg.model.lambda, cfg.model.d, s.window, mc_of(cfg, cfg.n_reps, {}));
  CsvRow row = base_row(cfg, "theta");
  put_estimate(row, t.ball);
  row.extra = {{"palm", t.palm.value}, {"palm_se", t.palm.std_error}, {"no_giant_replicates", t.no_giant_replicates}};
  out.rows.push_back(std::move(row));
  for (std::size_t i = 0; i < s.coincidence_m.size(); ++i) {
    const std::size_t m = s.coincidence_m[i];
    const CoincidenceCheck c = giant_coincidence(cfg.model.lambda, cfg.model.d, m, s.separation, s.window,
                                                 mc_of(cfg, cfg.n_reps, {2, i}));
    CsvRow crow = base_row(cfg, "giant_coincidence");
    crow.k_or_a = static_cast<double>(m);
    put_estimate(crow, c.observed);
    crow.extra = {{"predicted", c.predicted}, {"theta_palm", c.theta_palm.value}, {"separation", s.separation}};
    out.rows.push_back(std::move(crow));
  }
}

void run_mu(const ExperimentConfig& cfg, const MuSettings& s, RunOutcome& out, std::ostream& log) {
  const std::vector<double> lambdas = s.lambdas.empty() ? std::vector<double>{cfg.model.lambda} : s.lambdas;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    log << "mu: lambda=" << lambdas[i] << "\n";
    const MuEstimate mu = estimate_mu(lambdas[i], cfg.model.d, s.n, s.aspect, mc_of(cfg, cfg.n_reps, {3, i}));
    for (const MuRow& r : mu.rows) {
      CsvRow row = base_row(cfg, "mu");
      row.lambda = lambdas[i];
      row.k_or_a = r.n;
      put_estimate(row, r.ratio);
      row.extra = {{"discarded", r.discarded}, {"aspect", s.aspect}};
      out.rows.push_back(std::move(row));
    }
  }
}

void run_limit_law(const ExperimentConfig& cfg, const LimitLawSettings& s, RunOutcome& out, std::ostream& log) {
  double theta = 0.0, mu = 0.0;
  if (s.theta) {
    theta = *s.theta;
  } else {
    log << "limit_law: estimating theta\n";
    const ThetaEstimate t = estimate_theta(cfg.model.lambda, cfg.model.d, s.theta_window, mc_of(cfg, s.theta_reps, {1}));
    theta = t.palm.value;
    CsvRow row = base_row(cfg, "theta");
    put_estimate(row, t.palm);
    row.extra = {{"estimator", "palm"}};
    out.rows.push_back(std::move(row));
  }
  if (s.mu) {
    mu = *s.mu;
  } else {
    log << "limit_law: estimating mu\n";
    const std::uint32_t ns[] = {s.mu_n};
    const MuEstimate m = estimate_mu(cfg.model.lambda, cfg.model.d, ns, s.mu_aspect, mc_of(cfg, s.mu_reps, {2}));
    mu = std::max(1.0, m.mu.value);
    CsvRow row = base_row(cfg, "mu");
    row.k_or_a = s.mu_n;
    put_estimate(row, m.mu);
    out.rows.push_back(std::move(row));
  }
  log << "limit_law: theta=" << theta << " mu=" << mu << ", " << cfg.n_reps << " Palm replicates per r\n";
  const LimitCheckReport rep = empirical_limit_check(cfg.model, s.r, theta, mu, mc_of(cfg, cfg.n_reps, {}));
  for (const LimitCheckRow& lr : rep.rows) {
    CsvRow row = base_row(cfg, "limit_law");
    row.r = lr.r;
    row.estimate = lr.sup_distance;
    row.n_reps = cfg.n_reps;
    row.extra = {{"p_infinite", lr.p_infinite.value}, {"p_infinite_se", lr.p_infinite.std_error},
                 {"atom_z", lr.atom_z},           {"theta", theta},
                 {"mu", mu},                      {"half_width", lr.half_width}};
    out.rows.push_back(std::move(row));
  }
}

void run_renorm(const ExperimentConfig& cfg, const RenormSettings& s, RunOutcome& out, std::ostream& log) {
  const double eps = s.epsilon ? *s.epsilon : epsilon_of_lambda(cfg.model.lambda, cfg.model.d);
  log << "renorm_diag: epsilon=" << eps << " n=" << s.n << "\n";
  const SoundnessReport rep = renorm_soundness(cfg.model.lambda, cfg.model.d, s.n, eps, s.margin, mc_of(cfg, cfg.n_reps, {}));
  std::size_t enlarge = 0;
  for (const auto& r : rep.rows) enlarge += r.status == SoundnessRow::Status::enlarge_box ? 1 : 0;
  CsvRow row = base_row(cfg, "renorm_soundness");
  row.k_or_a = static_cast<double>(rep.m);
  row.estimate = rep.rows.empty() ? 0.0 : static_cast<double>(rep.certified) / static_cast<double>(rep.rows.size());
  row.n_reps = rep.rows.size();
  row.extra = {{"epsilon", eps},          {"n", s.n},
               {"certified", rep.certified}, {"violations", rep.violations},
               {"enlarge_box", enlarge},  {"all_good", rep.all_good},
               {"max_all_good_ratio", rep.max_all_good_ratio}, {"ratio_limit", 1.0 + 2.0 * eps}};
  out.rows.push_back(std::move(row));
  out.summary["certified"] = rep.certified;
  out.summary["violations"] = rep.violations;
  if (enlarge > 0) {
    log << "renorm_diag: " << enlarge << " realisations need a larger site box\n";
    raise(out, kPrecondition);
  }
  if (rep.violations > 0 || rep.max_all_good_ratio > 1.0 + 2.0 * eps) raise(out, kCheckFailed);

  if (!s.tail_m.empty()) {
    const TailReport tail = cluster_tail_check(cfg.model.lambda, eps, cfg.model.d, s.tail_m, s.tail_margin,
                                               mc_of(cfg, s.tail_reps, {4}));
    for (const TailRow& t : tail.rows) {
      CsvRow trow = base_row(cfg, "cluster_tail");
      trow.k_or_a = static_cast<double>(t.m);
      put_estimate(trow, t.boundary_exceed);
      trow.extra = {{"u_prime_exceed", t.u_prime_exceed.value},
                    {"boundary_threshold", t.boundary_threshold},
                    {"u_prime_threshold", t.u_prime_threshold},
                    {"mean_boundary_total", t.mean_boundary_total.value},
                    {"mean_u_prime", t.mean_u_prime.value},
                    {"enlarge_box", t.enlarge_box},
                    {"q_hat", tail.q_hat.value},
                    {"in_regime", tail.in_regime}};
      out.rows.push_back(std::move(trow));
    }
    out.summary["in_regime"] = tail.in_regime;
    if (!tail.in_regime) {
      log << "renorm_diag: outside the small-q regime (q_hat=" << tail.q_hat.value << " >= " << tail.regime_threshold << ")\n";
      raise(out, kPrecondition);
    }
    if (tail.boundary_not_connected + tail.isoperimetry_violations + tail.boundary_sum_violations > 0)
      raise(out, kCheckFailed);
  }
}

void run_q_bound(const ExperimentConfig& cfg, const QBoundSettings& s, RunOutcome& out, std::ostream& log) {
  bool exceeded = false;
  for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
    const double lambda = s.lambdas[i];
    const std::vector<double> eps =
        s.epsilons.empty() ? std::vector<double>{epsilon_of_lambda(lambda, cfg.model.d)} : s.epsilons;
    for (std::size_t j = 0; j < eps.size(); ++j) {
      log << "q_bound: lambda=" << lambda << " epsilon=" << eps[j] << "\n";
      const Estimate q = estimate_q(lambda, eps[j], cfg.model.d, mc_of(cfg, cfg.n_reps, {5, i, j}));
      const double qb = q_bound(lambda, eps[j], cfg.model.d);
      CsvRow row = base_row(cfg, "q_bound");
      row.lambda = lambda;
      row.k_or_a = eps[j];
      put_estimate(row, q);
      const bool within = q.value <= qb + 3.0 * q.std_error;
      exceeded |= !within;
      row.extra = {{"q_bound", qb}, {"scaled_bound", qb / eps[j]}, {"within_3sigma", within}};
      out.rows.push_back(std::move(row));
    }
  }
  if (exceeded) raise(out, kCheckFailed);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  auto opt = [](const std::optional<double>& x) { return x ? fmt(*x) : std::string(); };
  out << kCsvHeader << '\n';
  for (const CsvRow& r : rows) {
    out << r.experiment << ',' << r.d << ',' << fmt(r.lambda) << ',' << fmt(r.lambda_prime) << ',' << opt(r.r) << ','
        << opt(r.k_or_a) << ',' << opt(r.estimate) << ',' << opt(r.std_error) << ',' << opt(r.ci_lo) << ','
        << opt(r.ci_hi) << ',' << (r.n_reps ? std::to_string(*r.n_reps) : std::string()) << ','
        << csv_quote(r.extra.dump()) << '\n';
  }
}

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  RunOutcome out;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ThetaKrSettings>) run_theta_kr(cfg, s, out, log);
        else if constexpr (std::is_same_v<S, SubcriticalSettings>) run_subcritical(cfg, s, out, log);
        else if constexpr (std::is_same_v<S, ThetaSettings>) run_theta(cfg, s, out, log);
        else if constexpr (std::is_same_v<S, MuSettings>) run_mu(cfg, s, out, log);
        else if constexpr (std::is_same_v<S, LimitLawSettings>) run_limit_law(cfg, s, out, log);
        else if constexpr (std::is_same_v<S, RenormSettings>) run_renorm(cfg, s, out, log);
        else run_q_bound(cfg, s, out, log);
      },
      cfg.settings);
  return out;
}

int run_and_write(const ExperimentConfig& cfg, std::ostream& stdout_line, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  json summary = {{"experiment", cfg.experiment}, {"seed", cfg.seed}};
  RunOutcome outcome;
  try {
    outcome = run_experiment(cfg, log);
  } catch (const Error& e) {
    const bool invalid = e.kind() == ErrorKind::parameter || e.kind() == ErrorKind::configuration;
    summary["status"] = "error";
    summary["error"] = e.what();
    summary["exit_code"] = invalid ? kInvalidConfig : kPrecondition;
    log << "error: " << e.what() << '\n';
    stdout_line << summary.dump() << std::endl;
    return invalid ? kInvalidConfig : kPrecondition;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::create_directories(cfg.out);
  const auto csv_path = cfg.out / "results.csv";
  const auto manifest_path = cfg.out / "manifest.json";
  {
    std::ofstream csv(csv_path, std::ios::binary);
    write_csv(csv, outcome.rows);
    if (!csv) throw Error(ErrorKind::configuration, "cannot write " + csv_path.string());
  }
  json manifest = {{"manifest_version", 1},
                   {"tool", "bhperc"},
                   {"version", kVersion},
                   {"compiler", __VERSION__},
                   {"config", cfg.source},
                   {"seed", cfg.seed},
                   {"threads", cfg.threads},
                   {"wall_seconds", wall},
                   {"exit_code", outcome.exit_code},
                   {"outputs", {{"csv", csv_path.string()}}}};
  {
    std::ofstream m(manifest_path);
    m << manifest.dump(2) << '\n';
  }
  summary["status"] = outcome.exit_code == kOk ? "ok" : "failed";
  summary["exit_code"] = outcome.exit_code;
  summary["rows"] = outcome.rows.size();
  summary["csv"] = csv_path.string();
  summary["manifest"] = manifest_path.string();
  summary["wall_seconds"] = wall;
  summary.update(outcome.summary);
  stdout_line << summary.dump() << std::endl;
  return outcome.exit_code;
}

}  // namespace bhp::cli
