#include "bhp_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bhp/error.hpp"
#include "bhp_cli/toml_lite.hpp"

namespace bhp::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::configuration, msg); }

// Key access that remembers which keys were read, so leftovers can be
// reported by name.
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad("'" + path_ + "' must be a table");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& need(const std::string& key) {
    const json* v = find(key);
    if (!v) bad("missing key '" + name(key) + "'");
    return *v;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = find(key);
    if (!v) {
      if (!fallback) bad("missing key '" + name(key) + "'");
      return *fallback;
    }
    return as_number(*v, key);
  }

  std::optional<double> maybe_number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_number(*v, key);
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    const json* v = find(key);
    if (!v) {
      if (!fallback) bad("missing key '" + name(key) + "'");
      return *fallback;
    }
    return as_integer(*v, key);
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = find(key);
    if (!v) {
      if (!fallback) bad("missing key '" + name(key) + "'");
      return *fallback;
    }
    if (!v->is_string()) bad("'" + name(key) + "' must be a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, bool required) {
    std::vector<double> out;
    const json* v = find(key);
    if (!v) {
      if (required) bad("missing key '" + name(key) + "'");
      return out;
    }
    if (!v->is_array()) bad("'" + name(key) + "' must be an array");
    for (const json& x : *v) out.push_back(as_number(x, key));
    return out;
  }

  std::vector<std::int64_t> integers(const std::string& key, bool required) {
    std::vector<std::int64_t> out;
    const json* v = find(key);
    if (!v) {
      if (required) bad("missing key '" + name(key) + "'");
      return out;
    }
    if (!v->is_array()) bad("'" + name(key) + "' must be an array");
    for (const json& x : *v) out.push_back(as_integer(x, key));
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) bad("unknown key '" + name(it.key()) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) bad("'" + name(key) + "' must be a number");
    return v.get<double>();
  }

  std::int64_t as_integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer()) bad("'" + name(key) + "' must be an integer");
    return v.get<std::int64_t>();
  }
};

std::vector<std::uint32_t> positive_u32(const std::vector<std::int64_t>& xs, const std::string& key) {
  std::vector<std::uint32_t> out;
  for (std::int64_t x : xs) {
    if (x < 1 || x > 1'000'000) bad("'" + key + "' entries must lie in [1, 1e6]");
    out.push_back(static_cast<std::uint32_t>(x));
  }
  return out;
}

std::size_t count(std::int64_t x, const std::string& key) {
  if (x < 1) bad("'" + key + "' must be >= 1");
  return static_cast<std::size_t>(x);
}

void positive(double x, const std::string& key) {
  if (!(x > 0.0) || !std::isfinite(x)) bad("'" + key + "' must be positive and finite");
}

std::uint32_t max_of(const std::vector<std::uint32_t>& xs) { return *std::max_element(xs.begin(), xs.end()); }

ModelParams parse_model(Table& t, const std::string& experiment) {
  ModelParams p;
  p.d = static_cast<int>(t.integer("d", 2));
  p.lambda = t.number("lambda");
  const bool needs_stations = experiment == "theta_kr" || experiment == "subcritical_bound" || experiment == "limit_law";
  p.lambda_prime = needs_stations ? t.number("lambda_prime") : t.number("lambda_prime", 0.0);
  p.r = needs_stations && experiment != "limit_law" ? t.number("r") : t.number("r", 1.0);
  const std::string stations = t.string("stations", "poisson");
  if (stations == "poisson") p.stations = StationProcess::poisson;
  else if (stations == "shifted_lattice") p.stations = StationProcess::shifted_lattice;
  else bad("'model.stations' must be \"poisson\" or \"shifted_lattice\"");
  t.finish();
  try {
    p.validate();
  } catch (const Error& e) {
    bad(std::string("model: ") + e.what());
  }
  return p;
}

ExperimentSettings parse_settings(Table& t, const ExperimentConfig& cfg) {
  const std::string& kind = cfg.experiment;
  if (kind == "theta_kr") {
    ThetaKrSettings s;
    s.k = positive_u32(t.integers("k", true), "theta_kr.k");
    if (s.k.empty()) bad("'theta_kr.k' is empty");
    s.window = t.number("window", s.window);
    s.estimator = t.string("estimator", s.estimator);
    if (s.estimator != "window" && s.estimator != "mass_transport" && s.estimator != "both")
      bad("'theta_kr.estimator' must be window, mass_transport or both");
    const double need = s.estimator == "window" ? max_of(s.k) + 1.0 : 2.0 * max_of(s.k) + 1.0;
    if (!(0.5 * s.window > need))
      bad("truncation rule: window/2 must exceed " + std::string(s.estimator == "window" ? "max(k)+1" : "2max(k)+1") +
          " = " + std::to_string(need));
    return s;
  }
  if (kind == "subcritical_bound") {
    SubcriticalSettings s;
    s.k = positive_u32(t.integers("k", true), "subcritical_bound.k");
    if (s.k.empty()) bad("'subcritical_bound.k' is empty");
    s.window = t.number("window", s.window);
    s.palm_window = t.number("palm_window", s.palm_window);
    s.palm_reps = count(t.integer("palm_reps", static_cast<std::int64_t>(cfg.n_reps)), "subcritical_bound.palm_reps");
    s.decay_r = t.numbers("decay_r", false);
    s.decay_window = t.number("decay_window", s.decay_window);
    s.slack_sigmas = t.number("slack_sigmas", s.slack_sigmas);
    positive(s.palm_window, "subcritical_bound.palm_window");
    positive(s.slack_sigmas, "subcritical_bound.slack_sigmas");
    if (!(0.5 * s.window > max_of(s.k) + 1.0)) bad("truncation rule: window/2 must exceed max(k)+1");
    for (double r : s.decay_r) {
      positive(r, "subcritical_bound.decay_r");
      if (!(0.5 * s.decay_window > std::ceil(std::sqrt(r)) + 1.0))
        bad("truncation rule: decay_window/2 must exceed ceil(sqrt(r))+1");
    }
    return s;
  }
  if (kind == "theta") {
    ThetaSettings s;
    s.window = t.number("window", s.window);
    for (std::int64_t m : t.integers("coincidence_m", false)) s.coincidence_m.push_back(count(m, "theta.coincidence_m"));
    s.separation = t.number("separation", s.separation);
    if (!(s.window > 2.0)) bad("truncation rule: theta window must exceed 2");
    if (!s.coincidence_m.empty() && !(s.separation > 2.0 && 2.0 * s.separation < s.window))
      bad("'theta.separation' must exceed 2 and fit inside the window");
    return s;
  }
  if (kind == "mu") {
    MuSettings s;
    s.n = positive_u32(t.integers("n", true), "mu.n");
    if (s.n.empty()) bad("'mu.n' is empty");
    s.aspect = t.number("aspect", s.aspect);
    s.lambdas = t.numbers("lambdas", false);
    positive(s.aspect, "mu.aspect");
    for (double l : s.lambdas) positive(l, "mu.lambdas");
    return s;
  }
  if (kind == "limit_law") {
    LimitLawSettings s;
    s.r = t.numbers("r", true);
    if (s.r.empty()) bad("'limit_law.r' is empty");
    for (double r : s.r) positive(r, "limit_law.r");
    s.theta = t.maybe_number("theta");
    s.mu = t.maybe_number("mu");
    s.theta_window = t.number("theta_window", s.theta_window);
    s.theta_reps = count(t.integer("theta_reps", static_cast<std::int64_t>(s.theta_reps)), "limit_law.theta_reps");
    s.mu_n = positive_u32({t.integer("mu_n", s.mu_n)}, "limit_law.mu_n").front();
    s.mu_reps = count(t.integer("mu_reps", static_cast<std::int64_t>(s.mu_reps)), "limit_law.mu_reps");
    s.mu_aspect = t.number("mu_aspect", s.mu_aspect);
    if (s.theta && !(*s.theta > 0.0 && *s.theta <= 1.0)) bad("'limit_law.theta' must lie in (0, 1]");
    if (s.mu && !(*s.mu >= 1.0)) bad("'limit_law.mu' must be >= 1");
    if (!(cfg.model.lambda_prime > 0.0)) bad("'model.lambda_prime' must be positive for limit_law");
    return s;
  }
  if (kind == "renorm_diag") {
    RenormSettings s;
    s.n = t.number("n", s.n);
    s.epsilon = t.maybe_number("epsilon");
    s.margin = t.integer("margin", s.margin);
    for (std::int64_t m : t.integers("tail_m", false)) s.tail_m.push_back(static_cast<long>(count(m, "renorm_diag.tail_m")));
    s.tail_margin = t.integer("tail_margin", s.tail_margin);
    s.tail_reps = count(t.integer("tail_reps", static_cast<std::int64_t>(cfg.n_reps)), "renorm_diag.tail_reps");
    positive(s.n, "renorm_diag.n");
    if (s.margin < 1 || s.tail_margin < 1) bad("renorm_diag margins must be >= 1");
    if (s.epsilon && !(*s.epsilon > 0.0 && *s.epsilon < 1.0 / cfg.model.d))
      bad("'renorm_diag.epsilon' must lie in (0, 1/d)");
    return s;
  }
  if (kind == "q_bound") {
    QBoundSettings s;
    s.lambdas = t.numbers("lambdas", true);
    s.epsilons = t.numbers("epsilons", false);
    if (s.lambdas.empty()) bad("'q_bound.lambdas' is empty");
    for (double l : s.lambdas)
      if (!(l >= 0.0) || !std::isfinite(l)) bad("'q_bound.lambdas' entries must be finite and >= 0");
    for (double e : s.epsilons)
      if (!(e > 0.0 && e < 1.0 / cfg.model.d)) bad("'q_bound.epsilons' entries must lie in (0, 1/d)");
    return s;
  }
  bad("unknown experiment '" + kind + "'");
}

}  // namespace

nlohmann::json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc;
  const auto ext = path.extension().string();
  if (ext == ".json") {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      bad(std::string("invalid JSON: ") + e.what());
    }
  } else {
    doc = parse_toml(text);
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("manifest_version")) return doc.at("config");
  return doc;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  Table top(doc, "");
  ExperimentConfig cfg;
  cfg.experiment = top.string("experiment");
  const std::int64_t seed = top.integer("seed");
  if (seed < 0) bad("'seed' must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.threads = static_cast<int>(top.integer("threads", 1));
  if (cfg.threads < 1) bad("'threads' must be >= 1");
  cfg.out = top.string("out", "results");

  const json empty = json::object();
  Table model(top.has("model") ? top.need("model") : (top.find("model"), empty), "model");
  cfg.model = parse_model(model, cfg.experiment);

  Table mc(top.has("mc") ? top.need("mc") : (top.find("mc"), empty), "mc");
  cfg.n_reps = count(mc.integer("n_reps", 100), "mc.n_reps");
  mc.finish();

  Table settings(top.has(cfg.experiment) ? top.need(cfg.experiment) : (top.find(cfg.experiment), empty), cfg.experiment);
  cfg.settings = parse_settings(settings, cfg);
  settings.finish();
  top.finish();
  cfg.source = doc;
  return cfg;
}

}  // namespace bhp::cli
