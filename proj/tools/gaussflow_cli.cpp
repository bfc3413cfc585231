// gaussflow command-line driver.
//
//   gaussflow <geodesic|xi|hessian-scan|boundary-scan|flow> --config run.json
//             [--out DIR] [--seed U64]
//
// Exit status: 0 when every enabled probe passes, 1 on a probe failure,
// 2 on a configuration error (including a CFL violation).

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gaussflow/gaussflow.hpp"

namespace gf = gaussflow;
using gf::Matrix;
using gf::Vector;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitProbeFailure = 1;
constexpr int kExitConfigError = 2;

[[noreturn]] void config_error(const std::string& what) {
  throw gf::Error(gf::ErrorKind::kConfigError, what);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Config access. Dotted names resolve through nested objects; a literal
// dotted key at the top level is accepted too.

const json* lookup(const json& cfg, const std::string& dotted) {
  if (cfg.contains(dotted)) return &cfg.at(dotted);
  const json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &node->at(key);
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

double get_real(const json& cfg, const std::string& key, std::optional<double> fallback = {}) {
  const json* v = lookup(cfg, key);
  if (!v) {
    if (fallback) return *fallback;
    config_error("missing field '" + key + "'");
  }
  if (!v->is_number()) config_error("field '" + key + "' must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) config_error("field '" + key + "' must be finite");
  return x;
}

double get_positive(const json& cfg, const std::string& key, std::optional<double> fallback = {}) {
  const double x = get_real(cfg, key, fallback);
  if (x <= 0.0) config_error("field '" + key + "' must be positive");
  return x;
}

long get_count(const json& cfg, const std::string& key, std::optional<long> fallback = {}) {
  const json* v = lookup(cfg, key);
  if (!v) {
    if (fallback) return *fallback;
    config_error("missing field '" + key + "'");
  }
  if (!v->is_number_integer() || v->get<long>() <= 0) {
    config_error("field '" + key + "' must be a positive integer");
  }
  return v->get<long>();
}

std::string get_string(const json& cfg, const std::string& key, std::optional<std::string> fallback = {}) {
  const json* v = lookup(cfg, key);
  if (!v) {
    if (fallback) return *fallback;
    config_error("missing field '" + key + "'");
  }
  if (!v->is_string()) config_error("field '" + key + "' must be a string");
  return v->get<std::string>();
}

std::uint64_t get_seed(const json& cfg) {
  const json* v = lookup(cfg, "scan.seed");
  if (!v) config_error("sampled scans need 'scan.seed'");
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
    config_error("'scan.seed' must be an unsigned integer");
  }
  return v->get<std::uint64_t>();
}

std::pair<int, int> get_dims(const json& cfg, int max_dim = 8) {
  const long n = get_count(cfg, "n"), m = get_count(cfg, "m");
  if (n > max_dim || m > max_dim) config_error("n and m must be at most " + std::to_string(max_dim));
  return {static_cast<int>(n), static_cast<int>(m)};
}

// ---------------------------------------------------------------------------
// Reports

struct Probe {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

class Report {
 public:
  Report(std::vector<std::string> columns, std::string hash)
      : columns_(std::move(columns)), hash_(std::move(hash)) {}

  void row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) throw std::logic_error("row width mismatch");
    rows_.push_back(values);
  }

  void probe(Probe p) { probes_.push_back(std::move(p)); }

  bool pass() const {
    for (const Probe& p : probes_) {
      if (!p.pass) return false;
    }
    return true;
  }

  void set_extra(const std::string& key, json value) { extra_[key] = std::move(value); }

  void write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) config_error("cannot write " + path.string());
    for (const auto& c : columns_) out << c << ',';
    out << "config_hash\n";
    for (const auto& r : rows_) {
      for (double v : r) out << num(v) << ',';
      out << hash_ << '\n';
    }
  }

  void write_json(const std::filesystem::path& path, const json& config,
                  const std::string& command) const {
    // Numbers go through the same %.17g text as the CSV.
    std::ostringstream s;
    s << "{\n  \"command\": " << json(command).dump() << ",\n";
    s << "  \"config\": " << config.dump() << ",\n";
    s << "  \"config_hash\": \"" << hash_ << "\",\n";
    for (const auto& [k, v] : extra_.items()) s << "  " << json(k).dump() << ": " << v.dump() << ",\n";
    s << "  \"probes\": {";
    for (std::size_t k = 0; k < probes_.size(); ++k) {
      const Probe& p = probes_[k];
      s << (k ? ",\n" : "\n") << "    " << json(p.name).dump() << ": {\"value\": " << num(p.value)
        << ", \"tolerance\": " << num(p.tolerance) << ", \"pass\": " << (p.pass ? "true" : "false")
        << "}";
    }
    s << (probes_.empty() ? "},\n" : "\n  },\n");
    s << "  \"pass\": " << (pass() ? "true" : "false") << ",\n";
    s << "  \"columns\": " << json(columns_).dump() << ",\n  \"rows\": [";
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      s << (r ? ",\n" : "\n") << "    {";
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        s << (c ? ", " : "") << json(columns_[c]).dump() << ": " << num(rows_[r][c]);
      }
      s << ", \"config_hash\": \"" << hash_ << "\"}";
    }
    s << (rows_.empty() ? "]\n}\n" : "\n  ]\n}\n");
    std::ofstream out(path, std::ios::binary);
    if (!out) config_error("cannot write " + path.string());
    out << s.str();
  }

  const std::vector<Probe>& probes() const { return probes_; }

 private:
  std::vector<std::string> columns_;
  std::string hash_;
  std::vector<std::vector<double>> rows_;
  std::vector<Probe> probes_;
  json extra_ = json::object();
};

Probe upper_bound(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, value <= tolerance};
}

// ---------------------------------------------------------------------------
// Commands

const std::vector<double> kGeodesicTimes = {0.25, 0.5, 0.75, 1.0};

void run_geodesic(const json& cfg, Report& report) {
  const auto [n, m] = get_dims(cfg);
  const long samples = get_count(cfg, "scan.samples");
  gf::Rng rng(get_seed(cfg));
  double worst = 0.0;
  for (long k = 0; k < samples; ++k) {
    const gf::TangentMatrix dir = gf::random_unit_tangent(rng, gf::random_plane(rng, n, m));
    for (double s : kGeodesicTimes) {
      const gf::Plane ode = gf::geodesic(dir, s);
      const double err = gf::distance(ode, gf::geodesic_closed_form(dir, s));
      worst = std::max(worst, err);
      report.row({static_cast<double>(k), s, gf::distance(dir.base(), ode), err});
    }
  }
  report.probe(upper_bound("ode_vs_closed_form", worst, get_positive(cfg, "tolerances.geodesic", 1e-8)));
}

void run_xi(const json& cfg, Report& report) {
  const auto [n, m] = get_dims(cfg);
  const long samples = get_count(cfg, "scan.samples");
  const double spread = get_positive(cfg, "scan.lambda_max", 2.5);
  gf::Rng rng(get_seed(cfg));
  std::uniform_real_distribution<double> u(0.0, spread);
  long disagreements = 0;
  for (long k = 0; k < samples; ++k) {
    const gf::Plane q = gf::random_plane(rng, n, m);
    std::vector<double> lambdas;
    for (int i = 0; i < std::min(n, m); ++i) lambdas.push_back(u(rng));
    const gf::Plane p = gf::plane_with_singular_values(rng, q, lambdas);
    const gf::XiVerdict a = gf::xi_membership_lambda(p, q);
    const gf::XiVerdict b = gf::xi_membership_sigma(p, q);
    disagreements += a.is_member != b.is_member;
    report.row({static_cast<double>(k), gf::omega_value(gf::OmegaForm{q}, p),
                a.worst_pair_product.value_or(0.0), b.sigma_min_eigenvalue.value_or(0.0),
                static_cast<double>(a.is_member), static_cast<double>(b.is_member),
                static_cast<double>(a.is_member == b.is_member)});
  }
  report.probe(upper_bound("disagreements", static_cast<double>(disagreements), 0.0));
}

void run_hessian_scan(const json& cfg, Report& report) {
  const auto [n, m] = get_dims(cfg);
  const long samples = get_count(cfg, "scan.samples");
  const long directions = get_count(cfg, "scan.directions", 1);
  const double h = get_positive(cfg, "scan.fd_step", 1e-4);
  gf::Rng rng(get_seed(cfg));
  const gf::OmegaForm w{gf::coordinate_plane(n, m)};
  double worst_rel = 0.0, worst_inside = -std::numeric_limits<double>::infinity();
  long k = 0;
  while (k < samples) {
    const gf::Plane p = gf::random_plane(rng, n, m);
    const double omega = gf::omega_value(w, p);
    if (omega <= gf::kGraphicalOmegaFloor) continue;
    const bool in_xi = gf::xi_membership_lambda(p, w.base).is_member;
    for (long d = 0; d < directions; ++d) {
      const gf::TangentMatrix dir = gf::random_unit_tangent(rng, p);
      const double analytic = gf::ln_omega_second_derivative(w, dir);
      const double s_minus = std::log(gf::omega_value(w, gf::geodesic(dir, -h)));
      const double s_plus = std::log(gf::omega_value(w, gf::geodesic(dir, h)));
      const double fd = (s_plus - 2.0 * std::log(omega) + s_minus) / (h * h);
      const double rel = std::abs(analytic - fd) / std::max(std::abs(fd), 1.0);
      worst_rel = std::max(worst_rel, rel);
      if (in_xi) worst_inside = std::max(worst_inside, analytic);
      report.row({static_cast<double>(k), static_cast<double>(d), omega, static_cast<double>(in_xi),
                  analytic, fd, rel});
    }
    ++k;
  }
  report.probe(upper_bound("finite_difference", worst_rel, get_positive(cfg, "tolerances.hessian", 1e-5)));
  if (std::isfinite(worst_inside)) report.probe(upper_bound("sign_inside_xi", worst_inside, 1e-10));
}

void run_boundary_scan(const json& cfg, Report& report) {
  const auto [n, m] = get_dims(cfg);
  if (n < 2 || m < 2) config_error("boundary-scan needs n >= 2 and m >= 2");
  const long samples = get_count(cfg, "scan.samples");
  const double h = get_positive(cfg, "scan.fd_step", 1e-4);
  gf::Rng rng(get_seed(cfg));
  std::uniform_real_distribution<double> u(1.0, 3.0);
  double max_f1 = -std::numeric_limits<double>::infinity(), max_f2 = max_f1, fd_err = 0.0;
  for (long k = 0; k < samples; ++k) {
    const gf::Plane q = gf::random_plane(rng, n, m);
    const double x = u(rng);
    std::vector<double> lambdas{x, 1.0 / x};
    for (int i = 2; i < std::min(n, m); ++i) {
      lambdas.push_back(std::uniform_real_distribution<double>(0.0, 1.0 / x)(rng));
    }
    const gf::Plane p = gf::plane_with_singular_values(rng, q, lambdas);
    const gf::BoundarySetup setup = gf::boundary_setup(p, q);
    const auto [i, j] = setup.pair;
    // Directions with vanishing first variation.
    Matrix mu = gf::gaussian_matrix(rng, n, m);
    mu(j, j) = -mu(i, i);
    mu.normalize();
    const Matrix r1 = p.frame().transpose() * setup.frame.tangent;
    const Matrix r2 = p.complement().transpose() * setup.frame.normal;
    const gf::BoundaryVariation v =
        gf::boundary_second_variation(p, q, gf::TangentMatrix(p, r1 * mu * r2.transpose()));
    const auto f = [&](double s) { return gf::boundary_extension_value(setup, v.mu, s); };
    const double f_plus = f(h), f_zero = f(0.0), f_minus = f(-h);
    const double fd1 = (f_plus - f_minus) / (2.0 * h);
    const double fd2 = (f_plus - 2.0 * f_zero + f_minus) / (h * h);
    max_f1 = std::max(max_f1, v.f_prime);
    max_f2 = std::max(max_f2, v.f_double_prime);
    fd_err = std::max({fd_err, std::abs(v.f_prime - fd1), std::abs(v.f_double_prime - fd2)});
    report.row({static_cast<double>(k), x, v.f_value, v.f_prime, v.f_double_prime, fd1, fd2});
  }
  report.probe(upper_bound("f_prime", max_f1, 1e-10));
  report.probe(upper_bound("f_double_prime", max_f2, 1e-10));
  report.probe(upper_bound("finite_difference", fd_err, get_positive(cfg, "tolerances.boundary_fd", 1e-5)));
}

gf::ProbeSet parse_probes(const json& cfg) {
  gf::ProbeSet probes;
  const json* list = lookup(cfg, "probes");
  if (!list) return probes;
  if (!list->is_array()) config_error("'probes' must be a list");
  for (const json& item : *list) {
    if (!item.is_string()) config_error("'probes' entries must be strings");
    const std::string name = item.get<std::string>();
    if (name == "thmA") probes.thm_a = true;
    else if (name == "volume_law") probes.volume_law = true;
    else if (name == "corA") probes.cor_a = true;
    else if (name == "identity22") probes.identity22 = true;
    else if (name == "lagrangian") probes.lagrangian = true;
    else if (name == "min_omega") probes.min_omega = true;
    else config_error("unknown probe '" + name + "'");
  }
  return probes;
}

void run_flow_command(const json& cfg, Report& report) {
  gf::PresetSpec preset{get_string(cfg, "flow.preset"), {}};
  if (const json* params = lookup(cfg, "flow.preset_params")) {
    if (!params->is_object()) config_error("'flow.preset_params' must be an object");
    for (const auto& [k, v] : params->items()) {
      if (!v.is_number()) config_error("preset parameter '" + k + "' must be a number");
      preset.params[k] = v.get<double>();
    }
  }
  const bool has_dims = lookup(cfg, "n") || lookup(cfg, "m");
  const auto requested = has_dims ? get_dims(cfg) : std::pair<int, int>{0, 0};
  if (preset.name == "plane" && !has_dims) config_error("preset 'plane' needs 'n' and 'm'");
  const auto [n, m] = gf::preset_dimensions(preset.name, requested.first, requested.second);
  if (has_dims && (n != requested.first || m != requested.second)) {
    config_error("preset '" + preset.name + "' has (n, m) = (" + std::to_string(n) + ", " +
                 std::to_string(m) + ")");
  }
  std::vector<int> res{static_cast<int>(get_count(cfg, "grid.N1"))};
  if (n == 2) res.push_back(static_cast<int>(get_count(cfg, "grid.N2")));

  gf::FlowRunConfig run;
  run.dt = get_positive(cfg, "flow.dt");
  run.t_end = get_positive(cfg, "flow.t_end");
  run.cfl_factor = get_positive(cfg, "flow.cfl_factor", gf::kDefaultCflFactor);
  run.record_every = get_count(cfg, "flow.record_every", 1);
  run.halt_volume_density = get_positive(cfg, "flow.halt_volume_density", 1e-4);
  run.probes = parse_probes(cfg);
  if (run.probes.lagrangian && (n != 2 || m != 2)) config_error("probe 'lagrangian' needs (n, m) = (2, 2)");
  // Omega is taken against the coordinate n-plane: every graph preset is a
  // graph over it.
  const gf::OmegaForm form{gf::coordinate_plane(n, m)};
  if (run.probes.cor_a || run.probes.identity22 || run.probes.min_omega) run.omega = form;

  const gf::FlowState initial(0.0, gf::make_preset(preset, n, m, res));
  const gf::FlowRunResult result = gf::run_flow(initial, run, [&](const gf::DiagnosticsRecord& r) {
    report.row({r.time, r.total_area, r.min_omega, r.max_thm_a_residual, r.max_volume_law_residual,
                r.max_cor_a_value, r.max_identity22_residual, r.max_lagrangian_defect, r.mean_radius});
  });
  report.set_extra("halted_early", result.halted_early);
  report.set_extra("steps_taken", result.steps_taken);

  const auto& recs = result.records;
  const auto max_field = [&](double gf::DiagnosticsRecord::*field) {
    double v = 0.0;
    for (std::size_t k = 1; k < recs.size(); ++k) v = std::max(v, recs[k].*field);
    return v;
  };
  const auto tol = [&](const std::string& key, double fallback) {
    return get_positive(cfg, "tolerances." + key, fallback);
  };
  const gf::ProbeSet& p = run.probes;
  if (p.thm_a) report.probe(upper_bound("thmA", max_field(&gf::DiagnosticsRecord::max_thm_a_residual), tol("thmA", 1e-3)));
  if (p.volume_law) {
    report.probe(upper_bound("volume_law", max_field(&gf::DiagnosticsRecord::max_volume_law_residual),
                             tol("volume_law", 1e-4)));
  }
  if (p.cor_a) {
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < recs.size(); ++k) v = std::max(v, recs[k].max_cor_a_value);
    if (recs.size() < 2) v = 0.0;
    report.probe(upper_bound("corA", v, tol("corA", 1e-2)));
  }
  if (p.identity22) {
    report.probe(upper_bound("identity22", max_field(&gf::DiagnosticsRecord::max_identity22_residual),
                             tol("identity22", 1e-3)));
  }
  if (p.lagrangian) {
    double peak = 0.0;
    for (const auto& r : recs) peak = std::max(peak, r.max_lagrangian_defect);
    const double initial_defect = recs.front().max_lagrangian_defect;
    report.probe(upper_bound("lagrangian", peak, tol("lagrangian", 10.0 * initial_defect)));
  }
  if (p.min_omega) {
    std::vector<double> series;
    for (const auto& r : recs) series.push_back(r.min_omega);
    report.probe(upper_bound("min_omega_drop", gf::largest_drop(series), tol("min_omega", 1e-4)));
  }
}

struct Command {
  std::string name;
  std::vector<std::string> columns;
  void (*run)(const json&, Report&);
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"geodesic", {"sample", "s", "distance", "ode_vs_closed_form"}, run_geodesic},
      {"xi",
       {"sample", "omega", "max_pair_product", "sigma_min", "lambda_member", "sigma_member", "agree"},
       run_xi},
      {"hessian-scan", {"sample", "direction", "omega", "in_xi", "analytic", "finite_difference", "rel_error"},
       run_hessian_scan},
      {"boundary-scan", {"sample", "lambda_1", "f", "f_prime", "f_double_prime", "fd_f_prime", "fd_f_double_prime"},
       run_boundary_scan},
      {"flow",
       {"t", "area", "min_omega", "max_thmA", "max_vol_law", "max_corA", "max_identity22",
        "max_lagrangian", "mean_radius"},
       run_flow_command},
  };
  return table;
}

int execute(const std::string& command, const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
  std::ifstream in(config_path);
  if (!in) config_error("cannot read config '" + config_path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
  if (!cfg.is_object()) config_error("config must be an object");
  if (const json* c = lookup(cfg, "command"); c && (!c->is_string() || c->get<std::string>() != command)) {
    config_error("config command '" + c->dump() + "' does not match '" + command + "'");
  }
  cfg["command"] = command;
  if (seed) {
    if (!cfg.contains("scan") || !cfg["scan"].is_object()) cfg["scan"] = json::object();
    cfg["scan"]["seed"] = *seed;
  }

  const Command* cmd = nullptr;
  for (const Command& c : commands()) {
    if (c.name == command) cmd = &c;
  }
  const std::string hash = hex64(fnv1a(cfg.dump()));
  Report report(cmd->columns, hash);
  cmd->run(cfg, report);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  report.write_csv(dir / get_string(cfg, "out.csv", command + ".csv"));
  report.write_json(dir / get_string(cfg, "out.json", command + ".json"), cfg, command);

  for (const Probe& p : report.probes()) {
    std::printf("%s %s: %s (tolerance %s)\n", p.pass ? "pass" : "FAIL", p.name.c_str(),
                num(p.value).c_str(), num(p.tolerance).c_str());
  }
  return report.pass() ? kExitPass : kExitProbeFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grassmannian geometry and mean curvature flow diagnostics"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "directory for report files");
  app.add_option("--seed", seed, "sampling seed, overrides scan.seed");
  for (const Command& c : commands()) app.add_subcommand(c.name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  try {
    return execute(app.get_subcommands().front()->get_name(), config_path, out_dir, seed);
  } catch (const gf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case gf::ErrorKind::kConfigError:
      case gf::ErrorKind::kCflViolation:
      case gf::ErrorKind::kGridMismatch:
      case gf::ErrorKind::kDimensionMismatch:
        return kExitConfigError;
      default:
        return kExitProbeFailure;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }
}
