#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

#include "gswf/chirp_oracle.hpp"
#include "gswf/config.hpp"
#include "gswf/propagator.hpp"
#include "gswf/stft.hpp"
#include "gswf/wf_estimator.hpp"
#include "gswf/wf_relation.hpp"

namespace gswf::cli {

namespace fs = std::filesystem;

struct RunOptions {
  fs::path out;
  std::uint64_t seed = 0;
  int threads = 0;
};

// Exit status of a finished command: 0 when every check passed, 1 otherwise.
using Status = int;

// Files written by a command. On failure everything listed is removed, and the
// output directory too when this run created it.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_ = true;
    }
  }
  fs::path path(const std::string& name) {
    const fs::path p = dir_ / name;
    if (p.has_parent_path() && !fs::exists(p.parent_path())) {
      fs::create_directories(p.parent_path());
      dirs_.push_back(p.parent_path());
    }
    files_.push_back(p);
    return p;
  }
  void text(const std::string& name, const std::string& body) {
    std::ofstream os(path(name), std::ios::binary);
    if (!os) throw Error("cannot write " + (dir_ / name).string());
    os << body;
  }
  void discard() noexcept {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) fs::remove(*it, ec);
    if (created_) fs::remove_all(dir_, ec);
  }

 private:
  fs::path dir_;
  bool created_ = false;
  std::vector<fs::path> files_;
  std::vector<fs::path> dirs_;
};

// ---- config readers --------------------------------------------------------

struct SignalHolder {
  std::optional<SampledSignal> sampled;
  std::optional<AnalyticSignal> analytic;
  SignalRef ref() const {
    if (sampled) return &*sampled;
    return &*analytic;
  }
};

// A polynomial is either {"dim", "coeffs": [{"alpha", "c"}]} or a plain array
// of univariate coefficients c0, c1, ...
inline PolynomialData read_polynomial(Config& c, const std::string& path) {
  const auto& j = c.raw(path);
  return Config::tagged(path, [&] {
    if (j.is_array()) {
      std::vector<double> co;
      for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError("coefficient arrays hold numbers");
        co.push_back(v.get<double>());
      }
      if (co.empty()) throw ConfigError("empty coefficient array");
      return PolynomialData::univariate(co);
    }
    try {
      return PolynomialData::from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(e.what());
    }
  });
}

inline AnisoIndex read_index(Config& c, std::optional<ExactIndex>* exact = nullptr) {
  auto part = [&](const std::string& key) -> std::pair<double, std::optional<Rational>> {
    const std::string path = "index." + key;
    const auto& j = c.raw(path);
    if (j.is_number()) return {j.get<double>(), std::nullopt};
    if (j.is_string()) {
      const auto r = Config::tagged(path, [&] { return Rational::parse(j.get<std::string>()); });
      return {r.value(), r};
    }
    Config::fail(path, "expected a number or a \"p/q\" string");
  };
  const auto [t, rt] = part("t");
  const auto [s, rs] = part("s");
  if (!(t > 0.5) || !(s > 0.5)) Config::fail("index", "needs t > 1/2 and s > 1/2");
  if (!(t + s > 1.0)) Config::fail("index", "needs t + s > 1");
  if (exact) {
    if (rt && rs) *exact = ExactIndex{*rt, *rs};
    else exact->reset();
  }
  return AnisoIndex(t, s);
}

inline WindowSpec read_window(Config& c) { return WindowSpec{c.positive("window.width", 1.0), true}; }

inline SignalHolder read_signal(Config& c, const std::string& p, bool allow_analytic) {
  const std::string kind =
      c.choice(p + ".kind", {"gaussian", "chirp", "windowed_chirp", "constant_one", "delta", "file"});
  const bool analytic = c.boolean(p + ".analytic", false);
  if (analytic && !allow_analytic) Config::fail(p + ".analytic", "this command needs a sampled signal");
  SignalHolder h;
  if (kind == "file") {
    const std::string path = c.string(p + ".path");
    h.sampled = Config::tagged(p + ".path", [&] { return read_signal_csv(path); });
    return h;
  }
  if (analytic) {
    if (kind == "windowed_chirp") Config::fail(p + ".kind", "windowed_chirp has no analytic form");
    const int dim = c.integer(p + ".dim", 1);
    h.analytic = Config::tagged(p, [&] {
      if (kind == "gaussian") return AnalyticSignal::gaussian(c.positive(p + ".width", 1.0), dim);
      if (kind == "constant_one") return AnalyticSignal::constant_one(dim);
      if (kind == "delta") return AnalyticSignal::dirac_delta(dim);
      return AnalyticSignal::chirp(read_polynomial(c, p + ".phase"));
    });
    return h;
  }
  if (kind == "delta") Config::fail(p + ".kind", "the delta has no sampled form; set analytic: true");
  const int n = c.integer(p + ".n");
  const double dx = c.positive(p + ".dx");
  Config::tagged(p + ".n", [&] { return SampledSignal(1, n, dx); });
  if (kind == "gaussian") {
    const int dim = c.integer(p + ".dim", 1);
    const double width = c.positive(p + ".width", 1.0);
    h.sampled = make_gaussian(dim, n, dx, width);
  } else if (kind == "constant_one") {
    h.sampled = sample(AnalyticSignal::constant_one(c.integer(p + ".dim", 1)), n, dx);
  } else if (kind == "chirp") {
    h.sampled = make_chirp(read_polynomial(c, p + ".phase"), n, dx);
  } else {
    const auto phase = read_polynomial(c, p + ".phase");
    h.sampled = make_windowed_chirp(phase, n, dx, c.positive(p + ".envelope"));
  }
  return h;
}

inline std::optional<Reach> read_reach(Config& c, const std::string& p) {
  if (!c.has(p)) return std::nullopt;
  return Reach{c.positive(p + ".x_max"), c.positive(p + ".xi_max")};
}

inline EstimatorOptions read_estimator(Config& c, const RunOptions& run, const std::string& p = "estimator") {
  EstimatorOptions o;
  o.sphere_samples = c.integer(p + ".sphere_samples", o.sphere_samples);
  o.n_lambda = c.integer(p + ".n_lambda", o.n_lambda);
  o.lambda_min = c.positive(p + ".lambda_min", o.lambda_min);
  if (c.has(p + ".lambda_cap")) o.lambda_cap = c.positive(p + ".lambda_cap");
  o.r_threshold = c.positive(p + ".r_threshold", o.r_threshold);
  o.floor = c.positive(p + ".floor", o.floor);
  o.neighborhood = c.boolean(p + ".neighborhood", o.neighborhood);
  o.min_span = c.positive(p + ".min_span", o.min_span);
  o.reach = read_reach(c, p + ".reach");
  o.threads = run.threads;
  if (o.sphere_samples < 90) Config::fail(p + ".sphere_samples", "must be at least 90");
  if (o.n_lambda < 8) Config::fail(p + ".n_lambda", "must be at least 8");
  if (!(o.min_span > 1.0)) Config::fail(p + ".min_span", "must exceed 1");
  return o;
}

inline nlohmann::json report_base(const Config& c, const std::string& command, const RunOptions& run) {
  nlohmann::json config = c.resolved();
  config["seed"] = run.seed;
  return {{"command", command}, {"version", kVersion}, {"config", config}};
}

inline nlohmann::json directions_json(const std::vector<SphereDirection>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& z : v) a.push_back(z.z);
  return a;
}

// ---- commands ---------------------------------------------------------------

inline Status cmd_stft(Config& c, Outputs& out, const RunOptions& run) {
  const auto sig = read_signal(c, "signal", false);
  const auto w = read_window(c);
  const int stride = c.integer("stride", 4);
  const SampledSignal& u = *sig.sampled;
  if (stride < 1 || u.n % stride != 0) Config::fail("stride", "must be a positive divisor of signal.n");
  std::optional<SignalHolder> partner;
  if (c.has("partner")) partner = read_signal(c, "partner", false);
  const SampledSignal& f = partner ? *partner->sampled : u;
  if (f.n != u.n || f.dx != u.dx || f.dim != u.dim) Config::fail("partner", "must share the grid of signal");

  const StftGrid vu = stft_grid(u, w, stride, run.threads);
  const StftGrid vf = partner ? stft_grid(f, w, stride, run.threads) : vu;
  const double moyal = std::abs(l2_inner(u, f) - stft_inner(vu, vf));
  const SampledSignal back = istft(vu, w);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    num += std::norm(back.values[k] - u.values[k]);
    den += std::norm(u.values[k]);
  }
  write_stft_csv(vu, out.path("stft.csv").string());
  auto rep = report_base(c, "stft", run);
  rep["moyal_error"] = moyal;
  rep["inversion_error"] = den > 0 ? std::sqrt(num / den) : 0.0;
  rep["l2_norm"] = u.l2_norm();
  rep["grid"] = {{"positions", vu.n_pos()}, {"frequencies", vu.n}, {"position_spacing", vu.pos_spacing()},
                 {"frequency_spacing", vu.dxi()}};
  out.text("report.json", format_json(rep));
  return 0;
}

inline void write_profiles(Outputs& out, const SignalRef& u, const WindowSpec& w, const AnisoIndex& idx,
                           const WFEstimate& est, const EstimatorOptions& opt, const std::string& which) {
  if (which == "none") return;
  std::vector<SphereDirection> dirs;
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < est.entries.size(); ++k) {
    if (which == "all" || est.entries[k].singular) {
      dirs.push_back(est.entries[k].dir);
      ids.push_back(k);
    }
  }
  const auto profs = wf_profiles(u, w, idx, dirs, opt, est.reach);
  for (std::size_t i = 0; i < profs.size(); ++i) {
    std::ostringstream name;
    name << "profiles/dir_" << std::setw(5) << std::setfill('0') << ids[i] << ".csv";
    write_profile_csv(profs[i], out.path(name.str()).string());
  }
}

inline Status cmd_wf(Config& c, Outputs& out, const RunOptions& run) {
  const auto sig = read_signal(c, "signal", true);
  const auto w = read_window(c);
  const auto idx = read_index(c);
  auto opt = read_estimator(c, run);
  const int d = signal_dim(sig.ref());
  if (d == 2) opt.directions = sphere3_directions(c.integer("estimator.directions", 3500));
  else if (d > 2) Config::fail("signal.dim", "estimates are supported for one and two variables");
  const std::string which = c.choice("profiles", {"singular", "all", "none"}, "singular");
  const WFEstimate est = estimate_wf(sig.ref(), w, idx, opt);
  write_profiles(out, sig.ref(), w, idx, est, opt, which);
  auto rep = report_base(c, "wf", run);
  rep["estimate"] = to_json(est);
  rep["singular_directions"] = directions_json(est.singular_directions());
  out.text("wf.json", format_json(rep));
  return 0;
}

inline Status cmd_chirp_verify(Config& c, Outputs& out, const RunOptions& run) {
  const auto phase = read_polynomial(c, "phase");
  if (phase.dim() != 1) Config::fail("phase", "chirp verification runs in one variable");
  std::optional<ExactIndex> exact;
  const auto idx = read_index(c, &exact);
  const auto w = read_window(c);
  const auto opt = read_estimator(c, run);
  const double tol = c.positive("tolerance", 0.09);
  const std::string mode = c.choice("mode", {"analytic", "sampled"}, "analytic");
  const bool control = c.boolean("gaussian_control", true);
  SignalHolder sig, gauss;
  if (mode == "analytic") {
    sig.analytic = AnalyticSignal::chirp(phase);
    gauss.analytic = AnalyticSignal::gaussian(1.0);
  } else {
    const int n = c.integer("grid.n");
    const double dx = c.positive("grid.dx");
    Config::tagged("grid", [&] { return SampledSignal(1, n, dx); });
    sig.sampled = make_chirp(phase, n, dx);
    gauss.sampled = make_gaussian(1, n, dx, 1.0);
  }
  const WFPrediction pred = predict_chirp_wf(phase, idx, exact);
  const WFEstimate est = estimate_wf(sig.ref(), w, idx, opt);
  const WFComparison cmp = compare_wf(est, pred, tol);
  bool pass = cmp.pass;
  auto rep = report_base(c, "chirp-verify", run);
  if (control) {
    const WFEstimate g = estimate_wf(gauss.ref(), w, idx, opt);
    rep["gaussian_control_singular"] = g.singular_count();
    pass = pass && g.singular_count() == 0;
  }
  rep["prediction"] = to_json(pred);
  rep["comparison"] = to_json(cmp);
  rep["max_angle_error"] = cmp.max_angle_error;
  rep["estimate"] = to_json(est);
  rep["pass"] = pass;
  out.text("report.json", format_json(rep));
  return pass ? 0 : 1;
}

inline Status cmd_propagate_verify(Config& c, Outputs& out, const RunOptions& run) {
  const auto sig = read_signal(c, "signal", false);
  const auto spec = Config::tagged("evolution", [&] { return EvolutionSpec::from_json(c.raw("evolution")); });
  const auto idx = read_index(c);
  const auto w = read_window(c);
  auto opt = read_estimator(c, run);
  const auto reach_out = read_reach(c, "output_reach");
  const double tol = c.positive("tolerance", 0.09);
  const SampledSignal& u0 = *sig.sampled;
  if (spec.symbol.dim() != u0.dim) Config::fail("evolution.symbol", "dimension differs from the signal");
  if (u0.dim != 1) Config::fail("signal.dim", "propagation checks run in one variable");

  const SampledSignal ut = propagate(u0, spec);
  const WFEstimate before = estimate_wf(&u0, w, idx, opt);
  if (reach_out) opt.reach = reach_out;
  const WFEstimate after = estimate_wf(&ut, w, idx, opt);
  const auto transported = predict_transport(before.singular_directions(), spec, idx);
  const auto found = after.singular_directions();
  const double fwd = directed_set_angle(found, transported);
  const double bwd = directed_set_angle(transported, found);
  const bool pass = fwd <= tol && bwd <= tol;

  auto b = report_base(c, "propagate-verify", run);
  b["estimate"] = to_json(before);
  out.text("before.json", format_json(b));
  auto a = report_base(c, "propagate-verify", run);
  a["estimate"] = to_json(after);
  out.text("after.json", format_json(a));
  auto rep = report_base(c, "propagate-verify", run);
  rep["transported"] = directions_json(transported);
  rep["evolved_singular"] = directions_json(found);
  rep["evolved_in_transported"] = fwd;
  rep["transported_in_evolved"] = bwd;
  rep["norm_ratio"] = ut.l2_norm() / u0.l2_norm();
  rep["pass"] = pass;
  out.text("report.json", format_json(rep));
  return pass ? 0 : 1;
}

inline Status cmd_kernel_check(Config& c, Outputs& out, const RunOptions& run) {
  const auto spec = Config::tagged("evolution", [&] { return EvolutionSpec::from_json(c.raw("evolution")); });
  if (spec.symbol.dim() != 1) Config::fail("evolution.symbol", "kernels are built for one-variable symbols");
  const int n = c.integer("grid.n");
  const double dx = c.positive("grid.dx");
  Config::tagged("grid", [&] { return SampledSignal(1, n, dx); });
  std::optional<double> wm;
  if (c.has("mollifier_width")) wm = c.positive("mollifier_width");
  const bool halving = c.boolean("mollifier_halving", true);
  const auto idx = read_index(c);
  const auto w = read_window(c);
  KernelEstimatorOptions ko;
  ko.base = read_estimator(c, run);
  ko.coarse_directions = c.integer("kernel.coarse_directions", ko.coarse_directions);
  ko.max_directions = c.integer("kernel.max_directions", ko.max_directions);
  ko.refine_per_singular = c.integer("kernel.refine_per_singular", ko.refine_per_singular);
  ko.seed = run.seed;
  const double eps = c.positive("eps_angle", 0.05);
  if (ko.coarse_directions < 16) Config::fail("kernel.coarse_directions", "must be at least 16");
  if (ko.max_directions < ko.coarse_directions) Config::fail("kernel.max_directions", "must be >= coarse_directions");

  const auto ks = kernel_signal(spec, n, dx, wm);
  const WFEstimate est = estimate_kernel_wf(ks.kernel, w, idx, ko);
  const auto g = check_graph_condition(est, eps);
  const auto cone = cone_constant(est, idx);
  auto rep = report_base(c, "kernel-check", run);
  rep["mollifier_width"] = ks.mollifier_width;
  rep["wf1_empty"] = g.wf1_empty;
  rep["wf2_empty"] = g.wf2_empty;
  rep["offenders"] = directions_json(g.offenders);
  rep["cone_constant"] = cone.ok ? nlohmann::json(cone.c) : nlohmann::json("inf");
  if (!cone.ok) rep["cone_failure"] = cone.failure;
  rep["singular_count"] = est.singular_count();
  bool pass = g.wf1_empty && g.wf2_empty && cone.ok;
  if (halving) {
    const auto half = kernel_signal(spec, n, dx, 0.5 * ks.mollifier_width);
    const WFEstimate e2 = estimate_kernel_wf(half.kernel, w, idx, ko);
    const auto c2 = cone_constant(e2, idx);
    const auto g2 = check_graph_condition(e2, eps);
    rep["halved"] = {{"mollifier_width", half.mollifier_width},
                     {"wf1_empty", g2.wf1_empty},
                     {"wf2_empty", g2.wf2_empty},
                     {"cone_constant", c2.ok ? nlohmann::json(c2.c) : nlohmann::json("inf")}};
    pass = pass && g2.wf1_empty && g2.wf2_empty && c2.ok;
  }
  rep["pass"] = pass;
  out.text("report.json", format_json(rep));
  auto e = report_base(c, "kernel-check", run);
  e["estimate"] = to_json(est);
  out.text("estimate.json", format_json(e));
  return pass ? 0 : 1;
}

inline Status cmd_relation(Config& c, Outputs& out, const RunOptions& run) {
  const double tol = c.positive("tolerance", 1e-9);
  const PointSet A = Config::tagged("A", [&] { return point_set_from_json(c.raw("A"), tol); });
  const PointSet B = Config::tagged("B", [&] { return point_set_from_json(c.raw("B"), tol); });
  for (const auto& a : A.points) {
    if (a.dim() % 2 != 0) Config::fail("A", "kernel points need an even number of position coordinates");
    if (!B.empty() && a.dim() != 2 * B.points.front().dim()) Config::fail("B", "dimension must be half that of A");
  }
  auto rep = report_base(c, "relation", run);
  rep["compose"] = to_json(compose(A, B));
  rep["proj_13"] = to_json(proj_13(A));
  rep["proj_2neg4"] = to_json(proj_2neg4(A));
  if (c.has("index")) {
    const auto idx = read_index(c);
    const auto scales = c.numbers("scales", std::vector<double>{0.5, 2.0});
    for (double m : scales) {
      if (!(m > 0.0)) Config::fail("scales", "must be positive");
    }
    rep["B_sconic_closed"] = B.empty() ? true : sconic_closure_check(B, idx, scales);
  }
  out.text("relation.json", format_json(rep));
  return 0;
}

inline Status cmd_seminorm(Config& c, Outputs& out, const RunOptions& run) {
  const auto sig = read_signal(c, "signal", false);
  const auto idx = read_index(c);
  const std::string family = c.choice("family", {"stft", "classical"}, "stft");
  const auto values = c.numbers("values");
  if (values.empty()) Config::fail("values", "needs at least one entry");
  for (double v : values) {
    if (!(v > 0.0)) Config::fail("values", "must be positive");
  }
  const SampledSignal& u = *sig.sampled;
  std::ostringstream csv;
  csv << std::setprecision(17) << (family == "stft" ? "r" : "h") << ",value,divergent\n";
  nlohmann::json rows = nlohmann::json::array();
  auto add = [&](double p, const SeminormResult& r) {
    csv << p << ',' << (r.divergent ? std::string("inf") : (std::ostringstream() << std::setprecision(17) << r.value).str())
        << ',' << (r.divergent ? 1 : 0) << '\n';
    rows.push_back({{"parameter", p}, {"value", r.divergent ? nlohmann::json("inf") : nlohmann::json(r.value)},
                    {"divergent", r.divergent}, {"argmax", r.argmax}});
  };
  if (family == "stft") {
    const auto w = read_window(c);
    const int stride = c.integer("stride", 4);
    if (stride < 1 || u.n % stride != 0) Config::fail("stride", "must be a positive divisor of signal.n");
    const StftGrid V = stft_grid(u, w, stride, run.threads);
    for (double r : values) add(r, stft_seminorm(V, idx, r));
  } else {
    const int order = c.integer("max_order", 4);
    if (order < 0 || order > 8) Config::fail("max_order", "must lie in [0, 8]");
    for (double h : values) add(h, classical_seminorm(u, idx, h, order));
  }
  out.text("seminorm.csv", csv.str());
  auto rep = report_base(c, "seminorm", run);
  rep["family"] = family;
  rep["rows"] = rows;
  out.text("seminorm.json", format_json(rep));
  return 0;
}

}  // namespace gswf::cli
