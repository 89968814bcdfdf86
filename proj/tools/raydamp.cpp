#include "config.hpp"

#include "raydamp/errors.hpp"
#include "raydamp/evolution.hpp"
#include "raydamp/oracle.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace raydamp;
using raydamp::cli::RunConfig;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// NaN and inf are not JSON numbers.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  return f;
}

struct Context {
  RunConfig config;
  fs::path out;
  ShearProfile profile;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

SpectralOptions spectral_options(const RunConfig& c) {
  SpectralOptions o;
  o.n_half = c.grids.nc;
  o.rayleigh.n_uniform = c.grids.n_rayleigh;
  return o;
}

json tolerances(const RunConfig& c) {
  SpectralOptions s = spectral_options(c);
  RepresentationOptions r;
  return {{"rayleigh_tol", s.rayleigh.tol},
          {"rayleigh_max_iter", s.rayleigh.max_iter},
          {"pv_gap_fraction", s.gap_fraction},
          {"degeneracy_threshold", r.degeneracy},
          {"collar_cells", r.collar_cells},
          {"embedding_threshold", 1e-8},
          {"embedding_curvature_tol", 1e-6}};
}

void write_manifest(const Context& ctx, const std::string& command, json runs, json extra = json::object()) {
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  json m = {{"command", command},
            {"versions",
             {{"raydamp", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"compiler", __VERSION__}}},
            {"config", ctx.config.to_json()},
            {"tolerances", tolerances(ctx.config)},
            {"threads", worker_count()},
            {"runs", std::move(runs)},
            {"wall_time_s", wall}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  auto f = open_out(ctx.out / ("manifest_" + command + ".json"));
  f << m.dump(2) << "\n";
}

std::vector<double> uniform_grid(std::size_t n) {
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  return y;
}

json fit_json(const std::vector<double>& t, const std::vector<double>& v, double lo, double hi) {
  try {
    const DecayFit f = decay_fit(t, v, lo, hi);
    return {{"exponent", f.exponent}, {"r_squared", f.r_squared}, {"samples", f.samples}, {"window", {lo, hi}}};
  } catch (const DegenerateSeries& e) {
    return {{"exponent", nullptr}, {"error", e.what()}, {"window", {lo, hi}}};
  }
}

// ---------------------------------------------------------------------------

int cmd_simulate(Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto t = c.sample_times();
  const double lo = std::max(c.t_max / 10.0, t[1]);
  json runs = json::array();
  for (double alpha : c.alpha_list) {
    const std::string tag = alpha_tag(alpha);
    const auto w0 = c.omega0.fn();
    auto orc = oracle_evolution(ctx.profile, alpha, w0, c.grids.n_oracle, t, c.y_probe);
    const bool same_grid = c.grids.ny == c.grids.n_oracle;
    RepresentationOptions ro;
    ro.spectral = spectral_options(c);
    auto rep = build_representation(ctx.profile, alpha, w0, same_grid ? orc.y : uniform_grid(c.grids.ny), ro);
    auto st = representation_evolution(rep, t, c.y_probe);

    const std::string series = "series_alpha" + tag + ".csv";
    const std::string oracle_series = "oracle_series_alpha" + tag + ".csv";
    const std::string snap0 = "snapshot_alpha" + tag + "_t0.csv";
    const std::string snap1 = "snapshot_alpha" + tag + "_tmax.csv";
    {
      auto f = open_out(ctx.out / series);
      write_series_csv(st, f);
    }
    {
      auto f = open_out(ctx.out / oracle_series);
      write_series_csv(orc, f);
    }
    {
      auto f = open_out(ctx.out / snap0);
      write_snapshot_csv(st, 0, f);
    }
    {
      auto f = open_out(ctx.out / snap1);
      write_snapshot_csv(st, t.size() - 1, f);
    }

    double max_rel = NAN;
    if (same_grid) {
      max_rel = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        std::vector<cplx> d(st.y.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = st.psi[k][i] - orc.psi[k][i];
        const double ref = trapezoid_l2(st.y, orc.psi[k]);
        if (ref > 0.0) max_rel = std::max(max_rel, trapezoid_l2(st.y, d) / ref);
      }
    }
    json fV = fit_json(orc.t, orc.norm_V, lo, c.t_max);
    json fV2 = fit_json(orc.t, orc.norm_V2, lo, c.t_max);
    runs.push_back({{"alpha", alpha},
                    {"exponent_V", fV["exponent"]},
                    {"exponent_V2", fV2["exponent"]},
                    {"fit_V", fV},
                    {"fit_V2", fV2},
                    {"fit_V_representation", fit_json(st.t, st.norm_V, lo, c.t_max)},
                    {"oracle_max_relative_difference", number(max_rel)},
                    {"energy_identity_residual", energy_identity_residual(st.y, st.psi.back(), alpha)},
                    {"collar_evaluations", rep.collar_evaluations},
                    {"max_denominator_residual", rep.max_denominator_residual},
                    {"projection_noop", orc.projection_noop},
                    {"files", {series, oracle_series, snap0, snap1}}});
    std::printf("simulate alpha=%s: max relative difference to oracle %s\n", tag.c_str(), g17(max_rel).c_str());
  }
  write_manifest(ctx, "simulate", runs);
  return 0;
}

int cmd_spectral(Context& ctx) {
  const RunConfig& c = ctx.config;
  json runs = json::array();
  for (double alpha : c.alpha_list) {
    const std::string tag = alpha_tag(alpha);
    auto tables = build_spectral_tables(ctx.profile, alpha, spectral_options(c));
    const std::string csv = "spectral_alpha" + tag + ".csv";
    {
      auto f = open_out(ctx.out / csv);
      write_csv(tables, f);
    }
    const auto scan = scan_embedding(tables);
    const std::string report = "embedding_alpha" + tag + ".txt";
    {
      auto f = open_out(ctx.out / report);
      f << "embedding_candidates: [";
      for (std::size_t i = 0; i < scan.candidates.size(); ++i) f << (i ? ", " : "") << g17(scan.candidates[i]);
      f << "]\n";
      f << "min_scaled_AB: " << g17(scan.min_AB) << "\n";
      f << "min_scaled_A2B2: " << g17(scan.min_A2B2) << "\n";
    }
    const auto M = assemble(ctx.profile, alpha, c.grids.n_oracle);
    const auto spec = discrete_spectrum(M);
    auto ev = spec.eigenvalues;
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); });
    const std::string eig = "eigenvalues_alpha" + tag + ".csv";
    {
      auto f = open_out(ctx.out / eig);
      f << "re,im\n";
      for (const cplx& e : ev) f << g17(e.real()) << "," << g17(e.imag()) << "\n";
    }
    runs.push_back({{"alpha", alpha},
                    {"embedding_candidates", scan.candidates},
                    {"min_scaled_AB", scan.min_AB},
                    {"min_scaled_A2B2", scan.min_A2B2},
                    {"oracle_max_abs_imag", spec.max_abs_imag},
                    {"oracle_discrete_count", spec.discrete.size()},
                    {"files", {csv, report, eig}}});
    std::printf("spectral alpha=%s: embedding_candidates: %zu\n", tag.c_str(), scan.candidates.size());
  }
  write_manifest(ctx, "spectral", runs);
  return 0;
}

int cmd_kernels(Context& ctx) {
  const RunConfig& c = ctx.config;
  json runs = json::array();
  VorticityData data{c.omega0.fn()};
  KernelInputs in;
  in.omega_o = data.odd_part();
  in.omega_e = data.even_part();
  in.g_o = c.test_function(Channel::Odd);
  in.g_e = c.test_function(Channel::Even);
  KernelOptions ko;
  ko.spectral = spectral_options(c);
  for (double alpha : c.alpha_list) {
    const std::string tag = alpha_tag(alpha);
    auto kt = build_kernels(ctx.profile, alpha, in, ko);
    const std::string csv = "kernels_alpha" + tag + ".csv";
    {
      auto f = open_out(ctx.out / csv);
      write_csv(kt, f);
    }
    json norms = json::object();
    for (Channel ch : {Channel::Odd, Channel::Even}) {
      const auto n = kernel_norms(kt.c_tilde(), kt.K(ch));
      norms[ch == Channel::Odd ? "odd" : "even"] = {{"L1", n.L1},          {"dL1", n.dL1},
                                                     {"d2L1", n.d2L1},      {"max_abs", n.max_abs},
                                                     {"first_abs", n.first_abs}, {"last_abs", n.last_abs}};
    }
    runs.push_back({{"alpha", alpha}, {"norms", norms}, {"files", {csv}}});
    std::printf("kernels alpha=%s written\n", tag.c_str());
  }
  write_manifest(ctx, "kernels", runs);
  return 0;
}

int cmd_depletion(Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto t = c.sample_times();
  json runs = json::array();
  for (double alpha : c.alpha_list) {
    const std::string tag = alpha_tag(alpha);
    auto s = oracle_evolution(ctx.profile, alpha, c.omega0.fn(), c.grids.n_oracle, t, c.y_probe);
    const auto d = depletion_series(s, std::min(10.0, c.t_max / 2.0));
    const std::string csv = "depletion_alpha" + tag + ".csv";
    {
      auto f = open_out(ctx.out / csv);
      f << "t,omega0_abs,omega_probe_abs\n";
      for (std::size_t k = 0; k < d.t.size(); ++k)
        f << g17(d.t[k]) << "," << g17(d.at_zero[k]) << "," << g17(d.at_probe[k]) << "\n";
    }
    const auto [pmin, pmax] = std::minmax_element(d.at_probe.begin(), d.at_probe.end());
    const double p0 = d.at_probe.front();
    runs.push_back({{"alpha", alpha},
                    {"depletion_ratio", number(d.ratio_at_end)},
                    {"fraction_decreasing", d.fraction_decreasing},
                    {"probe_ratio_min", number(*pmin / p0)},
                    {"probe_ratio_max", number(*pmax / p0)},
                    {"files", {csv}}});
    std::printf("depletion alpha=%s: ratio %s\n", tag.c_str(), g17(d.ratio_at_end).c_str());
  }
  write_manifest(ctx, "depletion", runs);
  return 0;
}

int cmd_transport(Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto t = log_times(c.transport_t_min, c.transport_t_max, c.t_samples);
  json runs = json::array();
  const auto w0 = c.omega0.fn();
  const auto eta = c.eta.fn();
  for (double alpha : c.alpha_list) {
    const std::string tag = alpha_tag(alpha);
    std::vector<cplx> v(t.size());
    parallel_for(t.size(), [&](std::size_t k) { v[k] = transport_reference(ctx.profile, w0, eta, alpha, t[k]); });
    std::vector<double> mag(t.size());
    const std::string csv = "transport_alpha" + tag + ".csv";
    {
      auto f = open_out(ctx.out / csv);
      f << "t,abs_pairing,re_pairing,im_pairing\n";
      for (std::size_t k = 0; k < t.size(); ++k) {
        mag[k] = std::abs(v[k]);
        f << g17(t[k]) << "," << g17(mag[k]) << "," << g17(v[k].real()) << "," << g17(v[k].imag()) << "\n";
      }
    }
    json fit = fit_json(t, mag, c.transport_t_min, c.transport_t_max);
    runs.push_back({{"alpha", alpha}, {"transport_exponent", fit["exponent"]}, {"fit", fit}, {"files", {csv}}});
    std::printf("transport alpha=%s: exponent %s\n", tag.c_str(), fit["exponent"].dump().c_str());
  }
  write_manifest(ctx, "transport", runs);
  return 0;
}

// ---------------------------------------------------------------------------

struct Report {
  json items = json::array();
  bool ok = true;

  void add(const std::string& name, bool pass, const std::string& detail) {
    ok = ok && pass;
    items.push_back({{"invariant", name}, {"pass", pass}, {"detail", detail}});
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  }
};

int cmd_verify(Context& ctx) {
  const RunConfig& c = ctx.config;
  Report r;
  const auto& pv = ctx.profile.validation();
  r.add("profile class", pv.c0 > 0.0 && pv.c1 > 0.0, "c0=" + g17(pv.c0) + " c1=" + g17(pv.c1));

  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ua(0.25, 8.0), uc(0.02, 0.98);
  const double u0 = ctx.profile.u0(), u1 = ctx.profile.u1();
  RayleighOptions ropt;
  ropt.n_uniform = c.grids.n_rayleigh;
  double worst_min = INFINITY, worst_fp = 0.0, worst_ric = 0.0, worst_slope = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double alpha = ua(rng);
    const double cr = u0 + uc(rng) * (u1 - u0);
    const auto sol = solve_phi1(ctx.profile, alpha, critical_value(ctx.profile, cr), ropt);
    const auto ld = log_derivatives(ctx.profile, sol, ropt);
    for (const cplx& v : sol.phi1) worst_min = std::min(worst_min, v.real());
    worst_fp = std::max(worst_fp, sol.fixed_point_residual / ropt.tol);
    worst_ric = std::max(worst_ric, ld.riccati_residual / (alpha * alpha));
    worst_slope = std::max(worst_slope, std::abs(ld.slope_at_critical.real() / (alpha * alpha / 3.0) - 1.0));
  }
  r.add("phi1 >= 1", worst_min >= 1.0 - 1e-10, "min phi1 " + g17(worst_min));
  r.add("fixed-point residual", worst_fp < 10.0, "max residual/tol " + g17(worst_fp));
  r.add("Riccati residual", worst_ric < 1e-4, "max residual/alpha^2 " + g17(worst_ric));
  r.add("slope at y_c", worst_slope < 5e-3, "max relative deviation from alpha^2/3 " + g17(worst_slope));

  VorticityData data{c.omega0.fn()};
  KernelInputs in;
  in.omega_o = data.odd_part();
  in.omega_e = data.even_part();
  in.g_o = c.test_function(Channel::Odd);
  in.g_e = c.test_function(Channel::Even);
  KernelOptions ko;
  ko.spectral = spectral_options(c);
  for (double alpha : c.alpha_list) {
    const std::string tag = " (alpha=" + alpha_tag(alpha) + ")";
    auto kt = build_kernels(ctx.profile, alpha, in, ko);
    double a1 = 0.0;
    for (const auto& row : kt.spectral.rows)
      a1 = std::max(a1, std::abs(row.A1 - (u0 - u1 - row.cv.rho * row.II2)));
    r.add("A1 identity" + tag, a1 < 1e-6, "max residual " + g17(a1));
    const auto scan = scan_embedding(kt.spectral);
    r.add("embedding scan" + tag, scan.candidates.empty(), std::to_string(scan.candidates.size()) + " candidates");
    for (Channel ch : {Channel::Odd, Channel::Even}) {
      const auto n = kernel_norms(kt.c_tilde(), kt.K(ch));
      const double end = std::max(n.first_abs, n.last_abs) / std::max(n.max_abs, 1e-300);
      r.add(std::string("kernel endpoints ") + (ch == Channel::Odd ? "odd" : "even") + tag,
            n.max_abs == 0.0 || end < 1e-3, "max endpoint/max " + g17(end));
    }

    auto orc = oracle_evolution(ctx.profile, alpha, data.omega0, c.grids.n_oracle, {0.0}, c.y_probe);
    const auto M = assemble(ctx.profile, alpha, c.grids.n_oracle);
    Eigen::VectorXcd psi = Eigen::Map<const Eigen::VectorXcd>(orc.psi[0].data() + 1, M.interior());
    const auto vn = velocity_norms(M, psi);
    const double energy = std::abs(vn.V - vn.V_energy) / std::max(vn.V, 1e-300);
    r.add("energy identity" + tag, energy < 1e-6, "relative difference " + g17(energy));

    RepresentationOptions ro;
    ro.spectral = spectral_options(c);
    const auto rep = build_representation(ctx.profile, alpha, data.omega0, orc.y, ro);
    r.add("denominator identity" + tag, rep.max_denominator_residual < 1e-8,
          "max residual " + g17(rep.max_denominator_residual));
    const auto psi0 = psi_pointwise(rep, 0.0);
    std::vector<cplx> d(psi0.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = psi0[i] - orc.psi[0][i];
    const double rel = trapezoid_l2(orc.y, d) / std::max(trapezoid_l2(orc.y, orc.psi[0]), 1e-300);
    r.add("t = 0 reconstruction" + tag, rel < 1e-3, "relative L2 difference " + g17(rel));
  }
  {
    auto f = open_out(ctx.out / "verify_report.json");
    f << json{{"pass", r.ok}, {"invariants", r.items}}.dump(2) << "\n";
  }
  write_manifest(ctx, "verify", json::array(), {{"pass", r.ok}, {"invariants", r.items}});
  return r.ok ? 0 : 1;
}

int cmd_report(const fs::path& dir) {
  std::map<double, json> rows;
  bool any = false;
  auto absorb = [&](const std::string& command, const std::vector<std::pair<std::string, std::string>>& fields) {
    const fs::path p = dir / ("manifest_" + command + ".json");
    if (!fs::exists(p)) return;
    std::ifstream in(p);
    json m = json::parse(in);
    any = true;
    for (const auto& run : m.at("runs")) {
      const double a = run.at("alpha").get<double>();
      json& row = rows[a];
      row["alpha"] = a;
      for (const auto& [from, to] : fields) row[to] = run.value(from, json(nullptr));
    }
  };
  absorb("simulate", {{"exponent_V", "exponent_V"}, {"exponent_V2", "exponent_V2"}});
  absorb("transport", {{"transport_exponent", "transport_exponent"}});
  absorb("depletion", {{"depletion_ratio", "depletion_ratio"}});
  if (!any) throw MissingRun("no manifests in '" + dir.string() + "'; run simulate, transport or depletion first");

  json table = json::array();
  std::ofstream csv(dir / "summary_long.csv");
  csv << "alpha,quantity,value\n";
  for (auto& [a, row] : rows) {
    for (const char* key : {"exponent_V", "exponent_V2", "transport_exponent", "depletion_ratio"}) {
      if (!row.contains(key)) row[key] = nullptr;
      if (!row[key].is_null()) csv << g17(a) << "," << key << "," << g17(row[key].get<double>()) << "\n";
    }
    table.push_back(row);
  }
  std::ofstream(dir / "summary.json") << json{{"rows", table}}.dump(2) << "\n";
  std::printf("report: %zu rows\n", table.size());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inviscid damping experiments for symmetric shear flows"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  const std::vector<std::string> names = {"simulate", "spectral", "kernels", "depletion", "transport", "verify",
                                          "report"};
  for (const auto& n : names) {
    auto* sub = app.add_subcommand(n);
    sub->add_option("--config", config_path, "JSON run configuration")->required(n != "report");
    sub->add_option("--out", out_dir, "output directory (overrides config.output)");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (command == "report") {
      fs::path dir = out_dir;
      if (dir.empty()) dir = config_path.empty() ? fs::path("runs") : fs::path(cli::load_config(config_path).output);
      return cmd_report(dir);
    }
    RunConfig config = cli::load_config(config_path);
    auto profile = [&] {
      try {
        return build_profile(config.profile);
      } catch (const Error& e) {
        throw ConfigError(std::string("config.profile: ") + e.what());
      }
    }();
    const fs::path out = out_dir.empty() ? fs::path(config.output) : fs::path(out_dir);
    Context ctx{std::move(config), out, std::move(profile)};
    fs::create_directories(ctx.out);
    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "spectral") return cmd_spectral(ctx);
    if (command == "kernels") return cmd_kernels(ctx);
    if (command == "depletion") return cmd_depletion(ctx);
    if (command == "transport") return cmd_transport(ctx);
    return cmd_verify(ctx);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
