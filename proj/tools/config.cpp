#include "config.hpp"

#include "raydamp/errors.hpp"

#include <fstream>

namespace raydamp::cli {

using nlohmann::json;

std::vector<cplx> PolyData::expanded() const {
  std::vector<cplx> p(std::max(re.size(), im.size()), cplx{});
  for (std::size_t k = 0; k < re.size(); ++k) p[k] += re[k];
  for (std::size_t k = 0; k < im.size(); ++k) p[k] += cplx(0.0, im[k]);
  for (int e = 0; e < envelope; ++e) {
    std::vector<cplx> q(p.size() + 2, cplx{});
    for (std::size_t k = 0; k < p.size(); ++k) {
      q[k] += p[k];
      q[k + 2] -= p[k];
    }
    p = std::move(q);
  }
  return p;
}

ComplexFn PolyData::fn(int derivative) const {
  auto p = expanded();
  for (int d = 0; d < derivative; ++d) {
    if (p.empty()) break;
    std::vector<cplx> q(p.size() > 1 ? p.size() - 1 : 0);
    for (std::size_t k = 1; k < p.size(); ++k) q[k - 1] = static_cast<double>(k) * p[k];
    p = std::move(q);
  }
  return [p](double y) {
    cplx acc{};
    for (std::size_t k = p.size(); k-- > 0;) acc = acc * y + p[k];
    return acc;
  };
}

json PolyData::to_json() const { return {{"re", re}, {"im", im}, {"envelope", envelope}}; }

std::vector<double> RunConfig::sample_times() const {
  std::vector<double> t(t_samples);
  for (std::size_t k = 0; k < t_samples; ++k)
    t[k] = t_max * static_cast<double>(k) / static_cast<double>(t_samples - 1);
  return t;
}

TestFunctionPair RunConfig::test_function(Channel ch) const {
  const PolyData& g = ch == Channel::Odd ? g_odd : g_even;
  return {ch, g.fn(0), g.fn(1), g.fn(2)};
}

json RunConfig::to_json() const {
  return {{"profile", {{"name", profile.name}, {"type", profile.type}, {"coeffs", profile.coeffs}}},
          {"alpha_list", alpha_list},
          {"grids", {{"ny", grids.ny}, {"nc", grids.nc}, {"n_oracle", grids.n_oracle}, {"n_rayleigh", grids.n_rayleigh}}},
          {"t_max", t_max},
          {"t_samples", t_samples},
          {"y_probe", y_probe},
          {"data",
           {{"omega0", omega0.to_json()},
            {"g_odd", g_odd.to_json()},
            {"g_even", g_even.to_json()},
            {"eta", eta.to_json()}}},
          {"transport", {{"t_min", transport_t_min}, {"t_max", transport_t_max}}},
          {"output", output},
          {"seed", seed}};
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config." + path + ": " + what);
}

template <class T>
T read(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path, "wrong type");
  }
}

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

PolyData read_poly(const json& j, const std::string& key, const std::string& path, PolyData fallback) {
  if (!j.contains(key)) return fallback;
  const json& d = j.at(key);
  if (!d.is_object()) fail(path, "expected an object with re/im/envelope");
  PolyData p;
  p.re = read<std::vector<double>>(d, "re", path + ".re", {});
  p.im = read<std::vector<double>>(d, "im", path + ".im", {});
  p.envelope = read<int>(d, "envelope", path + ".envelope", 0);
  if (p.envelope < 0) fail(path + ".envelope", "must be >= 0");
  return p;
}

} // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c;
  if (!j.contains("profile")) fail("profile", "missing");
  const json& p = j.at("profile");
  if (p.is_string()) {
    c.profile.name = p.get<std::string>();
  } else if (p.is_object()) {
    c.profile.name = read<std::string>(p, "name", "profile.name", "");
    c.profile.type = read<std::string>(p, "type", "profile.type", "builtin");
    c.profile.coeffs = read<std::vector<double>>(p, "coeffs", "profile.coeffs", {});
  } else {
    fail("profile", "expected a name or an object");
  }
  if (c.profile.type == "builtin" && c.profile.name.empty()) fail("profile.name", "missing");
  if (c.profile.type != "builtin" && c.profile.type != "poly_even") fail("profile.type", "unknown type");

  c.alpha_list = read<std::vector<double>>(j, "alpha_list", "alpha_list", {1.0});
  if (c.alpha_list.empty()) fail("alpha_list", "empty");
  for (std::size_t i = 0; i < c.alpha_list.size(); ++i)
    if (!(c.alpha_list[i] > 0.0))
      fail("alpha_list[" + std::to_string(i) + "]", "alpha must be > 0 (the evolution formulas require alpha > 0)");

  if (j.contains("grids")) {
    const json& g = j.at("grids");
    c.grids.ny = read<std::size_t>(g, "ny", "grids.ny", c.grids.ny);
    c.grids.nc = read<std::size_t>(g, "nc", "grids.nc", c.grids.nc);
    c.grids.n_oracle = read<std::size_t>(g, "n_oracle", "grids.n_oracle", c.grids.n_oracle);
    c.grids.n_rayleigh = read<std::size_t>(g, "n_rayleigh", "grids.n_rayleigh", c.grids.n_rayleigh);
  }
  if (!power_of_two(c.grids.ny - 1)) fail("grids.ny", "must be 2^k + 1");
  if (!power_of_two(c.grids.n_oracle - 1)) fail("grids.n_oracle", "must be 2^k + 1");
  if (!power_of_two(c.grids.n_rayleigh - 1)) fail("grids.n_rayleigh", "must be 2^k + 1");
  if (!power_of_two(c.grids.nc) || c.grids.nc < 16) fail("grids.nc", "must be 2^k >= 16");

  c.t_max = read<double>(j, "t_max", "t_max", c.t_max);
  if (!(c.t_max > 0.0)) fail("t_max", "must be > 0");
  c.t_samples = read<std::size_t>(j, "t_samples", "t_samples", c.t_samples);
  if (c.t_samples < 16) fail("t_samples", "must be >= 16");
  c.y_probe = read<double>(j, "y_probe", "y_probe", c.y_probe);
  if (!(std::abs(c.y_probe) < 1.0)) fail("y_probe", "must lie in (-1, 1)");

  if (j.contains("data")) {
    const json& d = j.at("data");
    c.omega0 = read_poly(d, "omega0", "data.omega0", c.omega0);
    c.g_odd = read_poly(d, "g_odd", "data.g_odd", c.g_odd);
    c.g_even = read_poly(d, "g_even", "data.g_even", c.g_even);
    c.eta = read_poly(d, "eta", "data.eta", c.eta);
  }
  try {
    c.test_function(Channel::Odd).validate();
  } catch (const ParityViolation& e) {
    fail("data.g_odd", e.what());
  }
  try {
    c.test_function(Channel::Even).validate();
  } catch (const ParityViolation& e) {
    fail("data.g_even", e.what());
  }

  if (j.contains("transport")) {
    const json& t = j.at("transport");
    c.transport_t_min = read<double>(t, "t_min", "transport.t_min", c.transport_t_min);
    c.transport_t_max = read<double>(t, "t_max", "transport.t_max", c.transport_t_max);
  }
  if (!(c.transport_t_min > 0.0 && c.transport_t_max > c.transport_t_min))
    fail("transport", "need 0 < t_min < t_max");
  c.output = read<std::string>(j, "output", "output", c.output);
  c.seed = read<std::uint64_t>(j, "seed", "seed", c.seed);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse_config(j);
}

} // namespace raydamp::cli
