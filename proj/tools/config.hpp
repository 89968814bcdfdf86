#pragma once

#include "raydamp/kernels.hpp"
#include "raydamp/profiles.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace raydamp::cli {

// Polynomial data (re + i im)(y) (1 - y^2)^envelope with exact derivatives.
struct PolyData {
  std::vector<double> re;
  std::vector<double> im;
  int envelope = 0;

  std::vector<cplx> expanded() const;  // plain monomial coefficients
  ComplexFn fn(int derivative = 0) const;
  nlohmann::json to_json() const;
};

struct Grids {
  std::size_t ny = 257;
  std::size_t nc = 256;
  std::size_t n_oracle = 257;
  std::size_t n_rayleigh = 1025;
};

struct RunConfig {
  ProfileDescriptor profile;
  std::vector<double> alpha_list;
  Grids grids;
  double t_max = 100.0;
  std::size_t t_samples = 101;
  double y_probe = 0.6;
  PolyData omega0{{0.02, 1.0}, {}, 2};
  PolyData g_odd{{0.0, 1.0}, {}, 2};
  PolyData g_even{{1.0}, {}, 2};
  PolyData eta{{1.2, 0.0, -1.0}, {}, 0};
  double transport_t_min = 10.0;
  double transport_t_max = 1e4;
  std::string output = "runs";
  std::uint64_t seed = 0;

  std::vector<double> sample_times() const;
  TestFunctionPair test_function(Channel ch) const;
  nlohmann::json to_json() const;
};

// Throws ConfigError with a field path ("profile", "grids.ny", ...).
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

} // namespace raydamp::cli
