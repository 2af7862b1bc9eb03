#pragma once

// Forward voter model perturbations: the nearest-neighbor chain driven by the
// same per-vertex uniforms as the backward net, the Potts parameterization,
// and pointwise decompositions of two further models.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmp/coloring.hpp"
#include "vmp/lattice_net.hpp"

namespace vmp {

/// Characteristic data of one level of a simple (nearest-neighbor) VMP.
struct VmpParams {
  double w = 1.0;
  double b = 0.0;
  double kappa = 0.0;
  ColoringRule noise;  // g, lambda, p

  /// w is set to 1 - b - kappa.
  static VmpParams make(double b, double kappa, BoundaryTable g, ColorDistribution p,
                        ColorDistribution lambda);

  int q() const noexcept { return noise.q(); }
  const BoundaryTable& g() const noexcept { return noise.g; }
  const ColorDistribution& p() const noexcept { return noise.p; }
  const ColorDistribution& lambda() const noexcept { return noise.lambda; }

  /// Throws InvalidProbability / InvalidArgument.
  void validate() const;
};

/// w(1/2 delta_left + 1/2 delta_right) + b g_{left,right} + kappa p.
ColorDistribution transition_distribution(const VmpParams& params, Color left, Color right);

/// Colors of one time slice on one parity sublattice: site x_min + 2i holds
/// colors[i].
struct ColorSlice {
  std::int64_t t = 0;
  std::int64_t x_min = 0;
  std::vector<Color> colors;

  std::int64_t x_max() const noexcept {
    return x_min + 2 * (static_cast<std::int64_t>(colors.size()) - 1);
  }
  bool contains(std::int64_t x) const noexcept {
    return !colors.empty() && x >= x_min && x <= x_max() && (x - x_min) % 2 == 0;
  }
  Color at(std::int64_t x) const;
  Parity parity() const noexcept { return parity_of(Vertex{x_min, t}); }
};

struct ColorField {
  Parity parity = Parity::Odd;
  std::vector<ColorSlice> slices;  // consecutive times

  const ColorSlice& at_time(std::int64_t t) const;
  Color at(const Vertex& v) const { return at_time(v.t).at(v.x); }
};

/// Color of vertex v at the initial time: the leftover uniform of its
/// arrow draw, read through lambda.
Color initial_color(const VmpParams& params, std::uint64_t seed, const Vertex& v);

/// The sublattice sites of [x_lo, x_hi] at time t0, colored by initial_color.
ColorSlice initial_slice(const VmpParams& params, std::int64_t x_lo, std::int64_t x_hi,
                         Parity parity, std::uint64_t seed, std::int64_t t0 = 0);

/// One synchronous update.
///
/// Site (x, t+1) takes the arrow draw of its own keyed uniform: LeftOnly copies
/// x-1, RightOnly copies x+1, Both draws from g_{eta(x-1), eta(x+1)}, None
/// draws from p, the color draw using the leftover uniform. Output covers
/// [x_min+1, x_max-1]; throws WindowError when that is empty.
ColorSlice step(const ColorSlice& slice, const VmpParams& params, std::uint64_t seed);

/// Product-lambda initial slice on [x_lo, x_hi] followed by `steps` updates.
ColorField simulate(const VmpParams& params, std::int64_t x_lo, std::int64_t x_hi,
                    std::int64_t steps, std::uint64_t seed, Parity parity = Parity::Odd);

/// Iterates step from a given initial slice.
ColorField simulate_from(ColorSlice initial, const VmpParams& params, std::int64_t steps,
                         std::uint64_t seed);

/// Every site of an interval (both sublattices) at one time.
struct LineSlice {
  std::int64_t t = 0;
  std::int64_t x_min = 0;
  std::vector<Color> colors;  // site x_min + i
};

/// Same update as step, applied to every site; the two sublattices never mix.
LineSlice step_line(const LineSlice& line, const VmpParams& params, std::uint64_t seed);

/// Smallest base interval at time 0 containing the dependence cones of `points`.
Window dependence_window(std::span<const Vertex> points);

// ---------------------------------------------------------------------------
// Potts

struct PottsRates {
  double w;
  double b;
  double kappa;
};

/// Discrete-time stochastic Potts rates at inverse temperature beta > 0.
PottsRates potts_rates(double beta, int q);

/// Potts rates with uniform g off the diagonal, uniform p and uniform lambda
/// (unless lambda is given).
VmpParams potts_params(double beta, int q);
VmpParams potts_params(double beta, int q, ColorDistribution lambda);

/// Largest |rate(c_i -> c_f) / rate(c_f -> c_i) - exp(-beta dH)| over all
/// (c_l, c_i, c_r, c_f), for the continuous-time chain whose rates are the
/// Potts triple with uniform branching and bulk laws.
double potts_detailed_balance_residual(double beta, int q);

// ---------------------------------------------------------------------------
// General perturbations, evaluated pointwise

/// Law on states {0, ..., q-1}; index = state.
using StateLaw = std::vector<double>;

/// Maps a neighbor offset to the state there.
using Neighborhood = std::function<int(std::int64_t offset)>;

struct GeneralVmpSpec {
  int q = 2;
  double w = 1.0;
  double b = 0.0;
  double kappa = 0.0;
  /// Zero-mean voter kernel: (displacement, weight).
  std::vector<std::pair<std::int64_t, double>> kernel;
  /// Boundary sampling law on N-tuples of displacements.
  std::vector<std::pair<std::vector<std::int64_t>, double>> boundary_q;
  /// Boundary noise g for each N-tuple of states.
  std::function<StateLaw(std::span<const int>)> boundary_g;
  StateLaw bulk;
  /// Adjusts the voter law f; identity when empty.
  std::function<StateLaw(const StateLaw& f)> voter_correction;

  std::size_t arity() const;
  /// Throws InvalidArgument / InvalidProbability.
  void validate() const;

  /// Voter law f(i) = sum_y K(y) [eta(y) = i].
  StateLaw voter_law(const Neighborhood& eta) const;
  StateLaw boundary_law(const Neighborhood& eta) const;
  /// w f' + b B + kappa p, f' the corrected voter law.
  StateLaw transition(const Neighborhood& eta) const;
};

/// Symmetric symbiotic Lotka-Volterra update of a site in state eta_x given
/// the kernel density f1 of state-1 neighbors: the site dies with probability
/// alpha(1 - eps f_{1-eta_x}) and is replaced by a kernel-chosen neighbor.
/// weights()[s] is the probability of state s.
ColorDistribution lotka_volterra_transition(int eta_x, double f1, double alpha, double eps);

/// Voter part (1-alpha) delta_{eta(x)} + alpha K, boundary part with
/// Q = delta_0 x K x K and the two-sided g table, no bulk part.
GeneralVmpSpec lotka_volterra_decomposition(
    double alpha, double eps, std::vector<std::pair<std::int64_t, double>> kernel);

/// Discrete noisy biased voter law on colors {1, 2}.
ColorDistribution noisy_biased_voter_transition(double f1, double alpha, double b_eps,
                                                double kappa_eps);

struct NbvDecomposition {
  double eps;
  double b_eps;      // eps b
  double kappa_eps;  // eps^2 kappa
  double w_eps;      // 1 - b_eps - kappa_eps
  double alpha;

  /// Probability of color 1 under the boundary part, given f1.
  double boundary_one(double f1) const;
  /// r_eps(f1) = P(1) - [w f1 + b B(1) + kappa (1 - alpha)].
  double remainder(double f1) const;
  /// w (f1 + r/w) + b B(1) + kappa (1 - alpha).
  double reconstruct_one(double f1) const;
  /// Same decomposition in general form over states {0 = color 1, 1 = color 2}.
  GeneralVmpSpec spec(std::vector<std::pair<std::int64_t, double>> kernel) const;
};

/// Throws InvalidProbability when eps is too large for every part to be a
/// probability law.
NbvDecomposition noisy_biased_voter_decomposition(double alpha, double b, double kappa,
                                                  double eps);

/// Least-squares slope of log max_f |r_eps(f)| against log eps.
double nbv_remainder_slope(double alpha, double b, double kappa, std::span<const double> eps,
                           int f_grid = 64);

// ---------------------------------------------------------------------------
// Configs and dumps

/// {"model": "potts", "beta", "q", "lambda"?} or
/// {"model": "simple", "q", "b", "kappa", "g"?, "p"?, "lambda"?}.
/// g is "uniform", or a q x q array of distributions (diagonal entries may be
/// null). Missing p / lambda default to uniform.
VmpParams params_from_json(const nlohmann::json& j, const std::string& path = "$");
nlohmann::json to_json(const VmpParams& params);

struct LvConfig {
  double alpha;
  double eps;
};
struct NbvConfig {
  double alpha;
  double b;
  double kappa;
  double eps;
};
using ModelConfig = std::variant<VmpParams, LvConfig, NbvConfig>;

/// Accepts every model kind, including "lv" and "nbv".
ModelConfig model_from_json(const nlohmann::json& j, const std::string& path = "$");

/// Header `t,x,color`, one row per stored site.
void write_csv(std::ostream& os, const ColorField& field);

}  // namespace vmp
