#include "vmp/models.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "vmp/config.hpp"

namespace vmp {

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidProbability(std::string(name) + " must lie in [0,1]");
  }
}

ColorDistribution mix(std::initializer_list<std::pair<double, const std::vector<double>*>> parts,
                      std::size_t q) {
  std::vector<double> w(q, 0.0);
  for (const auto& [coef, law] : parts) {
    if (coef == 0.0) continue;
    for (std::size_t i = 0; i < q; ++i) w[i] += coef * (*law)[i];
  }
  // Renormalize away the rounding of the three-part sum.
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return ColorDistribution(std::move(w));
}

}  // namespace

VmpParams VmpParams::make(double b, double kappa, BoundaryTable g, ColorDistribution p,
                          ColorDistribution lambda) {
  validate_branch_kill(b, kappa);
  VmpParams out{1.0 - b - kappa, b, kappa, ColoringRule{std::move(g), std::move(lambda), std::move(p)}};
  out.validate();
  return out;
}

void VmpParams::validate() const {
  validate_branch_kill(b, kappa);
  if (!(w >= 0.0) || std::abs(w + b + kappa - 1.0) > 1e-12) {
    throw InvalidProbability("w + b + kappa must equal 1");
  }
  noise.validate();
}

ColorDistribution transition_distribution(const VmpParams& params, Color left, Color right) {
  const auto q = static_cast<std::size_t>(params.q());
  std::vector<double> walk(q, 0.0);
  walk[left - 1u] += 0.5;
  walk[right - 1u] += 0.5;
  return mix({{params.w, &walk},
              {params.b, &params.g().at(left, right).weights()},
              {params.kappa, &params.p().weights()}},
             q);
}

Color ColorSlice::at(std::int64_t x) const {
  if (!contains(x)) {
    throw WindowError("site x = " + std::to_string(x) + " is not stored in the slice at t = " +
                      std::to_string(t));
  }
  return colors[static_cast<std::size_t>((x - x_min) / 2)];
}

const ColorSlice& ColorField::at_time(std::int64_t t) const {
  if (slices.empty() || t < slices.front().t || t > slices.back().t) {
    throw WindowError("time " + std::to_string(t) + " is outside the simulated range");
  }
  return slices[static_cast<std::size_t>(t - slices.front().t)];
}

Color initial_color(const VmpParams& params, std::uint64_t seed, const Vertex& v) {
  const VertexDraw d = draw_vertex(keyed_uniform(seed, v.x, v.t), params.b, params.kappa);
  return color_from_uniform(d.residual, params.lambda());
}

ColorSlice initial_slice(const VmpParams& params, std::int64_t x_lo, std::int64_t x_hi,
                         Parity parity, std::uint64_t seed, std::int64_t t0) {
  std::int64_t x = x_lo;
  if (parity_of(Vertex{x, t0}) != parity) ++x;
  if (x > x_hi) throw WindowError("initial interval holds no site of the requested parity");
  ColorSlice out{t0, x, {}};
  for (; x <= x_hi; x += 2) out.colors.push_back(initial_color(params, seed, Vertex{x, t0}));
  return out;
}

namespace {

Color update_site(const VmpParams& params, std::uint64_t seed, const Vertex& v, Color left,
                  Color right) {
  const VertexDraw d = draw_vertex(keyed_uniform(seed, v.x, v.t), params.b, params.kappa);
  switch (d.outcome) {
    case Arrow::LeftOnly: return left;
    case Arrow::RightOnly: return right;
    case Arrow::Both:
      return left == right ? left : color_from_uniform(d.residual, params.g().at(left, right));
    case Arrow::None: return color_from_uniform(d.residual, params.p());
  }
  return left;
}

}  // namespace

ColorSlice step(const ColorSlice& slice, const VmpParams& params, std::uint64_t seed) {
  if (slice.colors.size() < 2) {
    throw WindowError("slice at t = " + std::to_string(slice.t) +
                      " is too narrow for another step");
  }
  ColorSlice out{slice.t + 1, slice.x_min + 1, {}};
  out.colors.resize(slice.colors.size() - 1);
  for (std::size_t i = 0; i + 1 < slice.colors.size(); ++i) {
    const Vertex v{out.x_min + 2 * static_cast<std::int64_t>(i), out.t};
    out.colors[i] = update_site(params, seed, v, slice.colors[i], slice.colors[i + 1]);
  }
  return out;
}

ColorField simulate_from(ColorSlice initial, const VmpParams& params, std::int64_t steps,
                         std::uint64_t seed) {
  params.validate();
  ColorField out{initial.parity(), {}};
  out.slices.reserve(static_cast<std::size_t>(steps + 1));
  out.slices.push_back(std::move(initial));
  for (std::int64_t s = 0; s < steps; ++s) out.slices.push_back(step(out.slices.back(), params, seed));
  return out;
}

ColorField simulate(const VmpParams& params, std::int64_t x_lo, std::int64_t x_hi,
                    std::int64_t steps, std::uint64_t seed, Parity parity) {
  return simulate_from(initial_slice(params, x_lo, x_hi, parity, seed), params, steps, seed);
}

LineSlice step_line(const LineSlice& line, const VmpParams& params, std::uint64_t seed) {
  if (line.colors.size() < 3) throw WindowError("line is too narrow for another step");
  LineSlice out{line.t + 1, line.x_min + 1, std::vector<Color>(line.colors.size() - 2)};
  for (std::size_t i = 0; i < out.colors.size(); ++i) {
    const Vertex v{out.x_min + static_cast<std::int64_t>(i), out.t};
    out.colors[i] = update_site(params, seed, v, line.colors[i], line.colors[i + 2]);
  }
  return out;
}

Window dependence_window(std::span<const Vertex> points) {
  if (points.empty()) throw InvalidArgument("no query points");
  Window w{points[0].x - points[0].t, points[0].x + points[0].t, 0, points[0].t};
  for (const Vertex& v : points) {
    if (v.t < 0) throw InvalidArgument("query point with negative time");
    w.x_min = std::min(w.x_min, v.x - v.t);
    w.x_max = std::max(w.x_max, v.x + v.t);
    w.t_max = std::max(w.t_max, v.t);
  }
  return w;
}

// ---------------------------------------------------------------------------

PottsRates potts_rates(double beta, int q) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
  if (q < 2 || q > kMaxColors) throw InvalidArgument("q must lie in [2, 255]");
  const double a = std::expm1(beta);
  const double e2 = std::expm1(2.0 * beta);
  const double qd = q;
  return PottsRates{2.0 * a / (qd + 2.0 * a), a * a * qd / ((e2 + qd) * (qd + 2.0 * a)),
                    qd / (e2 + qd)};
}

VmpParams potts_params(double beta, int q) {
  return potts_params(beta, q, ColorDistribution::uniform(q));
}

VmpParams potts_params(double beta, int q, ColorDistribution lambda) {
  const PottsRates r = potts_rates(beta, q);
  VmpParams out{r.w, r.b, r.kappa,
                ColoringRule{BoundaryTable::uniform(q), std::move(lambda),
                             ColorDistribution::uniform(q)}};
  out.validate();
  return out;
}

double potts_detailed_balance_residual(double beta, int q) {
  const PottsRates r = potts_rates(beta, q);
  auto rate = [&](int cl, int cr, int c) {
    const double walk = 0.5 * (c == cl) + 0.5 * (c == cr);
    const double branch = cl == cr ? static_cast<double>(c == cl) : 1.0 / q;
    return r.w * walk + r.b * branch + r.kappa / q;
  };
  double worst = 0.0;
  for (int cl = 1; cl <= q; ++cl) {
    for (int ci = 1; ci <= q; ++ci) {
      for (int cr = 1; cr <= q; ++cr) {
        for (int cf = 1; cf <= q; ++cf) {
          if (ci == cf) continue;
          const int dh = ((cf != cl) - (ci != cl)) + ((cf != cr) - (ci != cr));
          const double ratio = rate(cl, cr, cf) / rate(cl, cr, ci);
          worst = std::max(worst, std::abs(ratio - std::exp(-beta * dh)));
        }
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

std::size_t GeneralVmpSpec::arity() const {
  return boundary_q.empty() ? 0 : boundary_q.front().first.size();
}

void GeneralVmpSpec::validate() const {
  if (q < 2) throw InvalidArgument("general spec needs q >= 2");
  if (std::abs(w + b + kappa - 1.0) > 1e-12 || w < 0 || b < 0 || kappa < 0) {
    throw InvalidProbability("w, b, kappa must be non-negative and sum to 1");
  }
  double mass = 0.0, mean = 0.0;
  for (const auto& [y, k] : kernel) {
    if (k < 0) throw InvalidProbability("negative kernel weight");
    mass += k;
    mean += static_cast<double>(y) * k;
  }
  if (std::abs(mass - 1.0) > 1e-12) throw InvalidProbability("kernel weights must sum to 1");
  if (std::abs(mean) > 1e-12) throw InvalidArgument("kernel must have zero mean");
  double qmass = 0.0;
  for (const auto& [tuple, weight] : boundary_q) {
    if (tuple.size() != arity()) throw InvalidArgument("boundary tuples of mixed length");
    qmass += weight;
  }
  if (b > 0 && std::abs(qmass - 1.0) > 1e-12) {
    throw InvalidProbability("boundary sampling law must sum to 1");
  }
  if (b > 0) {
    std::vector<int> same(arity());
    for (int c = 0; c < q; ++c) {
      std::fill(same.begin(), same.end(), c);
      const StateLaw g = boundary_g(same);
      for (int s = 0; s < q; ++s) {
        if (g.at(static_cast<std::size_t>(s)) != (s == c ? 1.0 : 0.0)) {
          throw InvalidProbability("boundary g on a unanimous tuple must be a point mass");
        }
      }
    }
  }
  if (kappa > 0 && bulk.size() != static_cast<std::size_t>(q)) {
    throw InvalidArgument("bulk law has the wrong number of states");
  }
}

StateLaw GeneralVmpSpec::voter_law(const Neighborhood& eta) const {
  StateLaw f(static_cast<std::size_t>(q), 0.0);
  for (const auto& [y, k] : kernel) f.at(static_cast<std::size_t>(eta(y))) += k;
  return f;
}

StateLaw GeneralVmpSpec::boundary_law(const Neighborhood& eta) const {
  StateLaw out(static_cast<std::size_t>(q), 0.0);
  std::vector<int> states(arity());
  for (const auto& [tuple, weight] : boundary_q) {
    for (std::size_t i = 0; i < tuple.size(); ++i) states[i] = eta(tuple[i]);
    const StateLaw g = boundary_g(states);
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += weight * g[s];
  }
  return out;
}

StateLaw GeneralVmpSpec::transition(const Neighborhood& eta) const {
  StateLaw f = voter_law(eta);
  if (voter_correction) f = voter_correction(f);
  StateLaw out(static_cast<std::size_t>(q), 0.0);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = w * f[s];
  if (b > 0) {
    const StateLaw bl = boundary_law(eta);
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += b * bl[s];
  }
  if (kappa > 0) {
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += kappa * bulk[s];
  }
  return out;
}

ColorDistribution lotka_volterra_transition(int eta_x, double f1, double alpha, double eps) {
  if (eta_x != 0 && eta_x != 1) throw InvalidArgument("Lotka-Volterra state must be 0 or 1");
  check_unit(f1, "f1");
  check_unit(alpha, "alpha");
  check_unit(eps, "eps");
  if (eta_x == 0) {
    const double up = alpha * (1.0 - eps * f1) * f1;
    return ColorDistribution({1.0 - up, up});
  }
  const double f0 = 1.0 - f1;
  const double down = alpha * (1.0 - eps * f0) * f0;
  return ColorDistribution({down, 1.0 - down});
}

GeneralVmpSpec lotka_volterra_decomposition(
    double alpha, double eps, std::vector<std::pair<std::int64_t, double>> kernel) {
  check_unit(alpha, "alpha");
  check_unit(eps, "eps");
  GeneralVmpSpec spec;
  spec.q = 2;
  spec.w = 1.0 - eps;
  spec.b = eps;
  spec.kappa = 0.0;
  spec.kernel.emplace_back(0, 1.0 - alpha);
  for (const auto& [y, k] : kernel) {
    if (y == 0) {
      spec.kernel.front().second += alpha * k;
    } else {
      spec.kernel.emplace_back(y, alpha * k);
    }
  }
  for (const auto& [y1, k1] : kernel) {
    for (const auto& [y2, k2] : kernel) spec.boundary_q.push_back({{0, y1, y2}, k1 * k2});
  }
  spec.boundary_g = [alpha](std::span<const int> s) -> StateLaw {
    const int self = s[0];
    const bool mixed = s[1] != s[2];
    const double flip = mixed ? 0.5 * alpha : 0.0;
    return self == 0 ? StateLaw{1.0 - flip, flip} : StateLaw{flip, 1.0 - flip};
  };
  spec.bulk = {0.5, 0.5};
  spec.validate();
  return spec;
}

ColorDistribution noisy_biased_voter_transition(double f1, double alpha, double b_eps,
                                                double kappa_eps) {
  check_unit(f1, "f1");
  check_unit(alpha, "alpha");
  if (!(b_eps >= 0.0) || !(kappa_eps >= 0.0)) {
    throw InvalidProbability("b_eps and kappa_eps must be non-negative");
  }
  const double den = 1.0 + b_eps * f1 + kappa_eps;
  const double one = ((1.0 + b_eps) * f1 + (1.0 - alpha) * kappa_eps) / den;
  const double two = ((1.0 - f1) + alpha * kappa_eps) / den;
  return ColorDistribution({one, two});
}

double NbvDecomposition::boundary_one(double f1) const {
  const double f2 = 1.0 - f1;
  return f1 * f1 * f1 + 3.0 * f1 * f1 * f2 * (1.0 - b_eps / 3.0) +
         3.0 * f1 * f2 * f2 * (2.0 / 3.0);
}

double NbvDecomposition::remainder(double f1) const {
  const double p1 = noisy_biased_voter_transition(f1, alpha, b_eps, kappa_eps)[1];
  return p1 - (w_eps * f1 + b_eps * boundary_one(f1) + kappa_eps * (1.0 - alpha));
}

double NbvDecomposition::reconstruct_one(double f1) const {
  return w_eps * (f1 + remainder(f1) / w_eps) + b_eps * boundary_one(f1) +
         kappa_eps * (1.0 - alpha);
}

GeneralVmpSpec NbvDecomposition::spec(std::vector<std::pair<std::int64_t, double>> kernel) const {
  GeneralVmpSpec s;
  s.q = 2;
  s.w = w_eps;
  s.b = b_eps;
  s.kappa = kappa_eps;
  s.kernel = kernel;
  for (const auto& [y1, k1] : kernel) {
    for (const auto& [y2, k2] : kernel) {
      for (const auto& [y3, k3] : kernel) s.boundary_q.push_back({{y1, y2, y3}, k1 * k2 * k3});
    }
  }
  const double be = b_eps;
  s.boundary_g = [be](std::span<const int> st) -> StateLaw {
    const int ones = static_cast<int>(std::count(st.begin(), st.end(), 0));
    switch (ones) {
      case 3: return {1.0, 0.0};
      case 2: return {1.0 - be / 3.0, be / 3.0};
      case 1: return {2.0 / 3.0, 1.0 / 3.0};
      default: return {0.0, 1.0};
    }
  };
  s.bulk = {1.0 - alpha, alpha};
  const NbvDecomposition self = *this;
  s.voter_correction = [self](const StateLaw& f) -> StateLaw {
    const double shift = self.remainder(f[0]) / self.w_eps;
    return {f[0] + shift, f[1] - shift};
  };
  s.validate();
  return s;
}

NbvDecomposition noisy_biased_voter_decomposition(double alpha, double b, double kappa,
                                                  double eps) {
  check_unit(alpha, "alpha");
  if (!(eps > 0.0) || !(b >= 0.0) || !(kappa >= 0.0)) {
    throw InvalidArgument("eps must be positive and b, kappa non-negative");
  }
  NbvDecomposition d{eps, eps * b, eps * eps * kappa, 1.0 - eps * b - eps * eps * kappa, alpha};
  if (d.w_eps <= 0.0) throw InvalidProbability("eps too large: w_eps <= 0");
  if (d.b_eps > 3.0) throw InvalidProbability("eps too large: b_eps / 3 > 1");
  // The corrected voter law must stay a probability on interior densities;
  // at f1 in {0, 1} bulk noise moves it off the simplex by O(kappa_eps eps).
  for (int i = 1; i < 256; ++i) {
    const double f1 = i / 256.0;
    const double g = f1 + d.remainder(f1) / d.w_eps;
    if (g < 0.0 || g > 1.0) {
      throw InvalidProbability("eps too large: corrected voter law leaves the simplex");
    }
  }
  return d;
}

double nbv_remainder_slope(double alpha, double b, double kappa, std::span<const double> eps,
                           int f_grid) {
  if (eps.size() < 2) throw InvalidArgument("slope fit needs at least two eps values");
  std::vector<double> lx, ly;
  for (double e : eps) {
    const NbvDecomposition d = noisy_biased_voter_decomposition(alpha, b, kappa, e);
    double worst = 0.0;
    for (int i = 0; i <= f_grid; ++i) {
      worst = std::max(worst, std::abs(d.remainder(static_cast<double>(i) / f_grid)));
    }
    lx.push_back(std::log(e));
    ly.push_back(std::log(worst));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------

namespace {

using namespace vmp::config;

ColorDistribution distribution_at(const json& j, const std::string& path, int q) {
  const auto w = as_number_array(j, path);
  if (static_cast<int>(w.size()) != q) {
    throw ParseError(path + ": expected array of " + std::to_string(q) + " numbers, got " +
                     std::to_string(w.size()));
  }
  try {
    return ColorDistribution(w);
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

int colors_at(const json& j, const std::string& path) {
  const auto q = as_integer(j, path);
  if (q < 2 || q > kMaxColors) throw ParseError(path + ": expected integer in [2, 255]");
  return static_cast<int>(q);
}

BoundaryTable table_at(const json& j, const std::string& path, int q) {
  if (j.is_string()) {
    if (j.get<std::string>() != "uniform") {
      throw ParseError(path + ": expected \"uniform\" or a " + std::to_string(q) + "x" +
                       std::to_string(q) + " array");
    }
    return BoundaryTable::uniform(q);
  }
  require_array(j, path);
  if (static_cast<int>(j.size()) != q) throw ParseError(path + ": expected " + std::to_string(q) + " rows");
  std::vector<ColorDistribution> entries;
  for (int k = 0; k < q; ++k) {
    const std::string row = child_path(path, static_cast<std::size_t>(k));
    require_array(j[static_cast<std::size_t>(k)], row);
    if (static_cast<int>(j[static_cast<std::size_t>(k)].size()) != q) {
      throw ParseError(row + ": expected " + std::to_string(q) + " entries");
    }
    for (int l = 0; l < q; ++l) {
      const json& e = j[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      const std::string at = child_path(row, static_cast<std::size_t>(l));
      if (k == l && e.is_null()) {
        entries.push_back(ColorDistribution::point_mass(q, static_cast<Color>(k + 1)));
      } else {
        entries.push_back(distribution_at(e, at, q));
      }
    }
  }
  try {
    return BoundaryTable(q, std::move(entries));
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

double unit_at(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v >= 0.0 && v <= 1.0)) throw ParseError(path + ": expected number in [0, 1]");
  return v;
}

double positive_at(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v > 0.0) || !std::isfinite(v)) throw ParseError(path + ": expected positive number");
  return v;
}

}  // namespace

VmpParams params_from_json(const json& j, const std::string& path) {
  const std::string kind = as_string(member(j, "model", path), child_path(path, "model"));
  if (kind == "potts") {
    reject_unknown(j, {"model", "beta", "q", "lambda"}, path);
    const double beta = positive_at(member(j, "beta", path), child_path(path, "beta"));
    const int q = colors_at(member(j, "q", path), child_path(path, "q"));
    if (const json* l = optional_member(j, "lambda")) {
      return potts_params(beta, q, distribution_at(*l, child_path(path, "lambda"), q));
    }
    return potts_params(beta, q);
  }
  if (kind == "simple") {
    reject_unknown(j, {"model", "q", "w", "b", "kappa", "g", "p", "lambda"}, path);
    const int q = colors_at(member(j, "q", path), child_path(path, "q"));
    const double b = unit_at(member(j, "b", path), child_path(path, "b"));
    const double kappa = unit_at(member(j, "kappa", path), child_path(path, "kappa"));
    if (b + kappa > 1.0) throw ParseError(path + ": b + kappa must not exceed 1");
    if (const json* w = optional_member(j, "w")) {
      if (std::abs(as_number(*w, child_path(path, "w")) + b + kappa - 1.0) > 1e-12) {
        throw ParseError(child_path(path, "w") + ": expected 1 - b - kappa");
      }
    }
    const json* g = optional_member(j, "g");
    const json* p = optional_member(j, "p");
    const json* l = optional_member(j, "lambda");
    return VmpParams::make(
        b, kappa, g ? table_at(*g, child_path(path, "g"), q) : BoundaryTable::uniform(q),
        p ? distribution_at(*p, child_path(path, "p"), q) : ColorDistribution::uniform(q),
        l ? distribution_at(*l, child_path(path, "lambda"), q) : ColorDistribution::uniform(q));
  }
  throw ParseError(child_path(path, "model") +
                   ": expected one of \"potts\", \"simple\", got \"" + kind + "\"");
}

ModelConfig model_from_json(const json& j, const std::string& path) {
  const std::string kind = as_string(member(j, "model", path), child_path(path, "model"));
  if (kind == "lv") {
    reject_unknown(j, {"model", "alpha", "eps"}, path);
    return LvConfig{unit_at(member(j, "alpha", path), child_path(path, "alpha")),
                    unit_at(member(j, "eps", path), child_path(path, "eps"))};
  }
  if (kind == "nbv") {
    reject_unknown(j, {"model", "alpha", "b", "kappa", "eps"}, path);
    const double b = as_number(member(j, "b", path), child_path(path, "b"));
    const double k = as_number(member(j, "kappa", path), child_path(path, "kappa"));
    if (b < 0) throw ParseError(child_path(path, "b") + ": expected non-negative number");
    if (k < 0) throw ParseError(child_path(path, "kappa") + ": expected non-negative number");
    return NbvConfig{unit_at(member(j, "alpha", path), child_path(path, "alpha")), b, k,
                     positive_at(member(j, "eps", path), child_path(path, "eps"))};
  }
  if (kind != "potts" && kind != "simple") {
    throw ParseError(child_path(path, "model") +
                     ": expected one of \"potts\", \"simple\", \"lv\", \"nbv\", got \"" + kind +
                     "\"");
  }
  return params_from_json(j, path);
}

json to_json(const VmpParams& params) {
  json g = json::array();
  for (int k = 1; k <= params.q(); ++k) {
    json row = json::array();
    for (int l = 1; l <= params.q(); ++l) {
      row.push_back(params.g().at(static_cast<Color>(k), static_cast<Color>(l)).weights());
    }
    g.push_back(std::move(row));
  }
  return json{{"model", "simple"},   {"q", params.q()},
              {"w", params.w},       {"b", params.b},
              {"kappa", params.kappa}, {"g", std::move(g)},
              {"p", params.p().weights()}, {"lambda", params.lambda().weights()}};
}

void write_csv(std::ostream& os, const ColorField& field) {
  os << "t,x,color\n";
  for (const ColorSlice& s : field.slices) {
    for (std::size_t i = 0; i < s.colors.size(); ++i) {
      os << s.t << ',' << s.x_min + 2 * static_cast<std::int64_t>(i) << ','
         << static_cast<int>(s.colors[i]) << '\n';
    }
  }
}

}  // namespace vmp
