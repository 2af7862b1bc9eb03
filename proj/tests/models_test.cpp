#include <cmath>
#include <sstream>

#include <doctest.h>

#include "support.hpp"
#include "vmp/models.hpp"

using namespace vmp;

namespace {

/// Closed forms evaluated with exp, independently of the library's expm1 path.
PottsRates potts_by_exp(double beta, int q) {
  const double a = std::exp(beta) - 1.0;
  const double e2 = std::exp(2.0 * beta);
  return {2.0 * a / (q + 2.0 * a), a * a * q / ((e2 - 1.0 + q) * (q + 2.0 * a)),
          q / (e2 + (q - 1.0))};
}

/// Detailed balance checked through Gibbs weights of the three-site
/// neighborhood: rate(i -> f) e^{-beta H(i)} = rate(f -> i) e^{-beta H(f)}.
double gibbs_balance_residual(double beta, int q) {
  const PottsRates r = potts_by_exp(beta, q);
  auto rate = [&](int cl, int cr, int c) {
    double walk = 0.0;
    if (c == cl) walk += 0.5;
    if (c == cr) walk += 0.5;
    const double branch = cl == cr ? (c == cl ? 1.0 : 0.0) : 1.0 / q;
    return r.w * walk + r.b * branch + r.kappa / q;
  };
  auto energy = [](int cl, int c, int cr) { return (cl != c ? 1.0 : 0.0) + (c != cr ? 1.0 : 0.0); };
  double worst = 0.0;
  for (int cl = 1; cl <= q; ++cl) {
    for (int cr = 1; cr <= q; ++cr) {
      for (int ci = 1; ci <= q; ++ci) {
        for (int cf = 1; cf <= q; ++cf) {
          const double lhs = rate(cl, cr, cf) * std::exp(-beta * energy(cl, ci, cr));
          const double rhs = rate(cl, cr, ci) * std::exp(-beta * energy(cl, cf, cr));
          worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, rhs));
        }
      }
    }
  }
  return worst;
}

VmpParams skewed_params(int q, double b, double kappa) {
  BoundaryTable g = BoundaryTable::from_function(q, [q](Color k, Color l) {
    std::vector<double> w(static_cast<std::size_t>(q), 0.0);
    w[k - 1] += 0.7;
    w[l - 1] += 0.3;
    return ColorDistribution(std::move(w));
  });
  std::vector<double> p(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) p[static_cast<std::size_t>(i)] = (i + 1.0) / (q * (q + 1) / 2.0);
  return VmpParams::make(b, kappa, std::move(g), ColorDistribution(p), ColorDistribution::uniform(q));
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("Potts rates at beta = ln 2, q = 3") {
  const PottsRates r = potts_rates(std::log(2.0), 3);
  CHECK(r.w == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r.b == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.kappa == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(r.w + r.b + r.kappa - 1.0) <= 1e-15);
}

TEST_CASE("Potts rates match the exp closed forms and sum to one") {
  for (double beta : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    for (int q = 2; q <= 8; ++q) {
      CAPTURE(beta);
      CAPTURE(q);
      const PottsRates r = potts_rates(beta, q);
      const PottsRates e = potts_by_exp(beta, q);
      CHECK(r.w == doctest::Approx(e.w).epsilon(1e-9));
      CHECK(r.b == doctest::Approx(e.b).epsilon(1e-9));
      CHECK(r.kappa == doctest::Approx(e.kappa).epsilon(1e-9));
      CHECK(std::abs(r.w + r.b + r.kappa - 1.0) <= 1e-12);
    }
  }
  CHECK_THROWS(potts_rates(0.0, 3));
  CHECK_THROWS(potts_rates(1.0, 1));
}

TEST_CASE("Potts large-beta limits") {
  for (int q = 2; q <= 6; ++q) {
    const PottsRates r = potts_rates(12.0, q);
    CHECK(r.kappa * std::exp(24.0) == doctest::Approx(q).epsilon(1e-6));
    CHECK(r.b * std::exp(12.0) == doctest::Approx(q / 2.0).epsilon(1e-4));
  }
}

TEST_CASE("detailed balance of the Potts rates") {
  CHECK(potts_detailed_balance_residual(1.0, 2) <= 1e-10);
  CHECK(potts_detailed_balance_residual(3.0, 5) <= 1e-10);
  CHECK(gibbs_balance_residual(1.0, 2) <= 1e-10);
  CHECK(gibbs_balance_residual(3.0, 5) <= 1e-10);
  for (double beta : {0.5, 1.0, 3.0}) {
    for (int q = 2; q <= 6; ++q) CHECK(gibbs_balance_residual(beta, q) <= 1e-10);
  }
}

TEST_CASE("transition law of one site") {
  SUBCASE("agreeing neighbors") {
    const VmpParams p = skewed_params(4, 0.3, 0.2);
    const ColorDistribution d = transition_distribution(p, 3, 3);
    CHECK(d[3] >= p.w + p.b - 1e-15);
  }
  SUBCASE("pure voter") {
    const VmpParams p = skewed_params(3, 0.0, 0.0);
    CHECK(p.w == 1.0);
    const ColorDistribution d = transition_distribution(p, 1, 3);
    CHECK(d.weights() == std::vector<double>{0.5, 0.0, 0.5});
  }
  SUBCASE("Potts at beta = ln 2 by substitution") {
    // 0.4 (1/2, 1/2, 0) + 0.1 (1/3, 1/3, 1/3) + 0.5 (1/3, 1/3, 1/3).
    const ColorDistribution d = transition_distribution(potts_params(std::log(2.0), 3), 1, 2);
    CHECK(d[1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(d[2] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(d[3] == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("one update: degenerate parameters") {
  const ColorSlice flat{0, -9, std::vector<Color>(10, 2)};
  SUBCASE("pure voter keeps a flat slice") {
    const VmpParams p = skewed_params(3, 0.0, 0.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (Color c : step(flat, p, seed).colors) CHECK(c == 2);
    }
  }
  SUBCASE("certain killing with p = delta_2") {
    VmpParams p = skewed_params(3, 0.0, 1.0);
    p.noise.p = ColorDistribution::point_mass(3, 2);
    const ColorSlice mixed{0, -5, {1, 3, 1, 3, 3, 1}};
    for (Color c : step(mixed, p, 4).colors) CHECK(c == 2);
  }
}

TEST_CASE("one update: frequencies match the transition law") {
  const VmpParams p = skewed_params(3, 0.3, 0.2);
  const ColorSlice slice{0, -3, {1, 2, 3, 1}};  // sites -3, -1, 1, 3
  const int n = 100000;
  std::array<int, 4> counts{};
  for (int seed = 0; seed < n; ++seed) {
    const ColorSlice next = step(slice, p, static_cast<std::uint64_t>(seed));
    REQUIRE(next.x_min == -2);
    ++counts[next.at(0)];
  }
  const ColorDistribution d = transition_distribution(p, 2, 3);
  for (Color c = 1; c <= 3; ++c) {
    const double sigma = std::sqrt(n * d[c] * (1.0 - d[c]));
    CHECK(std::abs(counts[c] - n * d[c]) <= 4.0 * sigma);
  }
}

TEST_CASE("one update shrinks the slice by one site per side") {
  const VmpParams p = skewed_params(3, 0.3, 0.2);
  const ColorSlice slice{4, -3, {1, 2, 3, 1}};
  const ColorSlice next = step(slice, p, 1);
  CHECK(next.t == 5);
  CHECK(next.x_min == -2);
  CHECK(next.x_max() == 2);
  CHECK_THROWS_AS(step(ColorSlice{0, 1, {2}}, p, 1), WindowError);
}

TEST_CASE("the two sublattices evolve independently") {
  const VmpParams p = skewed_params(3, 0.25, 0.15);
  SplitMix64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    LineSlice line{0, -6, {}};
    for (int i = 0; i < 13; ++i) line.colors.push_back(static_cast<Color>(1 + rng.below(3)));
    const std::uint64_t seed = rng();
    const LineSlice next = step_line(line, p, seed);
    REQUIRE(next.x_min == -5);
    for (std::int64_t start : {-6, -5}) {
      ColorSlice sub{0, start, {}};
      for (std::int64_t x = start; x <= 6; x += 2) sub.colors.push_back(line.colors[x + 6]);
      const ColorSlice stepped = step(sub, p, seed);
      for (std::size_t i = 0; i < stepped.colors.size(); ++i) {
        const std::int64_t x = stepped.x_min + 2 * static_cast<std::int64_t>(i);
        REQUIRE(next.colors[static_cast<std::size_t>(x - next.x_min)] == stepped.colors[i]);
      }
    }
  }
}

TEST_CASE("simulation shape and reproducibility") {
  const VmpParams p = potts_params(1.0, 3);
  const ColorField a = simulate(p, -10, 10, 6, 99);
  REQUIRE(a.slices.size() == 7);
  CHECK(a.slices.front().x_min == -9);
  CHECK(a.slices.back().t == 6);
  CHECK(a.slices.back().x_min == -3);
  CHECK(a.slices.back().x_max() == 3);
  const ColorField b = simulate(p, -10, 10, 6, 99);
  for (std::size_t i = 0; i < a.slices.size(); ++i) CHECK(a.slices[i].colors == b.slices[i].colors);
  std::ostringstream csv;
  write_csv(csv, a);
  CHECK(csv.str().rfind("t,x,color\n", 0) == 0);
}

TEST_CASE("Lotka-Volterra law: worked values") {
  // No perturbation: a 0-site flips to 1 with probability alpha f1.
  CHECK(lotka_volterra_transition(0, 0.4, 0.6, 0.0)[2] == doctest::Approx(0.24));
  // alpha = 0: nothing dies.
  CHECK(lotka_volterra_transition(0, 0.7, 0.0, 0.3)[1] == 1.0);
  CHECK(lotka_volterra_transition(1, 0.2, 0.0, 0.3)[2] == 1.0);
  CHECK(lotka_volterra_transition(0, 0.5, 1.0, 0.1)[2] == doctest::Approx(0.475).epsilon(1e-15));
}

TEST_CASE("Lotka-Volterra decomposition reproduces the direct law") {
  const std::vector<std::pair<std::int64_t, double>> kernel{{-2, 0.2}, {-1, 0.3}, {1, 0.3}, {2, 0.2}};
  double worst = 0.0;
  for (double alpha : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    for (double eps : {0.0, 0.01, 0.1, 0.5, 1.0}) {
      const GeneralVmpSpec spec = lotka_volterra_decomposition(alpha, eps, kernel);
      if (eps == 0.0) {
        CHECK(spec.b == 0.0);
        CHECK(spec.w == 1.0);
      }
      CHECK(spec.boundary_g(std::array<int, 3>{0, 1, 0})[1] == doctest::Approx(0.5 * alpha));
      for (int bits = 0; bits < 32; ++bits) {
        const Neighborhood eta = [bits](std::int64_t y) { return (bits >> (y + 2)) & 1; };
        double f1 = 0.0;
        for (const auto& [y, k] : kernel) f1 += k * eta(y);
        const StateLaw law = spec.transition(eta);
        const ColorDistribution direct = lotka_volterra_transition(eta(0), f1, alpha, eps);
        worst = std::max({worst, std::abs(law[0] - direct[1]), std::abs(law[1] - direct[2])});
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("noisy biased voter law: worked values") {
  CHECK(noisy_biased_voter_transition(0.37, 0.4, 0.0, 0.0)[1] == doctest::Approx(0.37));
  CHECK(noisy_biased_voter_transition(1.0, 0.4, 0.2, 0.0)[1] == doctest::Approx(1.0));
  CHECK(noisy_biased_voter_transition(0.5, 0.3, 0.1, 0.01)[1] ==
        doctest::Approx(0.557 / 1.06).epsilon(1e-14));
}

TEST_CASE("noisy biased voter decomposition") {
  const std::vector<std::pair<std::int64_t, double>> kernel{{-1, 0.5}, {1, 0.5}};
  double worst = 0.0;
  for (double alpha : {0.1, 0.5, 0.9}) {
    for (double eps : {0.0625, 0.03125, 0.01}) {
      const NbvDecomposition d = noisy_biased_voter_decomposition(alpha, 1.0, 2.0, eps);
      const GeneralVmpSpec spec = d.spec(kernel);
      for (int i = 0; i <= 64; ++i) {
        const double f1 = i / 64.0;
        const double direct = noisy_biased_voter_transition(f1, alpha, d.b_eps, d.kappa_eps)[1];
        worst = std::max(worst, std::abs(d.reconstruct_one(f1) - direct));
      }
      for (int bits = 0; bits < 4; ++bits) {
        const Neighborhood eta = [bits](std::int64_t y) { return (bits >> (y > 0 ? 1 : 0)) & 1; };
        const double f1 = 0.5 * (eta(-1) == 0) + 0.5 * (eta(1) == 0);
        const double direct = noisy_biased_voter_transition(f1, alpha, d.b_eps, d.kappa_eps)[1];
        worst = std::max(worst, std::abs(spec.transition(eta)[0] - direct));
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("noisy biased voter remainder") {
  SUBCASE("unanimous densities without killing") {
    const NbvDecomposition d = noisy_biased_voter_decomposition(0.4, 1.0, 0.0, 0.05);
    CHECK(std::abs(d.remainder(0.0)) <= 1e-15);
    CHECK(std::abs(d.remainder(1.0)) <= 1e-15);
  }
  SUBCASE("third-order decay") {
    const std::vector<double> eps{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
    for (double alpha : {0.2, 0.5, 0.8}) {
      CHECK(nbv_remainder_slope(alpha, 1.0, 1.0, eps) >= 2.9);
      CHECK(nbv_remainder_slope(alpha, 2.0, 0.5, eps) >= 2.9);
    }
  }
  CHECK_THROWS_AS(noisy_biased_voter_decomposition(0.5, 10.0, 0.0, 0.5), InvalidProbability);
}

TEST_CASE("general specs are validated") {
  GeneralVmpSpec spec = lotka_volterra_decomposition(0.5, 0.1, {{-1, 0.5}, {1, 0.5}});
  spec.kernel = {{-1, 0.5}, {2, 0.5}};  // not zero-mean
  CHECK_THROWS(spec.validate());
}

}  // TEST_SUITE
