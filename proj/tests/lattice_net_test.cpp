#include <cmath>
#include <set>

#include <doctest.h>

#include "vmp/lattice_net.hpp"

using namespace vmp;

TEST_SUITE("lattice_net") {

TEST_CASE("vertex draw thresholds split the unit interval") {
  // b = 0.25, kappa = 0.125 (exact in binary): w = 0.625, LeftOnly
  // [0, .3125), RightOnly [.3125, .625), Both [.625, .875), None [.875, 1).
  const double b = 0.25, k = 0.125;
  CHECK(draw_vertex(0.0, b, k).outcome == Arrow::LeftOnly);
  CHECK(draw_vertex(std::nextafter(0.3125, 0.0), b, k).outcome == Arrow::LeftOnly);
  CHECK(draw_vertex(0.3125, b, k).outcome == Arrow::RightOnly);
  CHECK(draw_vertex(std::nextafter(0.625, 0.0), b, k).outcome == Arrow::RightOnly);
  CHECK(draw_vertex(0.625, b, k).outcome == Arrow::Both);
  CHECK(draw_vertex(std::nextafter(0.875, 0.0), b, k).outcome == Arrow::Both);
  CHECK(draw_vertex(0.875, b, k).outcome == Arrow::None);
  CHECK(draw_vertex(std::nextafter(1.0, 0.0), b, k).outcome == Arrow::None);

  // The residual rescales u inside its interval.
  CHECK(draw_vertex(0.15625, b, k).residual == doctest::Approx(0.5));
  CHECK(draw_vertex(0.75, b, k).residual == doctest::Approx(0.5));
  CHECK(draw_vertex(0.9375, b, k).residual == doctest::Approx(0.5));

  // Non-dyadic parameters split away from the boundaries as expected.
  CHECK(draw_vertex(0.3499, 0.2, 0.1).outcome == Arrow::LeftOnly);
  CHECK(draw_vertex(0.3501, 0.2, 0.1).outcome == Arrow::RightOnly);
  CHECK(draw_vertex(0.7001, 0.2, 0.1).outcome == Arrow::Both);
  CHECK(draw_vertex(0.9001, 0.2, 0.1).outcome == Arrow::None);
}

TEST_CASE("residuals are evenly spread within each outcome") {
  const int n = 100000;
  std::array<std::array<int, 4>, 4> bins{};
  for (int i = 0; i < n; ++i) {
    const VertexDraw d = draw_vertex((i + 0.5) / n, 0.3, 0.2);
    REQUIRE(d.residual >= 0.0);
    REQUIRE(d.residual < 1.0);
    ++bins[static_cast<int>(d.outcome)][static_cast<int>(d.residual * 4)];
  }
  for (const auto& row : bins) {
    for (int k = 1; k < 4; ++k) CHECK(std::abs(row[k] - row[0]) <= 2);
  }
}

TEST_CASE("degenerate branching and killing probabilities") {
  const Window w{-20, 20, 0, 20};
  SUBCASE("b = 0, kappa = 0: only single arrows") {
    const ArrowField f = sample_arrow_field(w, 0.0, 0.0, 3);
    for (Arrow a : f.outcomes()) CHECK((a == Arrow::LeftOnly || a == Arrow::RightOnly));
  }
  SUBCASE("b = 1, kappa = 0: every vertex branches") {
    const ArrowField f = sample_arrow_field(w, 1.0, 0.0, 3);
    for (Arrow a : f.outcomes()) CHECK(a == Arrow::Both);
  }
}

TEST_CASE("branching frequency concentrates around b") {
  // 1000 x 2000 window: exactly 10^6 odd vertices.
  const ArrowField f = sample_arrow_field(Window{0, 999, 0, 1999}, 0.1, 0.05, 2024);
  REQUIRE(f.vertex_count() == 1000000);
  std::size_t both = 0, none = 0;
  for (Arrow a : f.outcomes()) {
    both += a == Arrow::Both;
    none += a == Arrow::None;
  }
  const double n = 1e6;
  CHECK(std::abs(both / n - 0.1) <= 4 * std::sqrt(0.1 * 0.9 / n));
  CHECK(std::abs(none / n - 0.05) <= 4 * std::sqrt(0.05 * 0.95 / n));
}

TEST_CASE("probabilities outside the simplex are rejected") {
  CHECK_THROWS_AS(validate_branch_kill(-0.1, 0.0), InvalidProbability);
  CHECK_THROWS_AS(validate_branch_kill(0.6, 0.5), InvalidProbability);
  CHECK_THROWS_AS(sample_arrow_field(Window{0, 4, 0, 4}, 0.7, 0.7, 1), InvalidProbability);
  CHECK_NOTHROW(validate_branch_kill(0.5, 0.5));
}

TEST_CASE("fields live on one sublattice") {
  const ArrowField odd = sample_arrow_field(Window{-3, 3, 0, 3}, 0.2, 0.1, 9);
  for (const Vertex& v : odd.vertices()) CHECK(parity_of(v) == Parity::Odd);
  CHECK(odd.vertex_count() == sublattice_size(Window{-3, 3, 0, 3}, Parity::Odd));
  CHECK_FALSE(odd.contains(Vertex{0, 0}));
  CHECK_THROWS(odd.outcome(Vertex{0, 0}));
  CHECK_THROWS_AS(odd.outcome(Vertex{9, 0}), WindowError);

  const ArrowField even = sample_arrow_field(Window{-3, 3, 0, 3}, 0.2, 0.1, 9,
                                             Orientation::Forward, Parity::Even);
  for (const Vertex& v : even.vertices()) CHECK(parity_of(v) == Parity::Even);
}

TEST_CASE("keyed uniforms do not depend on the window") {
  const LazyNet small(Window{-2, 2, 0, 2}, 0.3, 0.2, 77);
  const LazyNet large(Window{-50, 50, 0, 60}, 0.3, 0.2, 77);
  for (std::int64_t t = 0; t <= 2; ++t) {
    for (std::int64_t x = -2; x <= 2; ++x) {
      const Vertex v{x, t};
      if (!small.contains(v)) continue;
      CHECK(small.outcome(v) == large.outcome(v));
      CHECK(small.color_uniform(v) == large.color_uniform(v));
    }
  }
  const ArrowField f = large.materialize();
  for (const Vertex& v : f.vertices()) {
    REQUIRE(f.outcome(v) == large.outcome(v));
    REQUIRE(f.color_uniform(v) == large.color_uniform(v));
  }
  // Different seeds give different fields.
  CHECK(LazyNet(Window{-50, 50, 0, 60}, 0.3, 0.2, 78).materialize().outcomes() != f.outcomes());
}

TEST_CASE("extremal paths on a field without branching or killing") {
  const ArrowField f = sample_arrow_field(Window{-30, 30, 0, 20}, 0.0, 0.0, 5);
  const LatticePath p = trace_extremal_path(f, Vertex{1, 0}, Side::Leftmost);
  CHECK(p.reached_horizon());
  CHECK(p.positions.size() == 21);
  for (std::size_t i = 1; i < p.positions.size(); ++i) {
    CHECK(std::abs(p.positions[i] - p.positions[i - 1]) == 1);
  }
  const LatticePath q = trace_extremal_path(f, Vertex{1, 0}, Side::Rightmost);
  CHECK(q.positions == p.positions);
}

TEST_CASE("a path starting at a killing point has length zero") {
  const ArrowField f = field_from_rows(Window{-2, 2, 0, 1}, {"NL", "RRL"}, 0.1, 0.1, 0);
  const LatticePath p = trace_extremal_path(f, Vertex{-1, 0}, Side::Leftmost);
  CHECK(p.positions.size() == 1);
  REQUIRE(p.killed_at.has_value());
  CHECK(*p.killed_at == Vertex{-1, 0});
}

TEST_CASE("hand-built field with killing: traced by hand") {
  // Window [-2, 2] x [0, 4]; rows list x = -1, 1 at even t and x = -2, 0, 2
  // at odd t.
  const ArrowField f =
      field_from_rows(Window{-2, 2, 0, 4}, {"BR", "RBL", "RR", "RNL", "LR"}, 0.3, 0.2, 11);

  const LatticePath a = trace_extremal_path(f, Vertex{-1, 0}, Side::Leftmost);
  CHECK(a.positions == std::vector<std::int64_t>{-1, -2, -1, 0});
  REQUIRE(a.killed_at.has_value());
  CHECK(*a.killed_at == Vertex{0, 3});

  const LatticePath b = trace_extremal_path(f, Vertex{-1, 0}, Side::Rightmost);
  CHECK(b.positions == std::vector<std::int64_t>{-1, 0, 1, 2, 1});
  CHECK(b.reached_horizon());
  CHECK(b.end() == Vertex{1, 4});

  const LatticePath c = trace_extremal_path(f, Vertex{1, 0}, Side::Leftmost);
  CHECK(c.positions == std::vector<std::int64_t>{1, 2, 1, 2, 1});
  CHECK(trace_extremal_path(f, Vertex{1, 0}, Side::Rightmost).positions == c.positions);

  const LatticePath d = trace_extremal_path(f, Vertex{0, 1}, Side::Leftmost);
  CHECK(d.positions == std::vector<std::int64_t>{0, -1, 0});
  CHECK(d.killed_at == std::optional<Vertex>(Vertex{0, 3}));
}

TEST_CASE("paths that leave the window sideways are reported") {
  const ArrowField f = field_from_rows(Window{-2, 2, 0, 2}, {"LL", "LLL", "LL"}, 0.0, 0.0, 0);
  CHECK_THROWS_AS(trace_extremal_path(f, Vertex{-1, 0}, Side::Leftmost), WindowError);
}

TEST_CASE("time reflection of an all-LeftOnly field") {
  const ArrowField f =
      field_from_rows(Window{-3, 3, 0, 2}, {"LLLL", "LLL", "LLLL"}, 0.0, 0.0, 0);
  const ArrowField r = backward_field(f);
  CHECK(r.orientation() == Orientation::Backward);
  CHECK(r.parity() == Parity::Odd);
  for (const Vertex& v : r.vertices()) {
    CHECK(r.outcome(v) == Arrow::LeftOnly);
    const ArrowTargets tg = arrow_targets(v, r.outcome(v), r.orientation());
    REQUIRE(tg.count == 1);
    CHECK(tg.to[0] == Vertex{v.x - 1, v.t - 1});
  }
}

TEST_CASE("time reflection of 3x3 hand fields") {
  SUBCASE("t_min + t_max even keeps the sublattice") {
    // Vertices (1,0); (0,1), (2,1); (1,2).
    const ArrowField f = field_from_rows(Window{0, 2, 0, 2}, {"B", "LR", "N"}, 0.2, 0.2, 4);
    const ArrowField r = backward_field(f);
    CHECK(r.parity() == Parity::Odd);
    CHECK(r.outcome(Vertex{1, 0}) == Arrow::None);
    CHECK(r.outcome(Vertex{0, 1}) == Arrow::LeftOnly);
    CHECK(r.outcome(Vertex{2, 1}) == Arrow::RightOnly);
    CHECK(r.outcome(Vertex{1, 2}) == Arrow::Both);
    CHECK(r.color_uniform(Vertex{1, 2}) == f.color_uniform(Vertex{1, 0}));
  }
  SUBCASE("t_min + t_max odd moves to the even sublattice") {
    // Vertices (1,0); (0,1), (2,1) -> (0,0), (2,0); (1,1).
    const ArrowField f = field_from_rows(Window{0, 2, 0, 1}, {"L", "RB"}, 0.2, 0.2, 4);
    const ArrowField r = backward_field(f);
    CHECK(r.parity() == Parity::Even);
    CHECK(r.outcome(Vertex{0, 0}) == Arrow::RightOnly);
    CHECK(r.outcome(Vertex{2, 0}) == Arrow::Both);
    CHECK(r.outcome(Vertex{1, 1}) == Arrow::LeftOnly);
    CHECK(backward_field(r) == f);
  }
}

TEST_CASE("time reflection is an involution") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Window w{-6, 5, static_cast<std::int64_t>(seed % 3), 7};
    const ArrowField f = sample_arrow_field(w, 0.25, 0.1, seed);
    CHECK(backward_field(backward_field(f)) == f);
  }
}

TEST_CASE("text form round-trips") {
  const ArrowField f = sample_arrow_field(Window{-5, 6, 2, 9}, 0.3, 0.15, 123,
                                          Orientation::Backward, Parity::Even);
  const std::string text = to_text(f);
  CHECK(text.rfind("window -5 6 2 9 ", 0) == 0);
  CHECK(text.find("backward even") != std::string::npos);
  CHECK(parse_arrow_field(text) == f);
  CHECK_THROWS_AS(parse_arrow_field("window 0 2 0 1 0.1 0.1 3\nL\nRX\n"), ParseError);
  CHECK_THROWS_AS(parse_arrow_field("window 0 2 0 1 0.1 0.1 3\nL\n"), ParseError);
}

}  // TEST_SUITE
