#pragma once

// Oriented percolation model with branching and killing on the odd (or even)
// space-time sublattice, sampled on finite windows.

#include <array>
#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmp/errors.hpp"
#include "vmp/rng.hpp"

namespace vmp {

struct Vertex {
  std::int64_t x = 0;
  std::int64_t t = 0;

  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;
};

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept {
    return static_cast<std::size_t>(
        mix64(static_cast<std::uint64_t>(v.x) * 0x9e3779b97f4a7c15ULL ^
              static_cast<std::uint64_t>(v.t)));
  }
};

enum class Parity : std::uint8_t { Odd, Even };

constexpr Parity parity_of(const Vertex& v) noexcept {
  return ((v.x + v.t) % 2 != 0) ? Parity::Odd : Parity::Even;
}

constexpr Parity flip(Parity p) noexcept {
  return p == Parity::Odd ? Parity::Even : Parity::Odd;
}

enum class Arrow : std::uint8_t { LeftOnly, RightOnly, Both, None };

char to_char(Arrow a) noexcept;
std::optional<Arrow> arrow_from_char(char c) noexcept;

/// Forward fields point from t to t+1; backward fields from t to t-1.
enum class Orientation : std::uint8_t { Forward, Backward };

struct Window {
  std::int64_t x_min = 0;
  std::int64_t x_max = 0;
  std::int64_t t_min = 0;
  std::int64_t t_max = 0;

  bool empty() const noexcept { return x_min > x_max || t_min > t_max; }
  bool contains(const Vertex& v) const noexcept {
    return v.x >= x_min && v.x <= x_max && v.t >= t_min && v.t <= t_max;
  }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Outcome of one vertex plus the leftover uniform for its color draw.
struct VertexDraw {
  Arrow outcome;
  double residual;  // uniform in [0,1), independent of `outcome`
};

/// Throws InvalidProbability unless b, kappa >= 0 and b + kappa <= 1.
void validate_branch_kill(double b, double kappa);

/// Splits one uniform into an arrow outcome and a fresh uniform.
///
/// Thresholds: LeftOnly below (1-b-k)/2, RightOnly below 1-b-k, Both below
/// 1-k, None otherwise. The residual is u rescaled inside the chosen interval,
/// so conditionally on the outcome it is again uniform on [0,1).
VertexDraw draw_vertex(double u, double b, double kappa) noexcept;

/// Arrow outcomes (and color uniforms) of every parity vertex of a window.
///
/// Immutable after construction.
class ArrowField {
 public:
  ArrowField(Window window, Orientation orientation, Parity parity, double b,
             double kappa, std::uint64_t seed, std::vector<Arrow> outcomes,
             std::vector<double> uniforms);

  const Window& window() const noexcept { return window_; }
  Orientation orientation() const noexcept { return orientation_; }
  Parity parity() const noexcept { return parity_; }
  double branching() const noexcept { return b_; }
  double killing() const noexcept { return kappa_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t vertex_count() const noexcept { return outcomes_.size(); }

  /// In window and on the field's sublattice.
  bool contains(const Vertex& v) const noexcept;

  /// Throws WindowError / InvalidArgument for vertices not in the field.
  Arrow outcome(const Vertex& v) const;
  double color_uniform(const Vertex& v) const;

  /// Vertices in row-major order (increasing t, then increasing x).
  std::vector<Vertex> vertices() const;
  std::size_t index_of(const Vertex& v) const;

  const std::vector<Arrow>& outcomes() const noexcept { return outcomes_; }
  const std::vector<double>& uniforms() const noexcept { return uniforms_; }

  friend bool operator==(const ArrowField&, const ArrowField&) = default;

 private:
  std::int64_t first_x(std::int64_t t) const noexcept;

  Window window_;
  Orientation orientation_;
  Parity parity_;
  double b_;
  double kappa_;
  std::uint64_t seed_;
  std::vector<std::size_t> row_offset_;
  std::vector<Arrow> outcomes_;
  std::vector<double> uniforms_;
};

/// Number of sublattice vertices in a window.
std::size_t sublattice_size(const Window& window, Parity parity) noexcept;

/// Samples every vertex independently from its keyed uniform.
ArrowField sample_arrow_field(const Window& window, double b, double kappa,
                              std::uint64_t seed,
                              Orientation orientation = Orientation::Forward,
                              Parity parity = Parity::Odd);

/// Same law as a sampled ArrowField but evaluated on demand, for windows too
/// large to materialize. Two nets with equal (seed, b, kappa) agree on every
/// shared vertex.
class LazyNet {
 public:
  LazyNet(Window window, double b, double kappa, std::uint64_t seed,
          Orientation orientation = Orientation::Backward,
          Parity parity = Parity::Odd);

  const Window& window() const noexcept { return window_; }
  Orientation orientation() const noexcept { return orientation_; }
  Parity parity() const noexcept { return parity_; }
  double branching() const noexcept { return b_; }
  double killing() const noexcept { return kappa_; }
  std::uint64_t seed() const noexcept { return seed_; }

  bool contains(const Vertex& v) const noexcept {
    return window_.contains(v) && parity_of(v) == parity_;
  }
  Arrow outcome(const Vertex& v) const noexcept { return draw(v).outcome; }
  double color_uniform(const Vertex& v) const noexcept {
    return draw(v).residual;
  }
  VertexDraw draw(const Vertex& v) const noexcept {
    return draw_vertex(keyed_uniform(seed_, v.x, v.t), b_, kappa_);
  }

  /// Materializes the window.
  ArrowField materialize() const;

 private:
  Window window_;
  double b_;
  double kappa_;
  std::uint64_t seed_;
  Orientation orientation_;
  Parity parity_;
};

/// Anything that answers arrow and uniform queries for a window.
template <typename N>
concept NetView = requires(const N& net, const Vertex& v) {
  { net.window() } -> std::convertible_to<const Window&>;
  { net.orientation() } -> std::convertible_to<Orientation>;
  { net.parity() } -> std::convertible_to<Parity>;
  { net.contains(v) } -> std::convertible_to<bool>;
  { net.outcome(v) } -> std::convertible_to<Arrow>;
  { net.color_uniform(v) } -> std::convertible_to<double>;
};

/// Time step of the arrows of a field: +1 forward, -1 backward.
constexpr std::int64_t time_step(Orientation o) noexcept {
  return o == Orientation::Forward ? 1 : -1;
}

/// Targets of the arrows leaving `v`, left target first.
struct ArrowTargets {
  std::array<Vertex, 2> to{};
  std::uint8_t count = 0;
};
ArrowTargets arrow_targets(const Vertex& v, Arrow a, Orientation o) noexcept;

enum class Side : std::uint8_t { Leftmost, Rightmost };

struct LatticePath {
  Vertex start;
  /// +1 along a forward field, -1 along a backward one.
  std::int64_t step = 1;
  /// positions[i] is the x-coordinate at time start.t + i*step.
  std::vector<std::int64_t> positions;
  /// Set when the path ends at a killing point.
  std::optional<Vertex> killed_at;

  bool reached_horizon() const noexcept { return !killed_at.has_value(); }
  Vertex end() const noexcept;
};

/// Follows the arrows from `start`, taking the left (right) arrow at branching
/// points, until a killing point or the last time row of the window.
LatticePath trace_extremal_path(const ArrowField& field, const Vertex& start,
                                Side side);

/// Time reflection about the window's temporal midpoint. Involution.
///
/// When t_min + t_max is odd the reflection moves the field to the other
/// sublattice; the parity tag follows it.
ArrowField backward_field(const ArrowField& field);

/// Compact text form: `window x_min x_max t_min t_max b kappa seed`, then one
/// L/R/B/N character per vertex in row-major order (one line per time row).
/// Non-default orientation or parity are appended to the header as the tokens
/// `backward` and `even`.
std::string to_text(const ArrowField& field);

/// Inverse of to_text. Color uniforms are re-derived from the seed: a vertex
/// whose character matches its keyed draw keeps that draw's residual, any
/// other vertex gets an independently keyed uniform.
ArrowField parse_arrow_field(std::string_view text);

/// Builds a field from explicit rows of L/R/B/N characters (first row is
/// t_min). Uniforms follow the parse_arrow_field rule.
ArrowField field_from_rows(const Window& window,
                           const std::vector<std::string>& rows, double b,
                           double kappa, std::uint64_t seed,
                           Orientation orientation = Orientation::Forward,
                           Parity parity = Parity::Odd);

}  // namespace vmp
