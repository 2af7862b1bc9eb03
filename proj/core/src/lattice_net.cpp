#include "vmp/lattice_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace vmp {

namespace {

constexpr std::uint64_t kFallbackSalt = 0x8f1bbcdcbfa53e0bULL;
constexpr double kBelowOne = 0x1.fffffffffffffp-1;

std::string describe(const Vertex& v) {
  return "(" + std::to_string(v.x) + ", " + std::to_string(v.t) + ")";
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double rescale(double u, double lo, double hi) noexcept {
  const double r = (u - lo) / (hi - lo);
  return std::clamp(r, 0.0, kBelowOne);
}

double uniform_for_char(std::uint64_t seed, const Vertex& v, Arrow a, double b,
                        double kappa) {
  const VertexDraw d = draw_vertex(keyed_uniform(seed, v.x, v.t), b, kappa);
  if (d.outcome == a) return d.residual;
  return keyed_uniform(seed ^ kFallbackSalt, v.x, v.t);
}

}  // namespace

char to_char(Arrow a) noexcept {
  switch (a) {
    case Arrow::LeftOnly: return 'L';
    case Arrow::RightOnly: return 'R';
    case Arrow::Both: return 'B';
    case Arrow::None: return 'N';
  }
  return '?';
}

std::optional<Arrow> arrow_from_char(char c) noexcept {
  switch (c) {
    case 'L': return Arrow::LeftOnly;
    case 'R': return Arrow::RightOnly;
    case 'B': return Arrow::Both;
    case 'N': return Arrow::None;
    default: return std::nullopt;
  }
}

void validate_branch_kill(double b, double kappa) {
  if (!(b >= 0.0) || !(kappa >= 0.0) || !(b <= 1.0) || !(kappa <= 1.0)) {
    throw InvalidProbability("branching/killing probabilities must lie in [0,1], got b=" +
                             format_double(b) + " kappa=" + format_double(kappa));
  }
  if (b + kappa > 1.0) {
    throw InvalidProbability("b + kappa must not exceed 1, got " + format_double(b + kappa));
  }
}

VertexDraw draw_vertex(double u, double b, double kappa) noexcept {
  const double walk = 1.0 - b - kappa;
  const double left = walk / 2.0;
  const double both = 1.0 - kappa;
  if (u < left) return {Arrow::LeftOnly, rescale(u, 0.0, left)};
  if (u < walk) return {Arrow::RightOnly, rescale(u, left, walk)};
  if (u < both) return {Arrow::Both, rescale(u, walk, both)};
  return {Arrow::None, rescale(u, both, 1.0)};
}

std::size_t sublattice_size(const Window& window, Parity parity) noexcept {
  if (window.empty()) return 0;
  std::size_t n = 0;
  for (std::int64_t t = window.t_min; t <= window.t_max; ++t) {
    std::int64_t x0 = window.x_min;
    if (parity_of({x0, t}) != parity) ++x0;
    if (x0 <= window.x_max) n += static_cast<std::size_t>((window.x_max - x0) / 2 + 1);
  }
  return n;
}

ArrowField::ArrowField(Window window, Orientation orientation, Parity parity,
                       double b, double kappa, std::uint64_t seed,
                       std::vector<Arrow> outcomes, std::vector<double> uniforms)
    : window_(window),
      orientation_(orientation),
      parity_(parity),
      b_(b),
      kappa_(kappa),
      seed_(seed),
      outcomes_(std::move(outcomes)),
      uniforms_(std::move(uniforms)) {
  validate_branch_kill(b, kappa);
  if (window_.empty()) throw InvalidArgument("arrow field window is empty");
  row_offset_.reserve(static_cast<std::size_t>(window_.t_max - window_.t_min + 2));
  std::size_t offset = 0;
  for (std::int64_t t = window_.t_min; t <= window_.t_max; ++t) {
    row_offset_.push_back(offset);
    const std::int64_t x0 = first_x(t);
    if (x0 <= window_.x_max) offset += static_cast<std::size_t>((window_.x_max - x0) / 2 + 1);
  }
  row_offset_.push_back(offset);
  if (outcomes_.size() != offset || uniforms_.size() != offset) {
    throw InvalidArgument("arrow field expects " + std::to_string(offset) +
                          " vertices, got " + std::to_string(outcomes_.size()) +
                          " outcomes and " + std::to_string(uniforms_.size()) + " uniforms");
  }
  for (double u : uniforms_) {
    if (!(u >= 0.0 && u < 1.0)) throw InvalidProbability("vertex uniform outside [0,1)");
  }
}

std::int64_t ArrowField::first_x(std::int64_t t) const noexcept {
  std::int64_t x0 = window_.x_min;
  if (parity_of({x0, t}) != parity_) ++x0;
  return x0;
}

bool ArrowField::contains(const Vertex& v) const noexcept {
  return window_.contains(v) && parity_of(v) == parity_;
}

std::size_t ArrowField::index_of(const Vertex& v) const {
  if (!window_.contains(v)) throw WindowError("vertex " + describe(v) + " outside the field window");
  if (parity_of(v) != parity_) throw InvalidArgument("vertex " + describe(v) + " has the wrong parity");
  const auto row = static_cast<std::size_t>(v.t - window_.t_min);
  return row_offset_[row] + static_cast<std::size_t>((v.x - first_x(v.t)) / 2);
}

Arrow ArrowField::outcome(const Vertex& v) const { return outcomes_[index_of(v)]; }

double ArrowField::color_uniform(const Vertex& v) const { return uniforms_[index_of(v)]; }

std::vector<Vertex> ArrowField::vertices() const {
  std::vector<Vertex> out;
  out.reserve(outcomes_.size());
  for (std::int64_t t = window_.t_min; t <= window_.t_max; ++t) {
    for (std::int64_t x = first_x(t); x <= window_.x_max; x += 2) out.push_back({x, t});
  }
  return out;
}

ArrowField sample_arrow_field(const Window& window, double b, double kappa,
                              std::uint64_t seed, Orientation orientation,
                              Parity parity) {
  return LazyNet(window, b, kappa, seed, orientation, parity).materialize();
}

LazyNet::LazyNet(Window window, double b, double kappa, std::uint64_t seed,
                 Orientation orientation, Parity parity)
    : window_(window), b_(b), kappa_(kappa), seed_(seed), orientation_(orientation), parity_(parity) {
  validate_branch_kill(b, kappa);
  if (window_.empty()) throw InvalidArgument("net window is empty");
}

ArrowField LazyNet::materialize() const {
  const std::size_t n = sublattice_size(window_, parity_);
  std::vector<Arrow> outcomes;
  std::vector<double> uniforms;
  outcomes.reserve(n);
  uniforms.reserve(n);
  for (std::int64_t t = window_.t_min; t <= window_.t_max; ++t) {
    std::int64_t x = window_.x_min;
    if (parity_of({x, t}) != parity_) ++x;
    for (; x <= window_.x_max; x += 2) {
      const VertexDraw d = draw({x, t});
      outcomes.push_back(d.outcome);
      uniforms.push_back(d.residual);
    }
  }
  return ArrowField(window_, orientation_, parity_, b_, kappa_, seed_, std::move(outcomes),
                    std::move(uniforms));
}

ArrowTargets arrow_targets(const Vertex& v, Arrow a, Orientation o) noexcept {
  const std::int64_t nt = v.t + time_step(o);
  ArrowTargets out;
  switch (a) {
    case Arrow::LeftOnly:
      out.to[0] = {v.x - 1, nt};
      out.count = 1;
      break;
    case Arrow::RightOnly:
      out.to[0] = {v.x + 1, nt};
      out.count = 1;
      break;
    case Arrow::Both:
      out.to[0] = {v.x - 1, nt};
      out.to[1] = {v.x + 1, nt};
      out.count = 2;
      break;
    case Arrow::None:
      break;
  }
  return out;
}

Vertex LatticePath::end() const noexcept {
  if (killed_at) return *killed_at;
  const auto n = static_cast<std::int64_t>(positions.size());
  return {positions.back(), start.t + (n - 1) * step};
}

LatticePath trace_extremal_path(const ArrowField& field, const Vertex& start, Side side) {
  if (!field.window().contains(start)) {
    throw WindowError("path start " + describe(start) + " outside the field window");
  }
  if (parity_of(start) != field.parity()) {
    throw InvalidArgument("path start " + describe(start) + " has the wrong parity");
  }
  const std::int64_t step = time_step(field.orientation());
  const std::int64_t horizon =
      field.orientation() == Orientation::Forward ? field.window().t_max : field.window().t_min;

  LatticePath path{start, step, {start.x}, std::nullopt};
  Vertex v = start;
  while (true) {
    const Arrow a = field.outcome(v);
    if (a == Arrow::None) {
      path.killed_at = v;
      break;
    }
    if (v.t == horizon) break;
    std::int64_t nx = v.x;
    if (a == Arrow::LeftOnly) nx = v.x - 1;
    else if (a == Arrow::RightOnly) nx = v.x + 1;
    else nx = side == Side::Leftmost ? v.x - 1 : v.x + 1;
    v = {nx, v.t + step};
    if (!field.window().contains(v)) {
      throw WindowError("path from " + describe(start) + " leaves the window sideways at " +
                        describe(v));
    }
    path.positions.push_back(nx);
  }
  return path;
}

ArrowField backward_field(const ArrowField& field) {
  const Window& w = field.window();
  const std::int64_t sum = w.t_min + w.t_max;
  const Parity parity = (sum % 2 == 0) ? field.parity() : flip(field.parity());
  const Orientation orientation =
      field.orientation() == Orientation::Forward ? Orientation::Backward : Orientation::Forward;

  const std::size_t n = field.vertex_count();
  std::vector<Arrow> outcomes(n);
  std::vector<double> uniforms(n);
  // Rows are reversed; within a row x order is kept.
  ArrowField shape(w, orientation, parity, field.branching(), field.killing(), field.seed(),
                   std::vector<Arrow>(n, Arrow::None), std::vector<double>(n, 0.0));
  for (const Vertex& v : field.vertices()) {
    const Vertex r{v.x, sum - v.t};
    const std::size_t i = shape.index_of(r);
    outcomes[i] = field.outcome(v);
    uniforms[i] = field.color_uniform(v);
  }
  return ArrowField(w, orientation, parity, field.branching(), field.killing(), field.seed(),
                    std::move(outcomes), std::move(uniforms));
}

std::string to_text(const ArrowField& field) {
  const Window& w = field.window();
  std::ostringstream os;
  os << "window " << w.x_min << ' ' << w.x_max << ' ' << w.t_min << ' ' << w.t_max << ' '
     << format_double(field.branching()) << ' ' << format_double(field.killing()) << ' '
     << field.seed();
  if (field.orientation() == Orientation::Backward) os << " backward";
  if (field.parity() == Parity::Even) os << " even";
  os << '\n';
  std::int64_t row_t = w.t_min;
  bool row_open = false;
  for (const Vertex& v : field.vertices()) {
    if (v.t != row_t) {
      if (row_open) os << '\n';
      row_t = v.t;
      row_open = false;
    }
    os << to_char(field.outcome(v));
    row_open = true;
  }
  if (row_open) os << '\n';
  return os.str();
}

ArrowField parse_arrow_field(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string header;
  if (!std::getline(is, header)) throw ParseError("empty arrow field text");
  std::istringstream hs(header);
  std::string tag;
  Window w;
  double b = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  if (!(hs >> tag >> w.x_min >> w.x_max >> w.t_min >> w.t_max >> b >> kappa >> seed) ||
      tag != "window") {
    throw ParseError("arrow field header must read `window x_min x_max t_min t_max b kappa seed`");
  }
  Orientation orientation = Orientation::Forward;
  Parity parity = Parity::Odd;
  std::string extra;
  while (hs >> extra) {
    if (extra == "backward") orientation = Orientation::Backward;
    else if (extra == "even") parity = Parity::Even;
    else throw ParseError("unknown arrow field header token `" + extra + "`");
  }
  if (w.empty()) throw ParseError("arrow field window is empty");
  validate_branch_kill(b, kappa);

  std::string body;
  for (char c; is.get(c);) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    body.push_back(c);
  }
  const std::size_t n = sublattice_size(w, parity);
  if (body.size() != n) {
    throw ParseError("arrow field expects " + std::to_string(n) + " vertex characters, got " +
                     std::to_string(body.size()));
  }
  std::vector<Arrow> outcomes;
  std::vector<double> uniforms;
  outcomes.reserve(n);
  uniforms.reserve(n);
  std::size_t i = 0;
  for (std::int64_t t = w.t_min; t <= w.t_max; ++t) {
    std::int64_t x = w.x_min;
    if (parity_of({x, t}) != parity) ++x;
    for (; x <= w.x_max; x += 2, ++i) {
      const auto a = arrow_from_char(body[i]);
      if (!a) throw ParseError(std::string("invalid arrow character `") + body[i] + "`");
      outcomes.push_back(*a);
      uniforms.push_back(uniform_for_char(seed, {x, t}, *a, b, kappa));
    }
  }
  return ArrowField(w, orientation, parity, b, kappa, seed, std::move(outcomes),
                    std::move(uniforms));
}

ArrowField field_from_rows(const Window& window, const std::vector<std::string>& rows,
                           double b, double kappa, std::uint64_t seed,
                           Orientation orientation, Parity parity) {
  if (window.empty()) throw InvalidArgument("field window is empty");
  const auto n_rows = static_cast<std::size_t>(window.t_max - window.t_min + 1);
  if (rows.size() != n_rows) {
    throw InvalidArgument("expected " + std::to_string(n_rows) + " rows, got " +
                          std::to_string(rows.size()));
  }
  const auto width = static_cast<std::size_t>(window.x_max - window.x_min + 1);
  std::vector<Arrow> outcomes;
  std::vector<double> uniforms;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::int64_t t = window.t_min + static_cast<std::int64_t>(r);
    std::int64_t x0 = window.x_min;
    if (parity_of({x0, t}) != parity) ++x0;
    const std::string& row = rows[r];
    std::size_t k = 0;
    for (std::int64_t x = x0; x <= window.x_max; x += 2, ++k) {
      // Full-width rows carry a placeholder at off-sublattice columns.
      const char c = row.size() == width ? row[static_cast<std::size_t>(x - window.x_min)] : (k < row.size() ? row[k] : '?');
      const auto a = arrow_from_char(c);
      if (!a) {
        throw InvalidArgument("row " + std::to_string(r) + ": invalid arrow at x=" +
                              std::to_string(x));
      }
      outcomes.push_back(*a);
      uniforms.push_back(uniform_for_char(seed, {x, t}, *a, b, kappa));
    }
  }
  return ArrowField(window, orientation, parity, b, kappa, seed, std::move(outcomes),
                    std::move(uniforms));
}

}  // namespace vmp
