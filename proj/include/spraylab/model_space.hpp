#pragma once

// Truncated model spaces: grid-sampled function spaces, truncated sequence
// spaces and finite products, each carrying an explicit finite seminorm family.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spraylab {

using Vector = Eigen::VectorXd;

inline constexpr int kMaxDerivativeOrder = 4;

/// Uniform grid on [-L, L] (closed) or [-L, L) (periodic). Values of a
/// grid function are stored point-major: coords[i * codomain_dim + c].
struct Grid {
  double half_width = 2.0;
  double step = 0.01;
  std::size_t points = 0;
  std::size_t codomain_dim = 1;
  bool periodic = false;

  double coordinate(std::size_t i) const { return -half_width + step * static_cast<double>(i); }
  std::size_t dimension() const { return points * codomain_dim; }

  static Grid uniform(double half_width, double step, std::size_t codomain_dim = 1, bool periodic = false) {
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("grid step must be positive");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw std::invalid_argument("grid half-width must be positive");
    if (codomain_dim == 0) throw std::invalid_argument("grid codomain dimension must be positive");
    const double cells = 2.0 * half_width / step;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
      throw std::invalid_argument("grid step must divide the interval length");
    Grid g;
    g.half_width = half_width;
    g.step = step;
    g.codomain_dim = codomain_dim;
    g.periodic = periodic;
    g.points = static_cast<std::size_t>(rounded) + (periodic ? 0 : 1);
    if (g.points < 3) throw std::invalid_argument("grid needs at least 3 points");
    return g;
  }

  /// Periodic grid with a given number of points on [-pi, pi).
  static Grid circle(std::size_t points, std::size_t codomain_dim = 1) {
    if (points < 3) throw std::invalid_argument("grid needs at least 3 points");
    Grid g;
    g.half_width = std::numbers::pi;
    g.step = 2.0 * std::numbers::pi / static_cast<double>(points);
    g.points = points;
    g.codomain_dim = codomain_dim;
    g.periodic = true;
    return g;
  }
};

/// sup over grid points in [-window, window] of |m-th finite-difference derivative|.
struct GridSeminorm {
  double window = 1.0;
  int order = 0;
};

namespace detail {

/// One application of the first-derivative stencil: central in the interior,
/// second-order one-sided at the ends of a closed grid, wrapped when periodic.
inline Vector first_difference(const Grid& g, const Vector& values) {
  const std::size_t n = g.points;
  const std::size_t d = g.codomain_dim;
  const double inv2h = 1.0 / (2.0 * g.step);
  Vector out(values.size());
  for (std::size_t c = 0; c < d; ++c) {
    auto at = [&](std::size_t i) { return values[static_cast<Eigen::Index>(i * d + c)]; };
    for (std::size_t i = 0; i < n; ++i) {
      double dv;
      if (g.periodic) {
        dv = (at((i + 1) % n) - at((i + n - 1) % n)) * inv2h;
      } else if (i == 0) {
        dv = (4.0 * (at(1) - at(0)) - (at(2) - at(0))) * inv2h;
      } else if (i == n - 1) {
        dv = (4.0 * (at(n - 1) - at(n - 2)) - (at(n - 1) - at(n - 3))) * inv2h;
      } else {
        dv = (at(i + 1) - at(i - 1)) * inv2h;
      }
      out[static_cast<Eigen::Index>(i * d + c)] = dv;
    }
  }
  return out;
}

}  // namespace detail

/// Finite-difference derivative of the given order (order 0 returns a copy).
inline Vector grid_derivative(const Grid& g, const Vector& values, int order) {
  Vector out = values;
  for (int k = 0; k < order; ++k) out = detail::first_difference(g, out);
  return out;
}

class ModelSpace {
 public:
  enum class Kind { GridFunctions, Sequences, Product };

  static ModelSpace grid_functions(const Grid& grid, std::vector<GridSeminorm> seminorms) {
    if (seminorms.empty()) throw std::invalid_argument("seminorm list must be non-empty");
    for (const auto& s : seminorms) {
      if (s.order < 0 || s.order > kMaxDerivativeOrder)
        throw std::invalid_argument("derivative order out of range");
      if (!(s.window > 0.0) || s.window > grid.half_width * (1.0 + 1e-12))
        throw std::invalid_argument("seminorm window must lie in (0, L]");
    }
    ModelSpace m;
    m.kind_ = Kind::GridFunctions;
    m.grid_ = grid;
    m.grid_seminorms_ = std::move(seminorms);
    m.dimension_ = grid.dimension();
    m.seminorm_count_ = m.grid_seminorms_.size();
    for (const auto& s : m.grid_seminorms_) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < grid.points; ++i)
        if (std::abs(grid.coordinate(i)) <= s.window + 1e-9 * grid.step) idx.push_back(i);
      if (idx.empty()) throw std::invalid_argument("seminorm window contains no grid points");
      m.windows_.push_back({idx.front(), idx.back()});
    }
    return m;
  }

  /// Default grid family: m in {0, 1}, j in {1, 2} (clamped to L).
  static ModelSpace grid_functions(const Grid& grid) {
    std::vector<GridSeminorm> s;
    for (double j : {1.0, 2.0})
      for (int m : {0, 1}) s.push_back({std::min(j, grid.half_width), m});
    return grid_functions(grid, std::move(s));
  }

  /// Truncated sequences (x_1..x_N) with coordinate seminorms |x_n|.
  /// `coordinates` are 0-based positions; the n-th seminorm reads coordinates[n].
  static ModelSpace sequences(std::size_t length, std::vector<std::size_t> coordinates) {
    if (length == 0) throw std::invalid_argument("sequence truncation must be positive");
    if (coordinates.empty()) throw std::invalid_argument("seminorm list must be non-empty");
    for (auto c : coordinates)
      if (c >= length) throw std::invalid_argument("seminorm coordinate out of range");
    ModelSpace m;
    m.kind_ = Kind::Sequences;
    m.sequence_coordinates_ = std::move(coordinates);
    m.dimension_ = length;
    m.seminorm_count_ = m.sequence_coordinates_.size();
    return m;
  }

  static ModelSpace sequences(std::size_t length) {
    std::vector<std::size_t> all(length);
    for (std::size_t i = 0; i < length; ++i) all[i] = i;
    return sequences(length, std::move(all));
  }

  /// n-th seminorm of (u, w, ...) is the max of the factors' n-th seminorms;
  /// factors with fewer seminorms contribute 0.
  static ModelSpace product(std::vector<ModelSpace> factors) {
    if (factors.empty()) throw std::invalid_argument("product needs at least one factor");
    ModelSpace m;
    m.kind_ = Kind::Product;
    std::size_t offset = 0;
    for (const auto& f : factors) {
      m.offsets_.push_back(offset);
      offset += f.dimension();
      m.seminorm_count_ = std::max(m.seminorm_count_, f.seminorm_count());
    }
    m.dimension_ = offset;
    m.factors_ = std::make_shared<std::vector<ModelSpace>>(std::move(factors));
    return m;
  }

  Kind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t seminorm_count() const { return seminorm_count_; }

  const Grid& grid() const {
    if (kind_ != Kind::GridFunctions) throw std::logic_error("not a grid-function space");
    return grid_;
  }
  const std::vector<GridSeminorm>& grid_seminorms() const { return grid_seminorms_; }
  const std::vector<std::size_t>& sequence_coordinates() const { return sequence_coordinates_; }

  /// Inclusive grid index range [first, second] covered by the n-th window.
  std::pair<std::size_t, std::size_t> seminorm_window(std::size_t n) const { return windows_.at(n); }

  int max_order() const {
    int m = 0;
    for (const auto& s : grid_seminorms_) m = std::max(m, s.order);
    return m;
  }

  /// x and its finite-difference derivatives up to max_order().
  std::vector<Vector> derivatives(const Vector& x) const {
    std::vector<Vector> out{x};
    for (int k = 0; k < max_order(); ++k) out.push_back(detail::first_difference(grid(), out.back()));
    return out;
  }

  const std::vector<ModelSpace>& factors() const {
    if (kind_ != Kind::Product) throw std::logic_error("not a product space");
    return *factors_;
  }
  const ModelSpace& factor(std::size_t i) const { return factors().at(i); }
  std::size_t factor_offset(std::size_t i) const { return offsets_.at(i); }

  Vector factor_slice(const Vector& x, std::size_t i) const {
    return x.segment(static_cast<Eigen::Index>(factor_offset(i)),
                     static_cast<Eigen::Index>(factor(i).dimension()));
  }

  static Vector join(const Vector& a, const Vector& b) {
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
  }

  Vector zero() const { return Vector::Zero(static_cast<Eigen::Index>(dimension_)); }

  void check(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dimension_) {
      std::ostringstream os;
      os << "dimension mismatch: expected " << dimension_ << ", got " << x.size();
      throw std::invalid_argument(os.str());
    }
    if (!x.allFinite()) throw std::invalid_argument("vector has non-finite entries");
  }

  double seminorm(std::size_t index, const Vector& x) const {
    if (index >= seminorm_count_) throw std::out_of_range("seminorm index out of range");
    check(x);
    return seminorm_unchecked(index, x);
  }

  /// All seminorms at once; derivative arrays are shared between entries.
  std::vector<double> seminorms(const Vector& x) const {
    check(x);
    std::vector<double> out(seminorm_count_, 0.0);
    switch (kind_) {
      case Kind::Sequences:
        for (std::size_t n = 0; n < seminorm_count_; ++n)
          out[n] = std::abs(x[static_cast<Eigen::Index>(sequence_coordinates_[n])]);
        break;
      case Kind::GridFunctions: {
        std::vector<Vector> derivs;
        derivs.push_back(x);
        for (std::size_t n = 0; n < seminorm_count_; ++n) {
          const int m = grid_seminorms_[n].order;
          while (static_cast<int>(derivs.size()) <= m) derivs.push_back(detail::first_difference(grid_, derivs.back()));
          out[n] = window_sup(derivs[static_cast<std::size_t>(m)], n);
        }
        break;
      }
      case Kind::Product:
        for (std::size_t i = 0; i < factors_->size(); ++i) {
          const auto part = (*factors_)[i].seminorms(factor_slice(x, i));
          for (std::size_t n = 0; n < part.size(); ++n) out[n] = std::max(out[n], part[n]);
        }
        break;
    }
    return out;
  }

  double max_seminorm(const Vector& x) const {
    const auto s = seminorms(x);
    return *std::max_element(s.begin(), s.end());
  }

  /// m(x, y) = sum_n 2^{-n} |x-y|_n / (1 + |x-y|_n), n = 1..count.
  double metric(const Vector& x, const Vector& y) const {
    check(y);
    const auto s = seminorms(x - y);
    double sum = 0.0;
    double weight = 0.5;
    for (double v : s) {
      sum += weight * v / (1.0 + v);
      weight *= 0.5;
    }
    return sum;
  }

  /// Samples a scalar function on the grid (codomain 1).
  Vector sample(const std::function<double(double)>& f) const {
    const auto& g = grid();
    if (g.codomain_dim != 1) throw std::invalid_argument("sample() requires a scalar grid");
    Vector out(static_cast<Eigen::Index>(g.points));
    for (std::size_t i = 0; i < g.points; ++i) out[static_cast<Eigen::Index>(i)] = f(g.coordinate(i));
    return out;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::Sequences:
        os << "Sequences(N=" << dimension_ << ", seminorms=" << seminorm_count_ << ")";
        break;
      case Kind::GridFunctions:
        os << "GridFunctions(L=" << grid_.half_width << ", h=" << grid_.step << ", points=" << grid_.points
           << ", dim=" << grid_.codomain_dim << (grid_.periodic ? ", periodic" : "") << ", seminorms=[";
        for (std::size_t n = 0; n < grid_seminorms_.size(); ++n)
          os << (n ? " " : "") << grid_seminorms_[n].window << ":" << grid_seminorms_[n].order;
        os << "])";
        break;
      case Kind::Product:
        os << "Product(";
        for (std::size_t i = 0; i < factors_->size(); ++i) os << (i ? " x " : "") << (*factors_)[i].describe();
        os << ")";
        break;
    }
    return os.str();
  }

 private:
  double window_sup(const Vector& values, std::size_t n) const {
    const std::size_t d = grid_.codomain_dim;
    double best = 0.0;
    for (std::size_t i = windows_[n].first; i <= windows_[n].second; ++i) {
      double sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double v = values[static_cast<Eigen::Index>(i * d + c)];
        sq += v * v;
      }
      best = std::max(best, std::sqrt(sq));
    }
    return best;
  }

  double seminorm_unchecked(std::size_t index, const Vector& x) const {
    switch (kind_) {
      case Kind::Sequences:
        return std::abs(x[static_cast<Eigen::Index>(sequence_coordinates_[index])]);
      case Kind::GridFunctions:
        return window_sup(grid_derivative(grid_, x, grid_seminorms_[index].order), index);
      case Kind::Product: {
        double best = 0.0;
        for (std::size_t i = 0; i < factors_->size(); ++i) {
          const auto& f = (*factors_)[i];
          if (index < f.seminorm_count()) best = std::max(best, f.seminorm_unchecked(index, factor_slice(x, i)));
        }
        return best;
      }
    }
    return 0.0;
  }

  Kind kind_ = Kind::Sequences;
  std::size_t dimension_ = 0;
  std::size_t seminorm_count_ = 0;
  Grid grid_{};
  std::vector<GridSeminorm> grid_seminorms_;
  std::vector<std::pair<std::size_t, std::size_t>> windows_;
  std::vector<std::size_t> sequence_coordinates_;
  std::shared_ptr<const std::vector<ModelSpace>> factors_;
  std::vector<std::size_t> offsets_;
};

using SpacePtr = std::shared_ptr<const ModelSpace>;

inline SpacePtr make_space(ModelSpace s) { return std::make_shared<const ModelSpace>(std::move(s)); }

}  // namespace spraylab
