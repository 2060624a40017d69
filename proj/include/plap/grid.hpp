#pragma once

// Uniform cell-centered Cartesian grid on the box [-L, L]^n (n = 1 or 2),
// cell fields, discrete norms and two-point face gradients.
//
// Cell (i, j) has linear index i + N * j; axis 0 varies fastest.
// Faces normal to an axis are numbered 0..N along that axis; face k sits
// between cells k-1 and k, and faces 0 and N touch the ghost layer, which
// always holds the value 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

using Vec = std::array<double, 2>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class GridSpec {
 public:
  GridSpec() = default;

  /// Validates (n, L, N) and returns the grid; throws std::invalid_argument.
  static GridSpec build(int n, double half_width, int cells_per_axis) {
    if (n != 1 && n != 2) {
      throw std::invalid_argument("grid dimension must be 1 or 2, got " + std::to_string(n));
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw std::invalid_argument("grid half-width must be positive and finite");
    }
    if (cells_per_axis < 4 || cells_per_axis % 2 != 0) {
      throw std::invalid_argument("cells per axis must be even and >= 4, got " +
                                  std::to_string(cells_per_axis));
    }
    GridSpec g;
    g.dim_ = n;
    g.half_width_ = half_width;
    g.cells_ = cells_per_axis;
    g.spacing_ = 2.0 * half_width / cells_per_axis;
    return g;
  }

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int cells_per_axis() const { return cells_; }
  double spacing() const { return spacing_; }

  std::size_t cell_count() const {
    return dim_ == 1 ? static_cast<std::size_t>(cells_)
                     : static_cast<std::size_t>(cells_) * static_cast<std::size_t>(cells_);
  }

  /// h^n, the measure of one cell.
  double cell_volume() const { return dim_ == 1 ? spacing_ : spacing_ * spacing_; }

  /// Measure of a face, h^(n-1).
  double face_area() const { return dim_ == 1 ? 1.0 : spacing_; }

  double center_coord(int i) const { return -half_width_ + (i + 0.5) * spacing_; }
  double face_coord(int k) const { return -half_width_ + k * spacing_; }

  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells_) * static_cast<std::size_t>(j);
  }

  std::array<int, 2> cell_ij(std::size_t cell) const {
    return {static_cast<int>(cell % cells_), static_cast<int>(cell / cells_)};
  }

  Vec center(std::size_t cell) const {
    const auto [i, j] = cell_ij(cell);
    return {center_coord(i), dim_ == 2 ? center_coord(j) : 0.0};
  }

  /// Faces normal to one axis: (N + 1) * N^(n-1).
  std::size_t faces_per_axis() const {
    return dim_ == 1 ? static_cast<std::size_t>(cells_ + 1)
                     : static_cast<std::size_t>(cells_ + 1) * static_cast<std::size_t>(cells_);
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int dim_ = 1;
  double half_width_ = 1.0;
  int cells_ = 4;
  double spacing_ = 0.5;
};

/// One face of the grid with its two neighbouring cells (-1 marks the ghost).
struct FaceRef {
  int axis = 0;
  std::size_t face = 0;       // index within the axis
  std::ptrdiff_t left = -1;   // cell on the negative side
  std::ptrdiff_t right = -1;  // cell on the positive side
  Vec center{};

  bool on_boundary() const { return left < 0 || right < 0; }
};

/// Calls fn(const FaceRef&) for every face, axis by axis, in index order.
template <class Fn>
void for_each_face(const GridSpec& grid, Fn&& fn) {
  const int N = grid.cells_per_axis();
  const int rows = grid.dim() == 2 ? N : 1;
  FaceRef ref;
  // axis 0: face k of row j, index k + (N + 1) j
  ref.axis = 0;
  for (int j = 0; j < rows; ++j) {
    for (int k = 0; k <= N; ++k) {
      ref.face = static_cast<std::size_t>(k) + static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(j);
      ref.left = k > 0 ? static_cast<std::ptrdiff_t>(grid.index(k - 1, j)) : -1;
      ref.right = k < N ? static_cast<std::ptrdiff_t>(grid.index(k, j)) : -1;
      ref.center = {grid.face_coord(k), grid.dim() == 2 ? grid.center_coord(j) : 0.0};
      fn(static_cast<const FaceRef&>(ref));
    }
  }
  if (grid.dim() == 1) return;
  // axis 1: face k of column i, index i + N k
  ref.axis = 1;
  for (int k = 0; k <= N; ++k) {
    for (int i = 0; i < N; ++i) {
      ref.face = static_cast<std::size_t>(i) + static_cast<std::size_t>(N) * static_cast<std::size_t>(k);
      ref.left = k > 0 ? static_cast<std::ptrdiff_t>(grid.index(i, k - 1)) : -1;
      ref.right = k < N ? static_cast<std::ptrdiff_t>(grid.index(i, k)) : -1;
      ref.center = {grid.center_coord(i), grid.face_coord(k)};
      fn(static_cast<const FaceRef&>(ref));
    }
  }
}

/// Value on either side of a face, with the ghost value 0 outside the box.
inline double side_value(const std::vector<double>& values, std::ptrdiff_t cell) {
  return cell < 0 ? 0.0 : values[static_cast<std::size_t>(cell)];
}

/// Scalar cell data on a grid at time t.
class Field {
 public:
  Field() = default;

  Field(GridSpec grid, std::vector<double> values, double time = 0.0)
      : grid_(grid), values_(std::move(values)), time_(time) {
    if (values_.size() != grid_.cell_count()) {
      throw std::invalid_argument("field value count " + std::to_string(values_.size()) +
                                  " does not match cell count " + std::to_string(grid_.cell_count()));
    }
    if (!(time_ >= 0.0) || !std::isfinite(time_)) {
      throw std::invalid_argument("field time must be finite and nonnegative");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("field values must be finite");
    }
  }

  static Field zeros(const GridSpec& grid, double time = 0.0) {
    return Field(grid, std::vector<double>(grid.cell_count(), 0.0), time);
  }

  /// Samples fn(x) at every cell center.
  template <class Fn>
  static Field sample(const GridSpec& grid, Fn&& fn, double time = 0.0) {
    std::vector<double> v(grid.cell_count());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = fn(grid.center(c));
    return Field(grid, std::move(v), time);
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double time() const { return time_; }
  double operator[](std::size_t c) const { return values_[c]; }
  std::size_t size() const { return values_.size(); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
  double time_ = 0.0;
};

/// Discrete L^q norm (sum |u|^q h^n)^(1/q); q = kInfinity gives max |u|.
inline double lq_norm(const std::vector<double>& values, const GridSpec& grid, double q) {
  if (std::isnan(q) || q < 1.0) {
    throw std::invalid_argument("norm exponent must be >= 1");
  }
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (q == 1.0) {
    for (double v : values) s += std::abs(v);
    return s * grid.cell_volume();
  }
  if (q == 2.0) {
    for (double v : values) s += v * v;
    return std::sqrt(s * grid.cell_volume());
  }
  for (double v : values) s += std::pow(std::abs(v), q);
  return std::pow(s * grid.cell_volume(), 1.0 / q);
}

inline double lq_norm(const Field& field, double q) { return lq_norm(field.values(), field.grid(), q); }

/// sum |u|^q h^n without the outer root (finite q only).
inline double lq_power(const std::vector<double>& values, const GridSpec& grid, double q) {
  if (std::isnan(q) || q < 1.0 || std::isinf(q)) {
    throw std::invalid_argument("power-sum exponent must be finite and >= 1");
  }
  double s = 0.0;
  for (double v : values) s += (q == 2.0) ? v * v : std::pow(std::abs(v), q);
  return s * grid.cell_volume();
}

/// sum u h^n
inline double mass(const std::vector<double>& values, const GridSpec& grid) {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

inline double mass(const Field& field) { return mass(field.values(), field.grid()); }

/// One normal gradient component per face, stored per axis.
struct FaceGradients {
  GridSpec grid;
  std::array<std::vector<double>, 2> per_axis;

  double at(int axis, std::size_t face) const { return per_axis[static_cast<std::size_t>(axis)][face]; }
};

/// Two-point difference (u_right - u_left) / h across every face, ghost value 0.
inline FaceGradients face_gradients(const Field& field) {
  const GridSpec& grid = field.grid();
  FaceGradients out;
  out.grid = grid;
  for (int a = 0; a < grid.dim(); ++a) out.per_axis[static_cast<std::size_t>(a)].resize(grid.faces_per_axis());
  const double inv_h = 1.0 / grid.spacing();
  const auto& u = field.values();
  for_each_face(grid, [&](const FaceRef& f) {
    out.per_axis[static_cast<std::size_t>(f.axis)][f.face] =
        (side_value(u, f.right) - side_value(u, f.left)) * inv_h;
  });
  return out;
}

enum class FaceSet { all, interior };

/// sum over faces |grad|^p h^n. FaceSet::interior drops the faces that touch the ghost layer.
inline double grad_lp_integral(const Field& field, double p, FaceSet faces = FaceSet::all) {
  if (!(p > 2.0)) throw std::invalid_argument("gradient exponent p must exceed 2");
  const auto grads = face_gradients(field);
  double s = 0.0;
  for_each_face(field.grid(), [&](const FaceRef& f) {
    if (faces == FaceSet::interior && f.on_boundary()) return;
    const double g = std::abs(grads.at(f.axis, f.face));
    s += std::pow(g, p);
  });
  return s * field.grid().cell_volume();
}

/// True when every nonzero value lies in the inner box [-L/2, L/2]^n.
inline bool supported_in_inner_half(const Field& field) {
  const GridSpec& grid = field.grid();
  const double limit = 0.5 * grid.half_width();
  for (std::size_t c = 0; c < field.size(); ++c) {
    if (field[c] == 0.0) continue;
    const Vec x = grid.center(c);
    if (std::abs(x[0]) > limit || (grid.dim() == 2 && std::abs(x[1]) > limit)) return false;
  }
  return true;
}

}  // namespace plap
