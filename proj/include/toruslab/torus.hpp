// Torus geometry on T^n = R^n / 2Z^n with coordinates in [-1, 1).
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <atomic>
#include <memory>
#include <vector>

namespace toruslab {

inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reduce a real into [-1, 1) modulo 2.
double wrap_scalar(double x);

/// Signed representative of a - b modulo 2, in [-1, 1).
inline double wrap_diff(double a, double b) { return wrap_scalar(a - b); }

/// A point of T^n. Every coordinate is kept in [-1, 1).
class TorusPoint {
 public:
  TorusPoint() = default;
  /// Wraps `raw`; throws DomainError on non-finite input or bad dimension.
  explicit TorusPoint(const Vec& raw);
  static TorusPoint from(std::span<const double> raw);

  int dim() const { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[i]; }
  const Vec& coords() const { return coords_; }
  std::vector<double> to_vector() const;

 private:
  Vec coords_;
};

TorusPoint wrap(std::span<const double> raw);
TorusPoint wrap(const Vec& raw);

/// Componentwise wrapped difference a - b.
Vec torus_delta(const Vec& a, const Vec& b);
/// Euclidean torus distance (minimal image).
double torus_distance(const Vec& a, const Vec& b);

struct TangentVector {
  TorusPoint base;
  Vec components;
};

/// Cube [lo, hi]^dim in the first factor T^{n-1}.
struct Cube {
  double lo = 0;
  double hi = 0;
  int dim = 1;

  Cube(double lo_, double hi_, int dim_);
  bool contains(std::span<const double> x) const;
  Cube fattened(double eps) const { return Cube(lo - eps, hi + eps, dim); }
  /// Euclidean distance from x to the cube in the torus metric.
  double distance(std::span<const double> x) const;
};

/// Axis-aligned box [lo, hi] with per-axis bounds; membership and distance wrap.
struct Box {
  Vec lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  /// Throws DomainError unless lo < hi <= lo + 2 on every axis.
  void validate() const;
  bool contains(const Vec& x) const;
  double distance(const Vec& x) const;
};

/// Cone {v : |tail| / |head| < parameter}, head = first split_index components.
struct ConeSpec {
  double parameter = 0.1;
  int split_index = 1;

  ConeSpec(double parameter_, int split_index_);
};

/// Tail/head norm ratio; +inf when the head block vanishes.
double cone_ratio(const Vec& v, int split_index);
bool cone_contains(const Vec& v, const ConeSpec& cone);
inline bool cone_contains(const TangentVector& v, const ConeSpec& cone) {
  return cone_contains(v.components, cone);
}

enum class CubeTag { None, K0, K1, K0Fat, K1Fat };
std::string to_string(CubeTag tag);

/// The blender cubes K0 = [-1/28, 1/28]^d, K1 = [3/28, 5/28]^d and their eps-fattenings.
struct BlenderCubes {
  Cube k0;
  Cube k1;
  Cube k0_fat;
  Cube k1_fat;

  BlenderCubes(int dim, double eps);
  /// Most specific containing cube (K0/K1 before their fattenings).
  CubeTag classify(std::span<const double> x) const;
  bool in_fat(std::span<const double> x) const {
    return k0_fat.contains(x) || k1_fat.contains(x);
  }
};

/// Result of grid-ball inradius estimation.
struct InradiusEstimate {
  double radius = 0;
  bool saturated = false;  // every grid cell occupied
  long occupied_cells = 0;
};

/// Lower estimate of the k-inradius of a point cloud in T^k sampling a disk image.
/// Cloud points are rasterised onto a grid of spacing `resolution`; the radius is the
/// largest ball around an occupied cell whose covering cells are all occupied.
/// A fully covered torus reports sqrt(k) and `saturated`.
InradiusEstimate inradius_estimate(const std::vector<Vec>& cloud, int k,
                                   double resolution = 1.0 / 400.0);

/// Raster of occupied cells on T^k; add() may be called concurrently.
class OccupancyGrid {
 public:
  OccupancyGrid(int k, double resolution = 1.0 / 400.0);
  int dim() const { return k_; }
  double cell() const { return h_; }
  /// Marks the cell holding the first k coordinates of p.
  void add(const Vec& p);
  InradiusEstimate inradius() const;

 private:
  int k_, n_;
  double h_;
  long total_;
  std::unique_ptr<std::atomic<unsigned char>[]> occ_;
};

}  // namespace toruslab
