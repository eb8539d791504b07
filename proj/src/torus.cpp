#include "toruslab/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace toruslab {

double wrap_scalar(double x) {
  if (!std::isfinite(x)) throw DomainError("wrap: non-finite coordinate");
  double c = x - 2.0 * std::floor((x + 1.0) / 2.0);
  if (c >= 1.0) c -= 2.0;
  if (c < -1.0) c += 2.0;
  return c;
}

TorusPoint::TorusPoint(const Vec& raw) : coords_(raw.size()) {
  if (raw.size() < 1 || raw.size() > kMaxDim) throw DomainError("TorusPoint: dimension out of range");
  for (int i = 0; i < raw.size(); ++i) coords_[i] = wrap_scalar(raw[i]);
}

TorusPoint TorusPoint::from(std::span<const double> raw) {
  Vec v(static_cast<int>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) v[static_cast<int>(i)] = raw[i];
  return TorusPoint(v);
}

std::vector<double> TorusPoint::to_vector() const {
  return {coords_.data(), coords_.data() + coords_.size()};
}

TorusPoint wrap(std::span<const double> raw) { return TorusPoint::from(raw); }
TorusPoint wrap(const Vec& raw) { return TorusPoint(raw); }

Vec torus_delta(const Vec& a, const Vec& b) {
  Vec d(a.size());
  for (int i = 0; i < a.size(); ++i) d[i] = wrap_diff(a[i], b[i]);
  return d;
}

double torus_distance(const Vec& a, const Vec& b) { return torus_delta(a, b).norm(); }

Cube::Cube(double lo_, double hi_, int dim_) : lo(lo_), hi(hi_), dim(dim_) {
  if (!(lo < hi) || hi - lo >= 2.0 || dim < 1) throw DomainError("Cube: need lo < hi, hi - lo < 2, dim >= 1");
}

namespace {
// Distance from wrapped coordinate x to the circle interval [lo, hi].
double interval_gap(double x, double lo, double hi) {
  double mid = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  return std::max(0.0, std::abs(wrap_diff(x, mid)) - half);
}
}  // namespace

bool Cube::contains(std::span<const double> x) const {
  for (int i = 0; i < dim; ++i)
    if (interval_gap(x[static_cast<std::size_t>(i)], lo, hi) > 0.0) return false;
  return true;
}

double Cube::distance(std::span<const double> x) const {
  double s = 0;
  for (int i = 0; i < dim; ++i) {
    double g = interval_gap(x[static_cast<std::size_t>(i)], lo, hi);
    s += g * g;
  }
  return std::sqrt(s);
}

ConeSpec::ConeSpec(double parameter_, int split_index_) : parameter(parameter_), split_index(split_index_) {
  if (!(parameter > 0 && parameter < 3)) throw DomainError("ConeSpec: parameter must lie in (0, 3)");
  if (split_index < 1) throw DomainError("ConeSpec: split_index must be positive");
}

double cone_ratio(const Vec& v, int split_index) {
  double head = v.head(split_index).norm();
  double tail = v.tail(v.size() - split_index).norm();
  if (head == 0.0) return std::numeric_limits<double>::infinity();
  return tail / head;
}

bool cone_contains(const Vec& v, const ConeSpec& cone) {
  if (v.size() < 2 || cone.split_index >= v.size()) throw DomainError("cone_contains: need split_index < n");
  return cone_ratio(v, cone.split_index) < cone.parameter;
}

std::string to_string(CubeTag tag) {
  switch (tag) {
    case CubeTag::K0: return "K0";
    case CubeTag::K1: return "K1";
    case CubeTag::K0Fat: return "K0eps";
    case CubeTag::K1Fat: return "K1eps";
    case CubeTag::None: break;
  }
  return "none";
}

BlenderCubes::BlenderCubes(int dim, double eps)
    : k0(-1.0 / 28, 1.0 / 28, dim),
      k1(3.0 / 28, 5.0 / 28, dim),
      k0_fat(k0.fattened(eps)),
      k1_fat(k1.fattened(eps)) {}

CubeTag BlenderCubes::classify(std::span<const double> x) const {
  if (k0.contains(x)) return CubeTag::K0;
  if (k1.contains(x)) return CubeTag::K1;
  if (k0_fat.contains(x)) return CubeTag::K0Fat;
  if (k1_fat.contains(x)) return CubeTag::K1Fat;
  return CubeTag::None;
}

namespace {

constexpr double kInf = 1e30;

// 1-D squared distance transform (Felzenszwalb-Huttenlocher) on a periodic line:
// the line is tiled three times and the middle copy is kept.
void edt_periodic_1d(std::vector<double>& f, int n, std::vector<double>& work) {
  const int m = 3 * n;
  std::vector<double> g(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) g[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i % n)];
  std::vector<int> v(static_cast<std::size_t>(m));
  work.assign(static_cast<std::size_t>(m + 1), 0.0);
  int k = 0;
  v[0] = 0;
  work[0] = -kInf;
  work[1] = kInf;
  for (int q = 1; q < m; ++q) {
    double s;
    while (true) {
      int p = v[static_cast<std::size_t>(k)];
      s = ((g[static_cast<std::size_t>(q)] + double(q) * q) - (g[static_cast<std::size_t>(p)] + double(p) * p)) /
          (2.0 * (q - p));
      if (s <= work[static_cast<std::size_t>(k)] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    work[static_cast<std::size_t>(k)] = s;
    work[static_cast<std::size_t>(k + 1)] = kInf;
  }
  k = 0;
  for (int q = 0; q < m; ++q) {
    while (work[static_cast<std::size_t>(k + 1)] < q) ++k;
    if (q >= n && q < 2 * n) {
      int p = v[static_cast<std::size_t>(k)];
      f[static_cast<std::size_t>(q - n)] = double(q - p) * (q - p) + g[static_cast<std::size_t>(p)];
    }
  }
}

}  // namespace

void Box::validate() const {
  if (lo.size() != hi.size() || lo.size() < 1) throw DomainError("box bounds have mismatched dimensions");
  for (int j = 0; j < dim(); ++j)
    if (!(hi[j] > lo[j]) || hi[j] - lo[j] > 2.0) throw DomainError("box must satisfy lo < hi <= lo + 2");
}

bool Box::contains(const Vec& x) const {
  for (int j = 0; j < dim(); ++j) {
    double d = x[j] - lo[j];
    d -= 2.0 * std::floor(d / 2.0);
    if (d > hi[j] - lo[j]) return false;
  }
  return true;
}

double Box::distance(const Vec& x) const {
  double s = 0;
  for (int j = 0; j < dim(); ++j) {
    double d = x[j] - lo[j];
    d -= 2.0 * std::floor(d / 2.0);
    double w = hi[j] - lo[j];
    if (d > w) {
      double e = std::min(d - w, 2.0 - d);
      s += e * e;
    }
  }
  return std::sqrt(s);
}

InradiusEstimate inradius_estimate(const std::vector<Vec>& cloud, int k, double resolution) {
  if (cloud.size() < 2) throw DomainError("inradius_estimate: need at least 2 points");
  OccupancyGrid grid(k, resolution);
  for (const Vec& p : cloud) grid.add(p);
  return grid.inradius();
}

OccupancyGrid::OccupancyGrid(int k, double resolution) : k_(k) {
  if (k < 1 || k > 3) throw DomainError("inradius_estimate: dimension must be 1..3");
  if (!(resolution > 0) || resolution > 0.5) throw DomainError("inradius_estimate: bad resolution");
  n_ = static_cast<int>(std::lround(2.0 / resolution));
  h_ = 2.0 / n_;
  total_ = 1;
  for (int i = 0; i < k; ++i) total_ *= n_;
  if (total_ > 60'000'000L) throw DomainError("inradius_estimate: grid too large");
  occ_ = std::make_unique<std::atomic<unsigned char>[]>(static_cast<std::size_t>(total_));
  for (long i = 0; i < total_; ++i) occ_[static_cast<std::size_t>(i)].store(0, std::memory_order_relaxed);
}

void OccupancyGrid::add(const Vec& p) {
  long idx = 0;
  for (int i = k_ - 1; i >= 0; --i) {
    int c = static_cast<int>(std::floor((wrap_scalar(p[i]) + 1.0) / h_));
    c = std::clamp(c, 0, n_ - 1);
    idx = idx * n_ + c;
  }
  occ_[static_cast<std::size_t>(idx)].store(1, std::memory_order_relaxed);
}

InradiusEstimate OccupancyGrid::inradius() const {
  const int n = n_, k = k_;
  const long total = total_;
  const double h = h_;
  std::vector<unsigned char> occ(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) occ[static_cast<std::size_t>(i)] = occ_[static_cast<std::size_t>(i)].load(std::memory_order_relaxed);
  InradiusEstimate out;
  out.occupied_cells = std::count(occ.begin(), occ.end(), 1);
  if (out.occupied_cells == 0) return out;
  if (out.occupied_cells == total) {
    out.radius = std::sqrt(double(k));
    out.saturated = true;
    return out;
  }

  // Squared distance (in cells) to the nearest empty cell, separable over axes.
  std::vector<double> dist(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) dist[static_cast<std::size_t>(i)] = occ[static_cast<std::size_t>(i)] ? kInf : 0.0;
  std::vector<double> line(static_cast<std::size_t>(n)), work;
  long stride = 1;
  for (int axis = 0; axis < k; ++axis) {
    long lines = total / n;
    for (long l = 0; l < lines; ++l) {
      long low = l % stride;
      long high = l / stride;
      long base = high * stride * n + low;
      for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = dist[static_cast<std::size_t>(base + j * stride)];
      edt_periodic_1d(line, n, work);
      for (int j = 0; j < n; ++j) dist[static_cast<std::size_t>(base + j * stride)] = line[static_cast<std::size_t>(j)];
    }
    stride *= n;
  }
  double best = 0;
  for (long i = 0; i < total; ++i)
    if (occ[static_cast<std::size_t>(i)]) best = std::max(best, dist[static_cast<std::size_t>(i)]);
  // The nearest empty cell's closest point is sqrt(k)/2 cells nearer than its centre;
  // a further sqrt(k)/2 absorbs partially covered boundary cells.
  out.radius = std::max(0.0, (std::sqrt(best) - std::sqrt(double(k))) * h);
  out.radius = std::min(out.radius, std::sqrt(double(k)));
  return out;
}

}  // namespace toruslab
