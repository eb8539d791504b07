#include "toruslab/orbit_lab.hpp"

#include "toruslab/parallel.hpp"
#include "toruslab/rng.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>

namespace toruslab {

namespace {

std::vector<double> as_vector(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec checked_step(const TorusMap& map, const Vec& x, long index) {
  Vec y = map.apply(x);
  if (!y.allFinite()) throw OrbitError(index, "non-finite orbit point at iterate " + std::to_string(index));
  return y;
}

long box_index(const Vec& x, int grid) {
  long idx = 0;
  for (int j = static_cast<int>(x.size()) - 1; j >= 0; --j) {
    int c = static_cast<int>(std::floor((x[j] + 1.0) * 0.5 * grid));
    idx = idx * grid + std::clamp(c, 0, grid - 1);
  }
  return idx;
}

}  // namespace

Orbit::Orbit(const TorusMap& map, const Vec& x0, long steps) : map_(&map), steps_(steps) {
  if (steps < 0) throw DomainError("orbit length must be non-negative");
  if (x0.size() != map.dim()) throw DomainError("orbit start has the wrong dimension");
  if (!x0.allFinite()) throw OrbitError(0, "non-finite orbit start");
  x0_ = wrap(x0).coords();
}

Orbit::iterator& Orbit::iterator::operator++() {
  ++index_;
  if (index_ <= last_) x_ = checked_step(*map_, x_, index_);
  return *this;
}

std::vector<Vec> orbit_prefix(const TorusMap& map, const Vec& x0, long steps) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(steps + 1));
  for (const Vec& x : Orbit(map, x0, steps)) out.push_back(x);
  return out;
}

nlohmann::json DensityReport::to_json() const {
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& [k, f] : checkpoints) cps.push_back({{"iterate", k}, {"fraction", f}});
  nlohmann::json j{{"map", tag},
                   {"seed_point", as_vector(seed_point)},
                   {"iterations", iterations},
                   {"grid", grid},
                   {"visited", visited},
                   {"total", total},
                   {"fraction", fraction},
                   {"checkpoints", cps}};
  j["first_full"] = first_full ? nlohmann::json(*first_full) : nlohmann::json(nullptr);
  return j;
}

DensityReport box_density(const TorusMap& map, const Vec& x0, int grid, long iterations) {
  const int n = map.dim();
  if (grid < 2) throw DomainError("density grid needs at least 2 boxes per axis");
  if (iterations < 0) throw DomainError("negative iteration budget");
  DensityReport rep;
  rep.tag = map.tag();
  rep.grid = grid;
  rep.iterations = iterations;
  rep.total = 1;
  for (int j = 0; j < n; ++j) {
    rep.total *= grid;
    if (rep.total > 100'000'000L) throw DomainError("density grid too large");
  }
  rep.counts.assign(static_cast<std::size_t>(rep.total), 0);
  Vec x = wrap(x0).coords();
  rep.seed_point = x;
  long next_checkpoint = 1;
  for (long k = 0;; ++k) {
    auto& c = rep.counts[static_cast<std::size_t>(box_index(x, grid))];
    if (c == 0) {
      ++rep.visited;
      if (rep.visited == rep.total) rep.first_full = k;
    }
    if (c < std::numeric_limits<std::uint32_t>::max()) ++c;
    if (k + 1 == next_checkpoint || k == iterations) {
      rep.checkpoints.emplace_back(k, static_cast<double>(rep.visited) / rep.total);
      if (k + 1 == next_checkpoint) next_checkpoint *= 10;
    }
    if (k == iterations) break;
    x = checked_step(map, x, k + 1);
  }
  rep.fraction = static_cast<double>(rep.visited) / rep.total;
  return rep;
}

std::vector<DensityReport> density_experiment(const TorusMap& map, int grid, long iterations, int count,
                                              std::uint64_t seed, int tasks) {
  std::vector<DensityReport> out(static_cast<std::size_t>(std::max(count, 0)));
  parallel_for(count, tasks, [&](long i) {
    auto rng = block_rng(seed, static_cast<std::uint64_t>(i), 0xde5);
    std::uniform_real_distribution<double> U(-1, 1);
    Vec x0(map.dim());
    for (int j = 0; j < map.dim(); ++j) x0[j] = U(rng);
    out[static_cast<std::size_t>(i)] = box_density(map, x0, grid, iterations);
  });
  return out;
}

nlohmann::json HitResult::to_json() const {
  return {{"hit", hit}, {"iterate", iterate}, {"seeds", seeds}, {"closest", closest}, {"closest_iterate", closest_iterate}};
}

HitResult two_set_hitting(const TorusMap& map, const Box& U, const Box& V, long max_iter, double spacing, int tasks) {
  const int n = map.dim();
  U.validate();
  V.validate();
  if (U.dim() != n || V.dim() != n) throw DomainError("boxes have the wrong dimension");
  if (!(spacing > 0) || max_iter < 0) throw DomainError("bad hitting arguments");
  std::vector<int> per_axis(static_cast<std::size_t>(n));
  long seeds = 1;
  for (int j = 0; j < n; ++j) {
    per_axis[static_cast<std::size_t>(j)] = std::max(1, static_cast<int>(std::floor((U.hi[j] - U.lo[j]) / spacing + 1e-9)));
    seeds *= per_axis[static_cast<std::size_t>(j)];
  }
  if (seeds > 10'000'000L) throw DomainError("too many hitting seeds");

  std::atomic<long> best{std::numeric_limits<long>::max()};
  struct Closest {
    double d = std::numeric_limits<double>::infinity();
    long k = 0;
  };
  std::vector<Closest> closest(static_cast<std::size_t>(seeds));
  parallel_for(seeds, tasks, [&](long s) {
    Vec x(n);
    long rest = s;
    for (int j = 0; j < n; ++j) {
      int m = per_axis[static_cast<std::size_t>(j)];
      x[j] = U.lo[j] + (U.hi[j] - U.lo[j]) * (static_cast<double>(rest % m) + 0.5) / m;
      rest /= m;
    }
    x = wrap(x).coords();
    Closest& c = closest[static_cast<std::size_t>(s)];
    for (long k = 0; k <= max_iter && k < best.load(std::memory_order_relaxed); ++k) {
      if (k > 0) x = checked_step(map, x, k);
      double d = V.distance(x);
      if (d < c.d) c = {d, k};
      if (V.contains(x)) {
        long cur = best.load();
        while (k < cur && !best.compare_exchange_weak(cur, k)) {
        }
        break;
      }
    }
  });
  HitResult r;
  r.seeds = seeds;
  if (best.load() != std::numeric_limits<long>::max()) {
    r.hit = true;
    r.iterate = best.load();
    r.closest = 0;
    r.closest_iterate = r.iterate;
    return r;
  }
  r.closest = std::numeric_limits<double>::infinity();
  for (const auto& c : closest)
    if (c.d < r.closest || (c.d == r.closest && c.k < r.closest_iterate)) {
      r.closest = c.d;
      r.closest_iterate = c.k;
    }
  return r;
}

Box random_box(int n, double side, std::uint64_t seed, std::uint64_t index) {
  if (!(side > 0 && side <= 2)) throw DomainError("box side must lie in (0, 2]");
  auto rng = block_rng(seed, index, 0xb0c);
  std::uniform_real_distribution<double> U(-1, 1);
  Box b{Vec(n), Vec(n)};
  for (int j = 0; j < n; ++j) {
    b.lo[j] = U(rng);
    b.hi[j] = b.lo[j] + side;
  }
  return b;
}

void write_orbit_csv(std::ostream& out, const std::vector<Vec>& points) {
  if (points.empty()) return;
  const int n = static_cast<int>(points.front().size());
  out << "index";
  for (int j = 0; j < n; ++j) out << ",x" << j + 1;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << i;
    for (int j = 0; j < n; ++j) out << ',' << points[i][j];
    out << '\n';
  }
}

void write_density_csv(std::ostream& out, const DensityReport& rep) {
  const int n = static_cast<int>(rep.seed_point.size());
  for (int j = 0; j < n; ++j) out << 'i' << j + 1 << ',';
  for (int j = 0; j < n; ++j) out << 'c' << j + 1 << ',';
  out << "visits\n" << std::setprecision(10);
  const double h = 2.0 / rep.grid;
  for (long idx = 0; idx < rep.total; ++idx) {
    auto v = rep.counts[static_cast<std::size_t>(idx)];
    if (v == 0) continue;
    std::vector<long> c(static_cast<std::size_t>(n));
    long rest = idx;
    for (int j = 0; j < n; ++j) {
      c[static_cast<std::size_t>(j)] = rest % rep.grid;
      rest /= rep.grid;
    }
    for (int j = 0; j < n; ++j) out << c[static_cast<std::size_t>(j)] << ',';
    for (int j = 0; j < n; ++j) out << -1.0 + h * (c[static_cast<std::size_t>(j)] + 0.5) << ',';
    out << v << '\n';
  }
}

void write_density_gnuplot(std::ostream& out, const DensityReport& rep) {
  const int n = static_cast<int>(rep.seed_point.size());
  const int g = rep.grid;
  std::vector<std::uint64_t> plane(static_cast<std::size_t>(g) * g, 0);
  long stride_last = 1;
  for (int j = 0; j + 1 < n; ++j) stride_last *= g;
  for (long idx = 0; idx < rep.total; ++idx) {
    long first = idx % g, last = (idx / stride_last) % g;
    plane[static_cast<std::size_t>(last * g + first)] += rep.counts[static_cast<std::size_t>(idx)];
  }
  out << "# visits on the (x1, x" << n << ") plane; row = x" << n << " box, column = x1 box\n";
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) out << (c ? " " : "") << plane[static_cast<std::size_t>(r * g + c)];
    out << '\n';
  }
}

}  // namespace toruslab
