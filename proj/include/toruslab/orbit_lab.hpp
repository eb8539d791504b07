// Orbits, box-counting density and two-set hitting times.
#pragma once

#include "toruslab/maps.hpp"
#include "toruslab/torus.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toruslab {

class OrbitError : public std::runtime_error {
 public:
  OrbitError(long index, const std::string& what) : std::runtime_error(what), index(index) {}
  long index;
};

/// Lazy orbit x0, map(x0), ..., map^steps(x0); each point wrapped. Throws OrbitError with
/// the index of the first non-finite iterate.
class Orbit {
 public:
  Orbit(const TorusMap& map, const Vec& x0, long steps);

  class iterator {
   public:
    using value_type = Vec;
    using difference_type = long;
    const Vec& operator*() const { return x_; }
    iterator& operator++();
    bool operator==(const iterator& o) const { return index_ == o.index_; }
    long index() const { return index_; }

   private:
    friend class Orbit;
    iterator(const TorusMap* map, Vec x, long index, long last)
        : map_(map), x_(std::move(x)), index_(index), last_(last) {}
    const TorusMap* map_;
    Vec x_;
    long index_, last_;
  };

  iterator begin() const { return iterator(map_, x0_, 0, steps_); }
  iterator end() const { return iterator(map_, x0_, steps_ + 1, steps_); }
  long steps() const { return steps_; }

 private:
  const TorusMap* map_;
  Vec x0_;
  long steps_;
};

/// First `steps + 1` orbit points, materialized.
std::vector<Vec> orbit_prefix(const TorusMap& map, const Vec& x0, long steps);

struct DensityReport {
  std::string tag;
  Vec seed_point;
  long iterations = 0;
  int grid = 0;
  long visited = 0, total = 0;
  double fraction = 0;
  std::optional<long> first_full;
  std::vector<std::pair<long, double>> checkpoints;  // (iterate, fraction)
  std::vector<std::uint32_t> counts;                // visits per box, first axis fastest

  nlohmann::json to_json() const;
};

/// Marks the boxes of a uniform grid^n partition visited by the orbit of x0 for
/// `iterations` steps (x0 included). Checkpoints are recorded at every power of ten and at the end.
DensityReport box_density(const TorusMap& map, const Vec& x0, int grid, long iterations);

/// Density reports for `count` random starts drawn from `seed`, run concurrently.
std::vector<DensityReport> density_experiment(const TorusMap& map, int grid, long iterations, int count,
                                              std::uint64_t seed, int tasks = 0);

struct HitResult {
  bool hit = false;
  long iterate = -1;
  long seeds = 0;
  double closest = 0;        // min distance of any image to V over the run
  long closest_iterate = 0;
  nlohmann::json to_json() const;
};

/// Seeds a grid of spacing `spacing` inside U and iterates all seeds together until one lands in V.
HitResult two_set_hitting(const TorusMap& map, const Box& U, const Box& V, long max_iter, double spacing = 1.0 / 200,
                          int tasks = 0);

/// Random box of the given side with lower corner uniform on T^n.
Box random_box(int n, double side, std::uint64_t seed, std::uint64_t index);

void write_orbit_csv(std::ostream& out, const std::vector<Vec>& points);
/// One row per visited box: box indices, box centre, visit count.
void write_density_csv(std::ostream& out, const DensityReport& rep);
/// Visit counts summed onto the (first, last) coordinate plane, one matrix row per last-axis box.
void write_density_gnuplot(std::ostream& out, const DensityReport& rep);

}  // namespace toruslab
