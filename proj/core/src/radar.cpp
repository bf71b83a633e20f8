#include "fcomp/radar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fcomp::radar {

namespace {

constexpr std::size_t kMaxSceneDraws = 10'000;

double range_of(const Target& t, const RadarConfig& cfg) {
  return coupled_range(t.range, t.speed, cfg);
}

}  // namespace

double RadarConfig::range_rate() const noexcept {
  return 2.0 * std::numbers::pi * (bandwidth / static_cast<double>(samples_per_chirp)) *
         (2.0 / speed_of_light);
}

double RadarConfig::velocity_rate() const noexcept {
  return 2.0 * std::numbers::pi * carrier * chirp_duration() * (2.0 / speed_of_light);
}

void RadarConfig::validate() const {
  if (!(bandwidth > 0.0) || !(carrier > 0.0) || !(sample_period > 0.0) ||
      !(speed_of_light > 0.0)) {
    throw std::invalid_argument("radar constants must be positive");
  }
  if (samples_per_chirp == 0 || chirp_count == 0) {
    throw std::invalid_argument("radar sample and chirp counts must be positive");
  }
}

Eigen::VectorXcd range_sub_atom(double coupled, const RadarConfig& cfg) {
  return ExponentialSubAtom(cfg.samples_per_chirp, cfg.range_rate()).value(coupled);
}

Eigen::VectorXcd range_sub_atom_derivative(double coupled, const RadarConfig& cfg) {
  return ExponentialSubAtom(cfg.samples_per_chirp, cfg.range_rate()).derivative(coupled);
}

Eigen::VectorXcd velocity_sub_atom(double speed, const RadarConfig& cfg) {
  return ExponentialSubAtom(cfg.chirp_count, cfg.velocity_rate()).value(speed);
}

Eigen::VectorXcd velocity_sub_atom_derivative(double speed, const RadarConfig& cfg) {
  return ExponentialSubAtom(cfg.chirp_count, cfg.velocity_rate()).derivative(speed);
}

SubAtomPtr range_generator(const RadarConfig& cfg) {
  return std::make_shared<ExponentialSubAtom>(cfg.samples_per_chirp, cfg.range_rate());
}

SubAtomPtr velocity_generator(const RadarConfig& cfg) {
  return std::make_shared<ExponentialSubAtom>(cfg.chirp_count, cfg.velocity_rate());
}

double coupled_range(double range, double speed, const RadarConfig& cfg) {
  return range + cfg.coupling_factor() * speed;
}

double decouple_range(double coupled, double speed, const RadarConfig& cfg) {
  return coupled - cfg.coupling_factor() * speed;
}

ParameterDomain unambiguous_domain(const RadarConfig& cfg) {
  cfg.validate();
  return ParameterDomain({Interval{0.0, cfg.max_range()},
                          Interval{-cfg.max_speed(), cfg.max_speed()}});
}

InterpolatedDictionary make_dictionary(const RadarConfig& cfg, std::size_t n_range,
                                       std::size_t n_speed) {
  const std::size_t counts[] = {n_range, n_speed};
  return InterpolatedDictionary({range_generator(cfg), velocity_generator(cfg)},
                                SeparableGrid::uniform(unambiguous_domain(cfg), counts));
}

ComplexTensor synthesize_measurement(const Scene& scene, const RadarConfig& cfg,
                                     std::mt19937_64& rng) {
  cfg.validate();
  ComplexTensor y(Shape{cfg.samples_per_chirp, cfg.chirp_count});
  for (const Target& t : scene.targets) {
    y.add_scaled(t.amplitude, outer_product({range_sub_atom(range_of(t, cfg), cfg),
                                             velocity_sub_atom(t.speed, cfg)}));
  }
  if (scene.noise_sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, scene.noise_sigma / std::sqrt(2.0));
    for (Complex& x : y.data()) {
      const double re = normal(rng);
      const double im = normal(rng);
      x += Complex(re, im);
    }
  }
  return y;
}

SceneBounds default_scene_bounds(const RadarConfig& cfg) {
  const double dr = cfg.range_cell();
  const double dv = cfg.velocity_cell();
  return {Interval{dr, cfg.max_range() - dr}, Interval{-cfg.max_speed() + dv, cfg.max_speed() - dv}};
}

double normalized_distance(const RangeVelocity& a, const RangeVelocity& b, const RadarConfig& cfg) {
  return std::hypot((a.range - b.range) / cfg.range_cell(), (a.speed - b.speed) / cfg.velocity_cell());
}

Scene generate_random_scene(std::size_t k, const RadarConfig& cfg, const SceneBounds& bounds,
                            double min_separation, std::mt19937_64& rng) {
  cfg.validate();
  if (!(bounds.coupled_range.lo < bounds.coupled_range.hi) || !(bounds.speed.lo < bounds.speed.hi)) {
    throw std::invalid_argument("scene bounds must be non-empty intervals");
  }
  if (bounds.coupled_range.lo < 0.0 || bounds.coupled_range.hi > cfg.max_range() ||
      bounds.speed.lo < -cfg.max_speed() || bounds.speed.hi > cfg.max_speed()) {
    throw std::invalid_argument("scene bounds exceed the unambiguous range/velocity box");
  }

  std::uniform_real_distribution<double> range_dist(bounds.coupled_range.lo, bounds.coupled_range.hi);
  std::uniform_real_distribution<double> speed_dist(bounds.speed.lo, bounds.speed.hi);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  Scene scene;
  std::vector<RangeVelocity> placed;  // in (r', v)
  std::size_t draws = 0;
  while (placed.size() < k) {
    if (draws++ >= kMaxSceneDraws) {
      throw InfeasibleSceneError("could not place " + std::to_string(k) + " targets " +
                                 std::to_string(min_separation) + " cells apart in " +
                                 std::to_string(kMaxSceneDraws) + " draws");
    }
    const RangeVelocity candidate{range_dist(rng), speed_dist(rng)};
    const bool separated = std::all_of(placed.begin(), placed.end(), [&](const RangeVelocity& p) {
      return normalized_distance(candidate, p, cfg) >= min_separation;
    });
    if (!separated) continue;
    placed.push_back(candidate);
    const double phase = phase_dist(rng);
    scene.targets.push_back(Target{decouple_range(candidate.range, candidate.speed, cfg),
                                   candidate.speed, std::polar(1.0, phase)});
  }
  return scene;
}

Scene generate_on_grid_scene(std::size_t k, const RadarConfig& cfg, const SeparableGrid& grid,
                             std::size_t min_node_gap, std::mt19937_64& rng) {
  cfg.validate();
  if (grid.rank() != 2) throw std::invalid_argument("radar grids have two axes");
  std::uniform_int_distribution<std::size_t> range_idx(0, grid.count(0) - 1);
  std::uniform_int_distribution<std::size_t> speed_idx(0, grid.count(1) - 1);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  // An axis whose grid spans one full period of the sub-atom wraps around:
  // its first and last nodes are neighbours.
  const double periods[2] = {cfg.max_range(), 2.0 * cfg.max_speed()};
  bool wraps[2];
  for (std::size_t l = 0; l < 2; ++l) {
    const double span = static_cast<double>(grid.count(l)) * grid.step(l);
    wraps[l] = std::abs(span - periods[l]) <= 1e-9 * periods[l];
  }
  const auto gap = [&](std::size_t l, std::size_t a, std::size_t b) {
    const std::size_t d = a > b ? a - b : b - a;
    return wraps[l] ? std::min(d, grid.count(l) - d) : d;
  };

  Scene scene;
  std::vector<MultiIndex> placed;
  std::size_t draws = 0;
  while (placed.size() < k) {
    if (draws++ >= kMaxSceneDraws) {
      throw InfeasibleSceneError("could not place " + std::to_string(k) + " on-grid targets");
    }
    MultiIndex candidate{range_idx(rng), speed_idx(rng)};
    const bool separated = std::all_of(placed.begin(), placed.end(), [&](const MultiIndex& p) {
      return std::max(gap(0, p[0], candidate[0]), gap(1, p[1], candidate[1])) >= min_node_gap;
    });
    if (!separated) continue;
    const double coupled = grid.node(0, candidate[0]);
    const double speed = grid.node(1, candidate[1]);
    placed.push_back(std::move(candidate));
    scene.targets.push_back(
        Target{decouple_range(coupled, speed, cfg), speed, std::polar(1.0, phase_dist(rng))});
  }
  return scene;
}

MissEvaluation evaluate_misses(std::span<const RangeVelocity> estimates, const Scene& truth,
                               const RadarConfig& cfg) {
  const std::size_t nt = truth.targets.size();
  const std::size_t ne = estimates.size();

  struct Pair {
    double distance;
    std::size_t target;
    std::size_t estimate;
  };
  std::vector<Pair> pairs;
  pairs.reserve(nt * ne);
  for (std::size_t t = 0; t < nt; ++t) {
    const RangeVelocity tv{truth.targets[t].range, truth.targets[t].speed};
    for (std::size_t e = 0; e < ne; ++e) {
      pairs.push_back({normalized_distance(estimates[e], tv, cfg), t, e});
    }
  }
  // Greedy nearest-pair: repeatedly take the globally closest unmatched pair.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.target < b.target;
  });

  MissEvaluation out;
  out.distances.assign(nt, std::numeric_limits<double>::infinity());
  std::vector<bool> target_used(nt, false);
  std::vector<bool> estimate_used(ne, false);
  for (const Pair& p : pairs) {
    if (target_used[p.target] || estimate_used[p.estimate]) continue;
    target_used[p.target] = true;
    estimate_used[p.estimate] = true;
    out.distances[p.target] = p.distance;
  }
  for (double d : out.distances) {
    if (!(d < 1.0)) ++out.misses;
  }
  return out;
}

}  // namespace fcomp::radar
