#pragma once

// FMCW chirp radar instantiation of a two-axis factorizable dictionary.
//
// After demodulation, a point target at range r with radial speed v contributes
//     alpha * exp(-j 2pi (B/Ms)(2r'/c) m_s) * exp(-j 2pi f0 Ms Ts (2v/c) m_c)
// to sample m_s of chirp m_c, with the coupled range r' = r + (f0 Ms Ts / B) v.
// The measurement tensor is Ms x Mc (fast time, slow time) and the solver grid
// runs over (r', v), the axes in which the model separates exactly.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fcomp/dictionary.hpp"
#include "fcomp/tensor.hpp"

namespace fcomp::radar {

inline constexpr double kSpeedOfLight = 299'792'458.0;

struct RadarConfig {
  double bandwidth = 200e6;     // B [Hz]
  double carrier = 24e9;        // f0 [Hz]
  double sample_period = 5e-6;  // Ts [s]
  std::size_t samples_per_chirp = 16;  // Ms
  std::size_t chirp_count = 16;        // Mc
  double speed_of_light = kSpeedOfLight;

  /// Tc = Ms * Ts.
  double chirp_duration() const noexcept {
    return static_cast<double>(samples_per_chirp) * sample_period;
  }
  /// Range resolution cell c / (2B).
  double range_cell() const noexcept { return speed_of_light / (2.0 * bandwidth); }
  /// Velocity cell c / (4 f0 Mc Tc) used by the miss metric.
  double velocity_cell() const noexcept {
    return speed_of_light /
           (4.0 * carrier * static_cast<double>(chirp_count) * chirp_duration());
  }
  /// Coupled ranges are unambiguous on [0, Ms c / (2B)).
  double max_range() const noexcept {
    return static_cast<double>(samples_per_chirp) * range_cell();
  }
  /// Speeds are unambiguous on [-c / (4 f0 Ms Ts), c / (4 f0 Ms Ts)).
  double max_speed() const noexcept {
    return speed_of_light / (4.0 * carrier * chirp_duration());
  }
  /// f0 Ms Ts / B, metres of apparent range per m/s of speed.
  double coupling_factor() const noexcept { return carrier * chirp_duration() / bandwidth; }
  /// Phase rate of the range sub-atom per metre of coupled range.
  double range_rate() const noexcept;
  /// Phase rate of the velocity sub-atom per m/s.
  double velocity_rate() const noexcept;

  /// Throws std::invalid_argument unless every constant is positive.
  void validate() const;
};

struct Target {
  double range = 0.0;  // r [m]
  double speed = 0.0;  // v [m/s]
  Complex amplitude{1.0, 0.0};
};

struct Scene {
  std::vector<Target> targets;
  double noise_sigma = 0.0;
};

struct RangeVelocity {
  double range = 0.0;
  double speed = 0.0;
};

class InfeasibleSceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Eigen::VectorXcd range_sub_atom(double coupled_range, const RadarConfig& cfg);
Eigen::VectorXcd range_sub_atom_derivative(double coupled_range, const RadarConfig& cfg);
Eigen::VectorXcd velocity_sub_atom(double speed, const RadarConfig& cfg);
Eigen::VectorXcd velocity_sub_atom_derivative(double speed, const RadarConfig& cfg);

/// Sub-atom generators for the (r', v) axes.
SubAtomPtr range_generator(const RadarConfig& cfg);
SubAtomPtr velocity_generator(const RadarConfig& cfg);

double coupled_range(double range, double speed, const RadarConfig& cfg);
double decouple_range(double coupled, double speed, const RadarConfig& cfg);

/// [0, max_range) x [-max_speed, max_speed).
ParameterDomain unambiguous_domain(const RadarConfig& cfg);

/// Cell-centred grid with n_range x n_speed nodes over the unambiguous domain.
InterpolatedDictionary make_dictionary(const RadarConfig& cfg, std::size_t n_range,
                                       std::size_t n_speed);

/// Sum of alpha_k psi_1(r'_k) (x) psi_2(v_k) plus circular white noise of
/// standard deviation noise_sigma per element. `rng` is only drawn from when
/// noise_sigma > 0.
ComplexTensor synthesize_measurement(const Scene& scene, const RadarConfig& cfg,
                                     std::mt19937_64& rng);

/// Box in (r', v) from which random targets are drawn.
struct SceneBounds {
  Interval coupled_range;
  Interval speed;
};

/// Unambiguous box shrunk by one resolution cell on every edge.
SceneBounds default_scene_bounds(const RadarConfig& cfg);

/// Normalized distance in resolution cells between two (r', v) or (r, v) points.
double normalized_distance(const RangeVelocity& a, const RangeVelocity& b, const RadarConfig& cfg);

/// K targets uniform over `bounds` in (r', v), pairwise at least
/// `min_separation` cells apart in (r', v), unit-modulus random-phase amplitudes.
/// Throws InfeasibleSceneError after 10^4 rejected draws.
Scene generate_random_scene(std::size_t k, const RadarConfig& cfg, const SceneBounds& bounds,
                            double min_separation, std::mt19937_64& rng);

/// K targets placed exactly on distinct grid nodes of `grid` (axes r', v),
/// pairwise at least `min_node_gap` nodes apart along some axis. Gaps are
/// measured cyclically on axes whose grid spans a full unambiguous period.
Scene generate_on_grid_scene(std::size_t k, const RadarConfig& cfg, const SeparableGrid& grid,
                             std::size_t min_node_gap, std::mt19937_64& rng);

struct MissEvaluation {
  std::size_t misses = 0;
  /// Per true target, the normalized distance to its matched estimate
  /// (+inf when unmatched).
  std::vector<double> distances;
};

/// Greedy nearest-pair matching of estimates to targets in (r, v); a matched
/// pair is a hit when its normalized distance is strictly below 1.
MissEvaluation evaluate_misses(std::span<const RangeVelocity> estimates, const Scene& truth,
                               const RadarConfig& cfg);

}  // namespace fcomp::radar
