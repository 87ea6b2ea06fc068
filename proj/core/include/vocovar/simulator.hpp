// Synthetic scenario generator: ground-truth trajectories, landmark
// fields, and noisy flow measurements at desk scale.

#ifndef VOCOVAR_SIMULATOR_HPP
#define VOCOVAR_SIMULATOR_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vocovar/dataset.hpp"

namespace vocovar {

enum class TrajectoryKind { Line, Arc, Loop, Revisit };

TrajectoryKind trajectory_kind_from_string(const std::string& name);
std::string to_string(TrajectoryKind kind);

struct ScenarioSpec {
  TrajectoryKind kind = TrajectoryKind::Line;
  int keyframes = 12;
  int landmarks = 400;
  double noise_sigma = 1.0;  // pixels; 0 for noiseless
  int covis_span = 2;        // max keyframe gap producing measurements
  std::uint64_t seed = 1;
  int samples_per_pair = 24;  // pixel samples per directed covisible pair
};

struct GroundTruth {
  std::vector<Pose> poses;
  std::vector<Vec3> landmarks;
};

// Places landmarks, walks the ground-truth trajectory, samples visible
// landmarks into pixel samples with true inverse depths, and emits flow
// targets as true induced flow plus seeded Gaussian pixel noise.
//
// A pair (i, j) is co-visible when |i - j| <= covis_span or the two
// camera centers re-enter geometric reach (within covis_span nominal
// steps with viewing directions within 60 degrees) -- the latter is
// what produces loop-closure edges on Loop and Revisit trajectories.
//
// Throws DegenerateScenario when a keyframe sees no landmarks or a
// co-visible pair shares none.
std::pair<KeyframeDataset, GroundTruth> simulate_scenario(
    const ScenarioSpec& spec);

// True when the geometric-reach rule above holds for poses a and b.
// Exposed so the adjacency structure can be recomputed from ground
// truth alone.
bool within_geometric_reach(const Pose& a, const Pose& b,
                            double reach_distance);

// Nominal consecutive-step length of a trajectory (meters).
double nominal_step(const ScenarioSpec& spec);

// Key-value scenario file: one `key value` pair per line, '#' comments.
// Keys: kind keyframes landmarks noise_sigma covis_span seed
// samples_per_pair.
ScenarioSpec parse_scenario_file(const std::filesystem::path& path);
ScenarioSpec parse_scenario_text(const std::string& text);

}  // namespace vocovar

#endif  // VOCOVAR_SIMULATOR_HPP
