#include "vocovar/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "vocovar/errors.hpp"

namespace vocovar {

namespace {

constexpr double kStep = 0.25;        // meters between consecutive keyframes
constexpr double kLaneOffset = 0.18;  // return-lane offset of Revisit, meters
constexpr double kOrbitRadius = 4.0;
constexpr double kMinSampleDepth = 0.3;
constexpr double kMaxSampleDepth = 50.0;
constexpr double kMaxAxisAngle = M_PI / 3.0;  // 60 degrees

PinholeIntrinsics desk_intrinsics() {
  PinholeIntrinsics K;
  K.fx = K.fy = 320.0;
  K.cx = 320.0;
  K.cy = 240.0;
  K.width = 640;
  K.height = 480;
  return K;
}

Rotation look_at(const Vec3& from, const Vec3& target) {
  const Vec3 z = (target - from).normalized();
  Vec3 up = Vec3::UnitY();
  if (std::abs(up.dot(z)) > 0.99) up = Vec3::UnitX();
  const Vec3 x = up.cross(z).normalized();
  const Vec3 y = z.cross(x);
  Rotation R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return R;
}

// Small deterministic sway added to the translational kinds. Perfectly
// collinear baselines with identical orientations make per-measurement
// depths able to absorb pose shifts (the flow constraint degenerates to
// its u component), so a handheld-like wobble keeps the geometry
// well conditioned.
Vec3 sway(int k) {
  // Constant magnitude, rotating direction: every frame gets the same
  // amount of off-axis baseline.
  return {0.0, 0.14 * std::sin(0.8 * k), 0.14 * std::cos(0.8 * k)};
}

Rotation wobble(int k) {
  Vec3 axis(std::sin(0.9 * k), std::cos(0.9 * k), 0.35);
  return so3_exp(0.07 * axis.normalized());
}

std::vector<Pose> make_trajectory(const ScenarioSpec& spec) {
  std::vector<Pose> poses(spec.keyframes);
  const int n = spec.keyframes;
  switch (spec.kind) {
    case TrajectoryKind::Line:
      for (int k = 0; k < n; ++k) {
        poses[k].translation = Vec3(k * kStep, 0, 0) + sway(k);
        poses[k].rotation = wobble(k);
      }
      break;
    case TrajectoryKind::Arc:
      // Sideways translation with a slow yaw about the vertical axis.
      for (int k = 0; k < n; ++k) {
        poses[k].translation = Vec3(k * kStep, 0, 0.04 * k) + sway(k);
        poses[k].rotation = so3_exp(Vec3(0, 0.015 * k, 0)) * wobble(k);
      }
      break;
    case TrajectoryKind::Loop:
      // Orbit around the landmark ball, closing on the start.
      for (int k = 0; k < n; ++k) {
        const double th = 2.0 * M_PI * k / n;
        const Vec3 c(kOrbitRadius * std::sin(th), 0.2 * std::sin(3 * th),
                     -kOrbitRadius * std::cos(th));
        poses[k].translation = c;
        poses[k].rotation = look_at(c, Vec3::Zero());
      }
      break;
    case TrajectoryKind::Revisit: {
      // Out along +x, then back on a parallel lane, facing the wall the
      // whole time.
      const int out = std::max(2, (n * 11) / 20);
      for (int k = 0; k < n; ++k) {
        if (k < out) {
          poses[k].translation = Vec3(k * kStep, 0, 0) + sway(k);
        } else {
          poses[k].translation =
              Vec3((out - 1) * kStep - (k - out + 1) * kStep, kLaneOffset, 0) +
              sway(k);
        }
        poses[k].rotation = wobble(k);
      }
      break;
    }
  }
  return poses;
}

std::vector<Vec3> make_landmarks(const ScenarioSpec& spec,
                                 const std::vector<Pose>& poses,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> pts(spec.landmarks);
  if (spec.kind == TrajectoryKind::Loop) {
    // Ball of landmarks at the orbit center, with depth variation.
    for (auto& p : pts) {
      p = Vec3(3.0 * (unit(rng) - 0.5), 3.0 * (unit(rng) - 0.5),
               3.0 * (unit(rng) - 0.5));
    }
    return pts;
  }
  double xmin = poses.front().translation.x(), xmax = xmin;
  for (const auto& T : poses) {
    xmin = std::min(xmin, T.translation.x());
    xmax = std::max(xmax, T.translation.x());
  }
  // Wall in front of the cameras (+z), padded past the trajectory ends,
  // with 2.5..6 m of depth spread.
  for (auto& p : pts) {
    p.x() = xmin - 2.0 + (xmax - xmin + 4.0) * unit(rng);
    p.y() = -2.0 + 4.0 * unit(rng);
    p.z() = 2.5 + 3.5 * unit(rng);
  }
  return pts;
}

}  // namespace

double nominal_step(const ScenarioSpec& spec) {
  if (spec.kind == TrajectoryKind::Loop) {
    return 2.0 * kOrbitRadius * std::sin(M_PI / spec.keyframes);
  }
  return kStep;
}

bool within_geometric_reach(const Pose& a, const Pose& b,
                            double reach_distance) {
  const double dist = (a.translation - b.translation).norm();
  if (dist > reach_distance) return false;
  const double cos_angle = a.rotation.col(2).dot(b.rotation.col(2));
  return cos_angle >= std::cos(kMaxAxisAngle);
}

std::pair<KeyframeDataset, GroundTruth> simulate_scenario(
    const ScenarioSpec& spec) {
  if (spec.keyframes < 2) throw DegenerateScenario("need at least 2 keyframes");
  if (spec.landmarks < 1) throw DegenerateScenario("need at least 1 landmark");
  if (spec.covis_span < 1) throw DegenerateScenario("covis_span must be >= 1");
  if (spec.samples_per_pair < 1) {
    throw DegenerateScenario("samples_per_pair must be >= 1");
  }
  if (spec.noise_sigma < 0) throw DegenerateScenario("noise_sigma must be >= 0");

  std::mt19937_64 rng_geom(spec.seed);
  std::mt19937_64 rng_noise(spec.seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GroundTruth gt;
  gt.poses = make_trajectory(spec);
  gt.landmarks = make_landmarks(spec, gt.poses, rng_geom);

  KeyframeDataset ds;
  ds.intrinsics = desk_intrinsics();
  ds.meta.pixel_scale = 1.0;
  {
    std::ostringstream tag;
    tag << "sim:" << to_string(spec.kind) << ":seed=" << spec.seed;
    ds.meta.source = tag.str();
  }

  const int n = spec.keyframes;
  ds.keyframes.resize(n);

  // Per-keyframe visibility of each landmark: in-frame projection at a
  // usable depth. Cached for pair sampling below.
  std::vector<std::vector<int>> visible(n);
  std::vector<std::vector<char>> is_visible(n,
                                            std::vector<char>(spec.landmarks, 0));
  for (int k = 0; k < n; ++k) {
    ds.keyframes[k].id = k;
    ds.keyframes[k].pose = gt.poses[k];
    const Pose inv_pose = inverse(gt.poses[k]);
    for (int l = 0; l < spec.landmarks; ++l) {
      const Vec3 local =
          inv_pose.rotation * gt.landmarks[l] + inv_pose.translation;
      if (local.z() < kMinSampleDepth || local.z() > kMaxSampleDepth) continue;
      const Pixel p = project(ds.intrinsics, local);
      if (!in_frame(ds.intrinsics, p)) continue;
      visible[k].push_back(l);
      is_visible[k][l] = 1;
    }
    if (visible[k].empty()) {
      throw DegenerateScenario("keyframe " + std::to_string(k) +
                               " sees no landmarks");
    }
  }

  const double reach = spec.covis_span * nominal_step(spec) * (1.0 + 1e-9);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool sequential = std::abs(i - j) <= spec.covis_span;
      const bool revisit =
          !sequential && within_geometric_reach(gt.poses[i], gt.poses[j], reach);
      if (!sequential && !revisit) continue;

      // Candidates: seen in frame i, in front of frame j.
      std::vector<int> candidates;
      const Pose inv_j = inverse(gt.poses[j]);
      for (const int l : visible[i]) {
        const Vec3 in_j = inv_j.rotation * gt.landmarks[l] + inv_j.translation;
        if (in_j.z() > kMinSampleDepth && is_visible[j][l]) {
          candidates.push_back(l);
        }
      }
      if (candidates.empty()) {
        std::ostringstream os;
        os << "co-visible pair (" << i << ", " << j
           << ") shares no visible landmarks";
        throw DegenerateScenario(os.str());
      }
      std::shuffle(candidates.begin(), candidates.end(), rng_geom);
      const int take =
          std::min<int>(spec.samples_per_pair, static_cast<int>(candidates.size()));

      const Pose inv_i = inverse(gt.poses[i]);
      for (int s = 0; s < take; ++s) {
        const Vec3& L = gt.landmarks[candidates[s]];
        const Vec3 in_i = inv_i.rotation * L + inv_i.translation;
        const Vec3 in_j = inv_j.rotation * L + inv_j.translation;

        PixelSample sample;
        sample.pixel = project(ds.intrinsics, in_i);
        sample.inv_depth = 1.0 / in_i.z();
        ds.keyframes[i].samples.push_back(sample);

        FlowMeasurement m;
        m.frame_i = i;
        m.frame_j = j;
        m.sample_index = static_cast<int>(ds.keyframes[i].samples.size()) - 1;
        m.target = project(ds.intrinsics, in_j);
        if (spec.noise_sigma > 0) {
          m.target.x() += spec.noise_sigma * gauss(rng_noise);
          m.target.y() += spec.noise_sigma * gauss(rng_noise);
          Mat2 sigma = Mat2::Identity();
          sigma *= spec.noise_sigma * spec.noise_sigma;
          m.sigma = sigma;
        }
        ds.measurements.push_back(m);
      }
    }
  }

  validate(ds);
  return {std::move(ds), std::move(gt)};
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "line") return TrajectoryKind::Line;
  if (name == "arc") return TrajectoryKind::Arc;
  if (name == "loop") return TrajectoryKind::Loop;
  if (name == "revisit") return TrajectoryKind::Revisit;
  throw ValidationError("unknown trajectory kind '" + name +
                        "' (expected line, arc, loop or revisit)");
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Line: return "line";
    case TrajectoryKind::Arc: return "arc";
    case TrajectoryKind::Loop: return "loop";
    case TrajectoryKind::Revisit: return "revisit";
  }
  return "?";
}

ScenarioSpec parse_scenario_text(const std::string& text) {
  ScenarioSpec spec;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string key, value;
    if (!(ls >> key)) continue;
    if (!(ls >> value)) {
      throw ParseError("line " + std::to_string(line_no) + ": key '" + key +
                           "' has no value",
                       line_no);
    }
    try {
      if (key == "kind") {
        spec.kind = trajectory_kind_from_string(value);
      } else if (key == "keyframes") {
        spec.keyframes = std::stoi(value);
      } else if (key == "landmarks") {
        spec.landmarks = std::stoi(value);
      } else if (key == "noise_sigma") {
        spec.noise_sigma = std::stod(value);
      } else if (key == "covis_span") {
        spec.covis_span = std::stoi(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "samples_per_pair") {
        spec.samples_per_pair = std::stoi(value);
      } else {
        throw ParseError("line " + std::to_string(line_no) +
                             ": unknown scenario key '" + key + "'",
                         line_no);
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad value '" +
                           value + "' for key '" + key + "'",
                       line_no);
    }
  }
  return spec;
}

ScenarioSpec parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

}  // namespace vocovar
