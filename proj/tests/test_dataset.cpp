#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "vocovar/dataset.hpp"
#include "vocovar/errors.hpp"
#include "vocovar/simulator.hpp"

using namespace vocovar;
using namespace vctest;

namespace {

const char* kMinimalFile =
    "vocovar-dataset v1\n"
    "K 300 300 320 240 640 480\n"
    "F 0 1 0 0 0 0 0 0\n"
    "F 1 1 0 0 0 0.25 0 0\n"
    "S 0 320 240 0.5\n"
    "M 0 1 0 282.5 240\n";

}  // namespace

TEST_CASE("minimal dataset parses with the right counts") {
  const KeyframeDataset ds = parse_dataset(kMinimalFile);
  CHECK(ds.keyframes.size() == 2);
  CHECK(ds.keyframes[0].samples.size() == 1);
  CHECK(ds.measurements.size() == 1);
  CHECK(ds.intrinsics.fx == 300);
  CHECK(ds.meta.pixel_scale == 1.0);
  CHECK_FALSE(ds.measurements[0].sigma.has_value());
}

TEST_CASE("measurement sigma is parsed when present") {
  std::string text = kMinimalFile;
  text.replace(text.find("M 0 1 0 282.5 240"), 17, "M 0 1 0 282.5 240 4 0 4");
  const KeyframeDataset ds = parse_dataset(text);
  REQUIRE(ds.measurements[0].sigma.has_value());
  CHECK((*ds.measurements[0].sigma)(0, 0) == 4.0);
  CHECK((*ds.measurements[0].sigma)(1, 1) == 4.0);
}

TEST_CASE("dangling measurement reference names the record") {
  std::string text = kMinimalFile;
  text.replace(text.find("M 0 1 0"), 7, "M 0 5 0");
  CHECK_THROWS_WITH_AS(parse_dataset(text),
                       doctest::Contains("measurement 0"), ValidationError);
}

TEST_CASE("out-of-range sample index is rejected") {
  std::string text = kMinimalFile;
  text.replace(text.find("M 0 1 0"), 7, "M 0 1 3");
  CHECK_THROWS_AS(parse_dataset(text), ValidationError);
}

TEST_CASE("unknown schema version is rejected") {
  std::string text = kMinimalFile;
  text.replace(text.find("v1"), 2, "v2");
  CHECK_THROWS_WITH_AS(parse_dataset(text), doctest::Contains("v2"),
                       ValidationError);
}

TEST_CASE("parse errors carry line numbers") {
  std::string text = kMinimalFile;
  text += "Q what is this\n";  // line 7
  try {
    parse_dataset(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 7);
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
  }

  // Malformed numeric field.
  std::string bad = kMinimalFile;
  bad.replace(bad.find("0.5"), 3, "zzz");
  CHECK_THROWS_AS(parse_dataset(bad), ParseError);
}

TEST_CASE("validation failures name the offending record") {
  // Negative inverse depth.
  std::string text = kMinimalFile;
  text.replace(text.find("S 0 320 240 0.5"), 15, "S 0 320 240 -.5");
  CHECK_THROWS_WITH_AS(parse_dataset(text), doctest::Contains("inverse depth"),
                       ValidationError);

  // Sample pixel outside the image.
  std::string outside = kMinimalFile;
  outside.replace(outside.find("S 0 320 240"), 11, "S 0 999 240");
  CHECK_THROWS_AS(parse_dataset(outside), ValidationError);

  // Self-measurement.
  std::string self_ref = kMinimalFile;
  self_ref.replace(self_ref.find("M 0 1 0"), 7, "M 0 0 0");
  CHECK_THROWS_AS(parse_dataset(self_ref), ValidationError);

  // Keyframe ids not dense.
  std::string gap = kMinimalFile;
  gap.replace(gap.find("F 1 "), 4, "F 3 ");
  CHECK_THROWS_AS(parse_dataset(gap), ValidationError);
}

TEST_CASE("comments and blank lines are ignored") {
  std::string text = "# leading comment\n\nvocovar-dataset v1  # header\n";
  text += "K 300 300 320 240 640 480\nF 0 1 0 0 0 0 0 0\nF 1 1 0 0 0 1 0 0\n";
  const KeyframeDataset ds = parse_dataset(text);
  CHECK(ds.keyframes.size() == 2);
}

TEST_CASE("save then load round trips field for field") {
  ScenarioSpec spec;
  spec.kind = TrajectoryKind::Revisit;
  spec.keyframes = 9;
  spec.landmarks = 300;
  spec.noise_sigma = 0.8;
  spec.seed = 101;
  auto [ds, gt] = simulate_scenario(spec);

  const KeyframeDataset back = parse_dataset(serialize_dataset(ds));
  CHECK(back.meta.pixel_scale == ds.meta.pixel_scale);
  CHECK(back.meta.source == ds.meta.source);
  CHECK(back.intrinsics.fx == ds.intrinsics.fx);
  CHECK(back.intrinsics.width == ds.intrinsics.width);
  REQUIRE(back.keyframes.size() == ds.keyframes.size());
  for (size_t k = 0; k < ds.keyframes.size(); ++k) {
    CHECK(boxminus(back.keyframes[k].pose, ds.keyframes[k].pose).norm() < 1e-12);
    REQUIRE(back.keyframes[k].samples.size() == ds.keyframes[k].samples.size());
    for (size_t s = 0; s < ds.keyframes[k].samples.size(); ++s) {
      CHECK((back.keyframes[k].samples[s].pixel -
             ds.keyframes[k].samples[s].pixel)
                .norm() == 0.0);
      CHECK(back.keyframes[k].samples[s].inv_depth ==
            ds.keyframes[k].samples[s].inv_depth);
    }
  }
  REQUIRE(back.measurements.size() == ds.measurements.size());
  for (size_t m = 0; m < ds.measurements.size(); ++m) {
    CHECK(back.measurements[m].frame_i == ds.measurements[m].frame_i);
    CHECK(back.measurements[m].frame_j == ds.measurements[m].frame_j);
    CHECK(back.measurements[m].sample_index == ds.measurements[m].sample_index);
    CHECK((back.measurements[m].target - ds.measurements[m].target).norm() ==
          0.0);
    CHECK(back.measurements[m].sigma.has_value() ==
          ds.measurements[m].sigma.has_value());
  }
}

TEST_CASE("prefix_window keeps only in-window records") {
  ScenarioSpec spec;
  spec.kind = TrajectoryKind::Line;
  spec.keyframes = 6;
  spec.landmarks = 300;
  spec.noise_sigma = 0.4;
  spec.seed = 102;
  auto [ds, gt] = simulate_scenario(spec);
  const KeyframeDataset w = prefix_window(ds, 3);
  CHECK(w.keyframes.size() == 3);
  for (const auto& m : w.measurements) {
    CHECK(m.frame_i < 3);
    CHECK(m.frame_j < 3);
  }
  validate(w);
}

TEST_CASE("missing file raises an io error") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/path.vds"), IoError);
}
