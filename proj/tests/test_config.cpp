/*=========================================================================
 *
 *  Copyright the impactreg contributors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "impactreg/io/parameter_file.hpp"
#include "impactreg/pipeline/config.hpp"

using namespace impactreg;

TEST_CASE("parameter text: groups, quoting, comments, duplicates") {
  const std::string text = R"(
// a comment line
(FixedImagePyramid "FixedSmoothingImagePyramid")
(MaximumNumberOfIterations 250)   // trailing comment
(GridSpacingSchedule 32 16 8.5)
(Flag "true") (Empty)
(Repeated 1)
(Repeated 2 3)
)";
  ParameterMap m = parse_parameter_text(text);
  CHECK(m.get_string("FixedImagePyramid", "") == "FixedSmoothingImagePyramid");
  CHECK(m.get_int("MaximumNumberOfIterations", 0) == 250);
  const std::vector<double> sched = m.get_doubles("GridSpacingSchedule");
  REQUIRE(sched.size() == 3);
  CHECK(sched[2] == 8.5);
  CHECK(m.get_bool("Flag", false) == true);
  REQUIRE(m.find("Empty") != nullptr);
  CHECK(m.find("Empty")->empty());
  const std::vector<int> rep = m.get_ints("Repeated");  // last occurrence wins
  REQUIRE(rep.size() == 2);
  CHECK(rep[0] == 2);
  CHECK(rep[1] == 3);
}

TEST_CASE("parameter text: malformed input throws IoError") {
  CHECK_THROWS_AS(parse_parameter_text("stray tokens"), IoError);
  CHECK_THROWS_AS(parse_parameter_text("(Unterminated 1 2"), IoError);
  CHECK_THROWS_AS(parse_parameter_text("(Key \"unclosed)"), IoError);
  CHECK_THROWS_AS(parse_parameter_text("( )"), IoError);
  CHECK_THROWS_AS(parse_parameter_text("(7Key 1)"), IoError);
  // Value type mismatches are ConfigError, found lazily by the getters.
  ParameterMap m = parse_parameter_text("(K \"abc\")\n(L 1 2)");
  CHECK_THROWS_AS(m.get_double("K", 0.0), ConfigError);
  CHECK_THROWS_AS(m.get_int("L", 0), ConfigError);   // two values for a scalar
  CHECK_THROWS_AS(m.get_bool("K", false), ConfigError);
}

TEST_CASE("parameter map: serialization round-trips values and order") {
  ParameterMap m;
  m.set("Metric", {"IMPACT"});
  m.set("VoxelSize", {"1.5", "1.5", "3"});
  m.set("SampleJitter", {"true"});
  m.set("Note", {"two words"});
  const std::string text = serialize_parameter_map(m);
  CHECK(text.find("(Metric \"IMPACT\")") != std::string::npos);
  CHECK(text.find("(VoxelSize 1.5 1.5 3)") != std::string::npos);
  CHECK(text.find("(SampleJitter \"true\")") != std::string::npos);
  CHECK(text.find("(Note \"two words\")") != std::string::npos);

  ParameterMap back = parse_parameter_text(text);
  REQUIRE(back.entries().size() == m.entries().size());
  for (std::size_t i = 0; i < m.entries().size(); ++i) {
    CHECK(back.entries()[i].first == m.entries()[i].first);
    CHECK(back.entries()[i].second == m.entries()[i].second);
  }
}

TEST_CASE("parameter files: write and read from disk") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "impactreg_params_test.txt").string();
  ParameterMap m;
  m.set("Seed", {"77"});
  m.set("Metric", {"NCC"});
  write_parameter_file(path, m);
  ParameterMap back = read_parameter_file(path);
  CHECK(back.get_u64("Seed", 0) == 77);
  CHECK(back.get_string("Metric", "") == "NCC");
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_parameter_file("/nonexistent/dir/params.txt"), IoError);
}

TEST_CASE("unused-key tracking") {
  ParameterMap m = parse_parameter_text("(A 1)\n(B 2)\n(C 3)");
  (void)m.get_int("A", 0);
  m.mark_used("C");
  const std::vector<std::string> unused = m.unused_keys();
  REQUIRE(unused.size() == 1);
  CHECK(unused[0] == "B");
}

TEST_CASE("config: defaults from an empty map") {
  std::vector<std::string> warnings;
  const RegistrationConfig c = config_from_parameters(ParameterMap{}, &warnings);
  CHECK(warnings.empty());
  CHECK(c.metric == MetricKind::impact);
  CHECK(c.mode == ImpactMode::jacobian);
  REQUIRE(c.layers.size() == 1);
  CHECK(c.layers[0].kind == FeatureKind::mind);
  CHECK(c.layers[0].distance == DistanceKind::l2);
  CHECK(c.layers[0].subset == 32);
  CHECK(c.resolutions == 3);
  CHECK(c.final_grid_spacing == 8.0);
  CHECK(c.iterations_at(0) == 500);
  CHECK(c.samples_at(2) == 2000);
  CHECK(c.patch_size == Index3{5, 5, 5});
  CHECK(c.patch_resolution == Vec3{1.5, 1.5, 1.5});
  CHECK(c.sample_jitter);
  CHECK(c.seed == 1);
  CHECK(c.asgd.gain_offset == 20.0);
  CHECK(c.asgd.gain_decay == doctest::Approx(0.602));
  // Default level schedules: halving towards the native / final values.
  CHECK(c.level_spacing(0, {1, 1, 2}) == Vec3{4, 4, 8});
  CHECK(c.level_spacing(2, {1, 1, 2}) == Vec3{1, 1, 2});
  CHECK(c.level_grid_spacing(0) == 32.0);
  CHECK(c.level_grid_spacing(2) == 8.0);
}

TEST_CASE("config: explicit values, schedules, broadcasts and warnings") {
  const std::string text = R"(
(Metric "IMPACT")
(Mode "Static")
(Features "identity" "mind")
(FeatureWeights 0.5 2)
(Loss "L2" "NCC")
(SubsetFeatures 0)
(PatchSize 3 5 7)
(VoxelSize 2)
(NumberOfResolutions 4)
(ImagePyramidSchedule 6 3 1.5 1)
(GridSpacingSchedule 64 32 16 8)
(MaximumNumberOfIterations 100 100 80 60)
(NumberOfSpatialSamples 1000)
(MindRadius 2)
(MindDilation 2)
(MindWeighting "gaussian")
(BendingEnergyWeight 0.05)
(Seed 99)
(NewSamplesEveryIteration "false")
(SomeUnknownKnob 3)
)";
  std::vector<std::string> warnings;
  const RegistrationConfig c = config_from_parameters(parse_parameter_text(text), &warnings);
  CHECK(c.mode == ImpactMode::static_maps);
  REQUIRE(c.layers.size() == 2);
  CHECK(c.layers[0].kind == FeatureKind::identity);
  CHECK(c.layers[0].weight == 0.5);
  CHECK(c.layers[0].distance == DistanceKind::l2);
  CHECK(c.layers[1].kind == FeatureKind::mind);
  CHECK(c.layers[1].weight == 2.0);
  CHECK(c.layers[1].distance == DistanceKind::ncc);
  CHECK(c.layers[0].subset == 0);  // broadcast scalar
  CHECK(c.patch_size == Index3{3, 5, 7});
  CHECK(c.patch_resolution == Vec3{2, 2, 2});
  CHECK(c.resolutions == 4);
  CHECK(c.level_spacing(1, {1, 1, 1}) == Vec3{3, 3, 3});
  CHECK(c.level_grid_spacing(3) == 8.0);
  CHECK(c.iterations_at(3) == 60);
  CHECK(c.samples_at(3) == 1000);
  CHECK(c.mind_radius == 2);
  CHECK(c.mind_weighting == MindExtractor::Weighting::gaussian);
  CHECK(c.bending_weight == 0.05);
  CHECK(c.seed == 99);
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[0].find("NewSamplesEveryIteration") != std::string::npos);
  CHECK(warnings[1].find("SomeUnknownKnob") != std::string::npos);
}

TEST_CASE("config: validation failures") {
  auto cfg_of = [](const std::string& text) {
    return config_from_parameters(parse_parameter_text(text), nullptr);
  };
  CHECK_THROWS_AS(cfg_of("(Metric \"banana\")"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(Mode \"onthefly\")"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(Features \"wavelet\")"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(Features \"external\")"), ConfigError);  // needs Static mode
  CHECK_THROWS_AS(cfg_of("(Mode \"Static\")\n(Features \"external\" \"external\")"),
                  ConfigError);
  CHECK_THROWS_AS(cfg_of("(FeatureWeights 1 2)"), ConfigError);  // 2 weights, 1 layer
  CHECK_THROWS_AS(cfg_of("(FeatureWeights -1)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(FeatureWeights 0)"), ConfigError);  // no positive weight
  CHECK_THROWS_AS(cfg_of("(PatchSize 5 5)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(PatchSize 0)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(VoxelSize -1)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(NumberOfResolutions 0)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(ImagePyramidSchedule 4 2)"), ConfigError);  // needs 3 entries
  CHECK_THROWS_AS(cfg_of("(ImagePyramidSchedule 1 2 4)"), ConfigError);  // increasing
  CHECK_THROWS_AS(cfg_of("(GridSpacingSchedule 8 16 32)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(MaximumNumberOfIterations 10 10)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(NumberOfSpatialSamples 0)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(SampleRetryFactor 0)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(MindRadius 0)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(NmiBins 2)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(BendingEnergyWeight -0.1)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(PcaChannels 3)"), ConfigError);  // requires Static mode
  CHECK_THROWS_AS(cfg_of("(SP_alpha 1.5)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(SigmoidMin 2)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(TraceStride 0)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(Threads -1)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(MaximumStepLength -2)"), ConfigError);
  CHECK_THROWS_AS(cfg_of("(PyramidStrategy \"blurless\")"), ConfigError);
}

TEST_CASE("config: resolved settings serialize and parse back identically") {
  const std::string text = R"(
(Metric "NMI")
(NmiBins 48)
(NumberOfResolutions 2)
(MaximumNumberOfIterations 120 90)
(Seed 31337)
(SampleJitter "false")
)";
  const RegistrationConfig c = config_from_parameters(parse_parameter_text(text), nullptr);
  const ParameterMap out = config_to_parameters(c);
  const RegistrationConfig back =
      config_from_parameters(parse_parameter_text(serialize_parameter_map(out)), nullptr);
  CHECK(back.metric == MetricKind::nmi);
  CHECK(back.nmi_bins == 48);
  CHECK(back.resolutions == 2);
  CHECK(back.iterations_at(0) == 120);
  CHECK(back.iterations_at(1) == 90);
  CHECK(back.seed == 31337);
  CHECK(back.sample_jitter == false);
  CHECK(back.final_grid_spacing == c.final_grid_spacing);
  CHECK(back.patch_size == c.patch_size);
  CHECK(back.asgd.step_min == c.asgd.step_min);
  CHECK(back.trace_stride == c.trace_stride);
}
