#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <lidreg/error.hpp>
#include <lidreg/pipeline.hpp>

using namespace lidreg;

namespace {

struct CoarseFixture {
  PipelineConfig cfg;
  Scene scene = generate_scene(cfg.synth);
  CameraPose hint = perturb_pose(scene.truth.pose, 2.0, 0.3 * std::numbers::pi / 180, 11);
  CoarseResult coarse = run_coarse(scene.cloud, scene.image, hint, cfg);
};

const CoarseFixture& fixture() {
  static const CoarseFixture f;
  return f;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config round trip and validation") {
    PipelineConfig cfg;
    cfg.fista.lambda = 0.002;
    cfg.objective = Objective::NCMI;
    cfg.matching.direction_tolerance = 3 * std::numbers::pi / 180;
    cfg.synth.building_count = 12;
    cfg.filter = MatchFilter::Ransac;
    const std::string text = format_pipeline_config(cfg);
    const PipelineConfig back = parse_pipeline_config(text);
    CHECK(format_pipeline_config(back) == text);
    CHECK(back.objective == Objective::NCMI);
    CHECK(back.synth.building_count == 12);
    CHECK(back.matching.direction_tolerance == doctest::Approx(3 * std::numbers::pi / 180));

    const auto kind_of = [](const std::string& t) {
      try {
        parse_pipeline_config(t);
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::IoError;
    };
    CHECK(kind_of("fista.lamda = 1\n") == ErrorKind::InvalidConfig);
    CHECK(kind_of("fista.gamma = 0.5\n") == ErrorKind::InvalidConfig);
    CHECK(kind_of("fine.neighborhood = 4\n") == ErrorKind::InvalidConfig);
    CHECK(kind_of("fine.objective = ssd\n") == ErrorKind::InvalidConfig);
    CHECK(kind_of("synth.gsd = -1\n") == ErrorKind::InvalidConfig);
    CHECK(parse_pipeline_config("fine.neighborhood = 25\n").neighborhood == 25);
  }

  TEST_CASE("coarse stage reduces the centroid discrepancy") {
    const auto& f = fixture();
    const auto before = centroid_discrepancy(centroid_check_points(f.scene.truth, pose_projector(f.hint), 0.15));
    const auto after =
        centroid_discrepancy(centroid_check_points(f.scene.truth, pose_projector(f.coarse.estimate.pose), 0.15));
    CHECK(discrepancy_gain(before.mean, after.mean) >= 40.0);
    CHECK(f.coarse.correspondences.size() >= 6);
    CHECK(f.coarse.match.guided);
  }

  TEST_CASE("filters only remove matches") {
    const auto& m = fixture().coarse.match;
    for (const auto& c : m.filtered) CHECK(std::find(m.initial.begin(), m.initial.end(), c) != m.initial.end());
    for (const auto& c : m.validated) CHECK(std::find(m.filtered.begin(), m.filtered.end(), c) != m.filtered.end());
  }

  TEST_CASE("extraction report counts") {
    const auto& f = fixture();
    const ExtractionReport r = score_coarse(f.coarse, f.scene.truth, f.scene.cloud);
    CHECK(r.lidar.true_positive == 28);
    CHECK(r.lidar.missed == 0);
    CHECK(r.image.recall() >= 0.85);
    CHECK(r.matching.false_alarm == 0);
    const std::string csv = format_extraction_report(r);
    CHECK(csv.find("stage,tp,fa,m,precision,recall") == 0);
    CHECK(csv.find("\nlidar,28,") != std::string::npos);
  }

  TEST_CASE("removed buildings produce no correspondences") {
    const auto& f = fixture();
    const auto [cloud, truth] = temporal_variant(f.scene, {4, 17});
    const LidarStage lidar = run_lidar_extraction(cloud, f.cfg);
    const MatchStage m = run_matching(lidar, f.coarse.image, f.hint, f.cfg);
    CHECK(m.validated.size() + 4 >= f.coarse.match.validated.size());
    for (const auto& c : m.validated) {
      const auto it = std::find_if(lidar.regions.begin(), lidar.regions.end(),
                                   [&](const BuildingRegion& r) { return r.id == c.lidar_id; });
      REQUIRE(it != lidar.regions.end());
      for (auto i : it->members) {
        CHECK(truth.source[i] != 4);
        CHECK(truth.source[i] != 17);
      }
    }
  }

  TEST_CASE("ambiguous largest falls back to zero translation") {
    const auto& f = fixture();
    PipelineConfig cfg = f.cfg;
    cfg.dominance = 50.0;
    const MatchStage m = run_matching(f.coarse.lidar, f.coarse.image, f.hint, cfg);
    CHECK_FALSE(m.guided);
    CHECK(m.translation == Point2::Zero());
  }

  TEST_CASE("no buildings fails cleanly") {
    PipelineConfig cfg;
    cfg.synth.building_count = 0;
    cfg.synth.tree_count = 0;
    const Scene s = generate_scene(cfg.synth);
    try {
      run_coarse(s.cloud, s.image, s.truth.pose, cfg);
      FAIL("expected a coarse failure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::TooFewCorrespondences);
      CHECK(std::string(e.what()).find("match") != std::string::npos);
    }
  }

  TEST_CASE("checkerboard overlay") {
    const RgbImage img(100, 130, Rgb{10, 20, 30});
    Raster gray(100, 130);
    for (int r = 0; r < 100; ++r) {
      for (int c = 0; c < 130; ++c) gray(r, c) = c;
    }
    const RgbImage o = checkerboard_overlay(img, gray, 32);
    CHECK(o.frame() == img.frame());
    CHECK(o(0, 0) == Rgb{10, 20, 30});
    CHECK(o(0, 40) == Rgb{79, 79, 79});
    CHECK(o(40, 40) == Rgb{10, 20, 30});
  }
}
