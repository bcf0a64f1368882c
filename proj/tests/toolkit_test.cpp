#include "gantrylab/toolkit.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace gantrylab {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("gantrylab_" + name)) {
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

ToolkitConfig fast_config() {
  ToolkitConfig cfg;
  cfg.render_scale = 16;
  cfg.pose_ring = {{250.0}, {450.0}, 2};
  return cfg;
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

TEST(Plan, ReportsRouteAndComparison) {
  const ToolkitConfig cfg;
  const WaypointSet set = random_waypoints(8, cfg.volume(), 3);
  const Json r = cmd_plan(cfg, set);
  EXPECT_EQ(r["route"].size(), 8u);
  EXPECT_EQ(r["legs"].size(), 7u);
  ASSERT_TRUE(r["comparison"].contains("brute_force"));
  EXPECT_GE(r["comparison"]["zigzag_to_optimum_length_ratio"].get<double>(), 1.0 - 1e-12);
  EXPECT_LE(r["comparison"]["brute_force"]["millimeters"].get<double>(),
            r["comparison"]["nearest_neighbor"]["millimeters"].get<double>() + 1e-9);
  const Json big = cmd_plan(cfg, random_waypoints(30, cfg.volume(), 3));
  EXPECT_FALSE(big["comparison"].contains("brute_force"));
}

TEST(Plan, RandomWaypointsAreDeterministic) {
  const Volume v;
  EXPECT_EQ(random_waypoints(5, v, 42).positions, random_waypoints(5, v, 42).positions);
  EXPECT_NE(random_waypoints(5, v, 42).positions, random_waypoints(5, v, 43).positions);
}

TEST(DemoScene, ValidAndInsideFootprint) {
  const ToolkitConfig cfg;
  const Scene s = demo_scene(1, cfg.volume());
  EXPECT_EQ(s.plants.size(), 9u);
  EXPECT_NO_THROW(s.validate(cfg.volume()));
  EXPECT_EQ(make_plant_id("Echinochloa crus-galli", 2), "echcru002");
}

TEST(DefaultPoses, InsideVolumeAndZigzagOrdered) {
  const ToolkitConfig cfg = fast_config();
  const Scene s = demo_scene(1, cfg.volume());
  const auto poses = default_poses(cfg, s);
  ASSERT_FALSE(poses.empty());
  for (const auto& p : poses) EXPECT_TRUE(cfg.volume().contains(p.position));
}

TEST(Simulate, RunValidatesWithoutErrors) {
  TempDir dir("sim");
  const ToolkitConfig cfg = fast_config();
  const Scene s = demo_scene(7, cfg.volume());
  const auto poses = default_poses(cfg, s);
  const Json report = cmd_simulate(cfg, s, poses, dir.path());
  EXPECT_EQ(report["masters"].get<std::size_t>(), poses.size());
  EXPECT_GT(report["subimages"].get<std::size_t>(), 0u);
  EXPECT_EQ(report["skipped_plants"].get<std::size_t>(), 0u);

  const Json v = cmd_validate(dir.path());
  EXPECT_TRUE(v["ok"].get<bool>()) << v.dump(2);
  EXPECT_EQ(v["files_checked"].get<std::size_t>(), poses.size());

  // masters + overlays + subimages + metadata + run log
  const std::size_t expected = 2 * poses.size() + report["subimages"].get<std::size_t>() +
                               poses.size() + 1;
  EXPECT_EQ(count_files(dir.path()), expected);

  // an orphaned subimage and a deleted master are both reported
  fs::copy_file(dir.path() / "run_log.json", dir.path() / "subimages" / "Edge" / "stray.png");
  fs::remove(*fs::directory_iterator(dir.path() / "masters"));
  const Json bad = cmd_validate(dir.path());
  EXPECT_FALSE(bad["ok"].get<bool>());
  EXPECT_GE(bad["error_count"].get<std::size_t>(), 2u);
}

TEST(Simulate, DeterministicOutput) {
  TempDir a("det_a"), b("det_b");
  const ToolkitConfig cfg = fast_config();
  const Scene s = demo_scene(3, cfg.volume());
  const auto poses = default_poses(cfg, s);
  cmd_simulate(cfg, s, poses, a.path());
  cmd_simulate(cfg, s, poses, b.path());
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a.path());
    ASSERT_TRUE(fs::exists(b.path() / rel)) << rel;
    EXPECT_EQ(io::read_text(e.path()), io::read_text(b.path() / rel)) << rel;
  }
}

TEST(Simulate, EmptySceneWritesMastersOnly) {
  TempDir dir("empty");
  ToolkitConfig cfg = fast_config();
  cfg.jpg_names = true;
  Scene s;
  CameraPose p;
  p.position = {500, 400, 600};
  p.tilt = -90;
  const Json report = cmd_simulate(cfg, s, {p}, dir.path());
  EXPECT_EQ(report["subimages"].get<std::size_t>(), 0u);
  EXPECT_FALSE(report.contains("t_s"));
  EXPECT_TRUE(cmd_validate(dir.path())["ok"].get<bool>());
  EXPECT_TRUE(fs::exists(dir.path() / "masters" / "20200601080003-pose0.jpg"));
}

TEST(Simulate, MetadataTimesFollowTheClock) {
  TempDir dir("clock");
  const ToolkitConfig cfg = fast_config();
  const Scene s = demo_scene(2, cfg.volume());
  const auto poses = default_poses(cfg, s);
  cmd_simulate(cfg, s, poses, dir.path());
  const auto log = io::read_json(dir.path() / "run_log.json");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir.path() / "metadata"))
    names.push_back(io::read_json(e.path())["file_name"].get<std::string>());
  ASSERT_EQ(names.size(), log["entries"].size());
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    return std::stoi(a.substr(19)) < std::stoi(b.substr(19));
  });
  for (std::size_t i = 1; i < names.size(); ++i)
    EXPECT_LE(names[i - 1].substr(0, 14), names[i].substr(0, 14));
}

TEST(Segment, PipelineOnRender) {
  const Scene s = demo_scene(1);
  CameraPose p;
  p.position = {575, 420, 700};
  p.tilt = -90;
  const Capture cap = render(s, p, CameraIntrinsics{}, 16);
  SegmentOptions opt;
  const auto plain = cmd_segment(cap.image, opt);
  std::size_t fg = 0;
  for (auto l : cap.labels.data()) fg += l != kLabelBackground;
  EXPECT_EQ(plain.report["foreground_pixels"].get<std::size_t>(), fg);
  opt.dilate_radius = 2;
  opt.fill_holes = true;
  opt.erode_radius = 2;
  const auto cleaned = cmd_segment(cap.image, opt);
  EXPECT_GE(count_set(cleaned.mask), count_set(plain.mask));

  SegmentOptions sub;
  Scene bare = s;
  bare.plants.clear();
  sub.background = render(bare, p, CameraIntrinsics{}, 16).image;
  sub.tolerance = 0;
  const auto r = cmd_segment(cap.image, sub);
  EXPECT_EQ(r.report["method"], "background_subtraction");
  std::size_t plants = 0;
  for (auto l : cap.labels.data()) plants += l >= plant_label(0);
  EXPECT_EQ(count_set(r.mask), plants);
}

TEST(Stats, ReportAndCsv) {
  const Json r = cmd_stats(RunAccounting{12300, 2760, 2040, 2149, 3494},
                           {{"monocot", 12949}, {"dicot", 21717}}, {{50, 56, 0.05}});
  EXPECT_NEAR(r["rates"]["t_m"].get<double>(), 7.008, 0.001);
  EXPECT_NEAR(r["clopper_pearson"][0]["lower"].get<double>(), 0.7812435, 1e-6);
  const std::string csv = stats_csv(r);
  EXPECT_NE(csv.find("t_m,7.00"), std::string::npos);
  EXPECT_NE(csv.find("weight_monocot,2.67"), std::string::npos);
  EXPECT_NE(csv.find("cp_lower_50/56,0.78"), std::string::npos);
}

TEST(Stats, FromRunLog) {
  const nlohmann::json log = {{"t_p", 10.0}, {"t_d", 2.0}, {"t_c", 1.0},
                              {"n_masters", 3}, {"n_subimages", 4}};
  const RunAccounting acc = accounting_from_log(log);
  EXPECT_DOUBLE_EQ(master_rate(acc), 4.0);
  EXPECT_THROW(accounting_from_log(nlohmann::json::object()), DomainError);
}

TEST(Config, JsonRoundTrip) {
  ToolkitConfig cfg;
  cfg.render_scale = 5;
  cfg.box_origin = BoxOrigin::UpperRight;
  cfg.motion.mode = SteppingMode::Full;
  cfg.zigzag = {150, 120};
  const ToolkitConfig back = io::config_from_json(io::to_json(cfg));
  EXPECT_EQ(io::to_json(back), io::to_json(cfg));
  EXPECT_THROW(io::config_from_json({{"render_scale", 0}}), DomainError);
}

TEST(Config, SceneJsonRoundTrip) {
  Scene s = demo_scene(4);
  EXPECT_EQ(io::to_json(io::scene_from_json(io::to_json(s))), io::to_json(s));
  s.floor.reset();
  const Scene back = io::scene_from_json(io::to_json(s));
  EXPECT_FALSE(back.floor.has_value());
}

}  // namespace
}  // namespace gantrylab
