#pragma once

// Command implementations behind the CLI. Each returns a JSON report so the
// binary only parses arguments and prints.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "gantrylab/analytics.hpp"
#include "gantrylab/camera_geometry.hpp"
#include "gantrylab/config.hpp"
#include "gantrylab/dataset_io.hpp"
#include "gantrylab/png_io.hpp"
#include "gantrylab/route_planner.hpp"
#include "gantrylab/scene_simulator.hpp"
#include "gantrylab/segmentation.hpp"

namespace gantrylab {

namespace fs = std::filesystem;

// --- inputs -----------------------------------------------------------------

inline WaypointSet random_waypoints(std::size_t n, const Volume& volume, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(volume.min.x, volume.max.x);
  std::uniform_real_distribution<double> uy(volume.min.y, volume.max.y);
  std::uniform_real_distribution<double> uz(volume.min.z, volume.max.z);
  WaypointSet set;
  set.volume = volume;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng), y = uy(rng), z = uz(rng);
    set.positions.push_back({x, y, z});
  }
  return set;
}

struct Species {
  const char* label;
  const char* scientific_name;
  Rgb color;
};

inline const std::vector<Species>& demo_species() {
  static const std::vector<Species> list = {
      {"BarnyardGrass", "Echinochloa crus-galli", {70, 150, 40}},
      {"CanadaThistle", "Cirsium arvense", {95, 140, 60}},
      {"VolunteerCanola", "Brassica napus", {120, 170, 50}},
      {"Dandelion", "Taraxacum officinale", {80, 130, 30}},
      {"Smartweed", "Persicaria spp.", {110, 120, 40}},
      {"WildBuckwheat", "Fallopia convolvulus", {60, 160, 40}},
      {"WildOat", "Avena fatua", {150, 170, 70}},
      {"YellowFoxtail", "Setaria pumila", {170, 180, 50}},
  };
  return list;
}

/// "Echinochloa crus-galli", 2 -> "echcru002"
inline std::string make_plant_id(const std::string& scientific_name, int number) {
  std::string id;
  std::size_t word_start = 0;
  for (int w = 0; w < 2 && word_start < scientific_name.size(); ++w) {
    for (std::size_t i = word_start; i < scientific_name.size() && i < word_start + 3; ++i) {
      const char c = scientific_name[i];
      if (std::isalpha(static_cast<unsigned char>(c)))
        id += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    const auto space = scientific_name.find(' ', word_start);
    if (space == std::string::npos) break;
    word_start = space + 1;
  }
  char num[16];
  std::snprintf(num, sizeof num, "%03d", number);
  return id + num;
}

/// Nine plants on a 3x3 grid across the footprint with seeded jitter.
inline Scene demo_scene(std::uint64_t seed, const Volume& volume = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-20.0, 20.0);
  std::uniform_real_distribution<double> radius(40.0, 70.0);
  const double xs[3] = {0.174, 0.5, 0.826};
  const double ys[3] = {0.095, 0.5, 0.905};
  Scene scene;
  scene.floor = FloorRect{volume.min.x, volume.max.x, volume.min.y, volume.max.y};
  scene.floor_z = volume.min.z;
  const auto& species = demo_species();
  int position_id = 0;
  for (double fy : ys) {
    for (double fx : xs) {
      const Species& sp = species[position_id % species.size()];
      PlantTarget p;
      p.position_id = position_id;
      p.plant_id = make_plant_id(sp.scientific_name, position_id + 1);
      p.label = sp.label;
      p.scientific_name = sp.scientific_name;
      p.position = {volume.min.x + fx * (volume.max.x - volume.min.x) + jitter(rng),
                    volume.min.y + fy * (volume.max.y - volume.min.y) + jitter(rng),
                    volume.min.z};
      p.bounding_radius = radius(rng);
      p.render_color = sp.color;
      p.date_planted = "2020-05-1" + std::to_string(position_id % 10);
      scene.plants.push_back(std::move(p));
      ++position_id;
    }
  }
  return scene;
}

/// Poses around every plant (half-cylinder arcs at edge positions, full
/// rings inside), de-duplicated by position and ordered by the zig-zag
/// planner.
inline std::vector<CameraPose> default_poses(const ToolkitConfig& cfg, const Scene& scene) {
  const Volume volume = cfg.volume();
  std::vector<CameraPose> poses;
  std::set<std::tuple<double, double, double>> seen;
  for (const auto& plant : scene.plants) {
    const auto cls = classify_position(plant.position_id, plant.position, volume, cfg.edge_margin);
    std::vector<CameraPose> ring;
    try {
      ring = generate_poses(plant.position, cls, cfg.pose_ring, volume);
    } catch (const DomainError&) {
      continue;
    }
    for (const auto& p : ring)
      if (seen.emplace(p.position.x, p.position.y, p.position.z).second) poses.push_back(p);
  }
  if (poses.empty()) return poses;
  WaypointSet set;
  set.volume = volume;
  for (const auto& p : poses) set.positions.push_back(p.position);
  const Route route = plan_zigzag(set, cfg.zigzag);
  std::vector<CameraPose> ordered;
  ordered.reserve(poses.size());
  for (std::size_t i : route) ordered.push_back(poses[i]);
  return ordered;
}

// --- plan -------------------------------------------------------------------

inline Json cost_json(const RouteCost& c) {
  return {{"seconds", c.seconds}, {"millimeters", c.millimeters}};
}

inline Json cmd_plan(const ToolkitConfig& cfg, const WaypointSet& set) {
  set.validate();
  const Route zig = plan_zigzag(set, cfg.zigzag);
  const RouteCost zig_cost = route_cost(zig, set, cfg.motion);
  Json legs = Json::array();
  for (std::size_t i = 0; i < zig_cost.leg_seconds.size(); ++i)
    legs.push_back({{"from", zig[i]},
                    {"to", zig[i + 1]},
                    {"seconds", zig_cost.leg_seconds[i]},
                    {"millimeters", zig_cost.leg_millimeters[i]}});

  const Route nn = nearest_neighbor_route(set);
  Json comparison = {{"zigzag", cost_json(zig_cost)},
                     {"nearest_neighbor", cost_json(route_cost(nn, set, cfg.motion))}};
  if (set.positions.size() <= kBruteForceLimit) {
    const Route bf = brute_force_tsp(set);
    const RouteCost bf_cost = route_cost(bf, set, cfg.motion);
    comparison["brute_force"] = cost_json(bf_cost);
    comparison["brute_force"]["route"] = bf;
    comparison["zigzag_to_optimum_length_ratio"] =
        bf_cost.millimeters > 0.0 ? zig_cost.millimeters / bf_cost.millimeters : 1.0;
  }
  return {{"route", zig},
          {"legs", legs},
          {"total_seconds", zig_cost.seconds},
          {"total_millimeters", zig_cost.millimeters},
          {"parallel", cfg.motion.parallel},
          {"comparison", comparison}};
}

// --- simulate ---------------------------------------------------------------

struct WrittenRun {
  std::vector<MasterImageRecord> records;
  RunLog log;
};

/// Metadata records for a simulated run; subimage crops go into Edge or
/// Interior by the plant's position class.
inline std::vector<MasterImageRecord> build_records(const ToolkitConfig& cfg, const Scene& scene,
                                                    const RunResult& run) {
  const std::string ext = cfg.image_extension();
  std::vector<MasterImageRecord> records;
  for (std::size_t i = 0; i < run.masters.size(); ++i) {
    const MasterCapture& m = run.masters[i];
    const std::string stamp = timefmt::stamp14(m.timestamp);
    MasterImageRecord r;
    r.file_name = names::master_name(stamp, i, ext);
    r.bb_file_name = names::bb_name_for(r.file_name);
    r.date = timefmt::date(m.timestamp);
    r.time = timefmt::time(m.timestamp);
    r.room = cfg.room;
    r.institute = cfg.institute;
    r.camera = cfg.camera;
    r.lens = cfg.lens;
    r.camera_pose = to_record(m.pose);
    for (const Detection& d : m.detections) {
      const PlantTarget& p = scene.plants[d.plant_index];
      SubimageRecord s;
      s.plant_id = p.plant_id;
      s.label = p.label;
      s.scientific_name = p.scientific_name;
      s.position_id = p.position_id;
      s.subimage_file_name = names::subimage_name(stamp, p.position_id, ext);
      s.date_planted = p.date_planted;
      s.x_min = d.box.x_min;
      s.x_max = d.box.x_max;
      s.y_min = d.box.y_min;
      s.y_max = d.box.y_max;
      r.bounding_boxes.push_back(std::move(s));
    }
    records.push_back(std::move(r));
  }
  return records;
}

inline void write_png_atomic(const fs::path& path, const Image& img) {
  auto tmp = path;
  tmp += ".tmp";
  png::write(tmp, img);
  fs::rename(tmp, path);
}

inline void write_png_atomic(const fs::path& path, const Mask& mask) {
  auto tmp = path;
  tmp += ".tmp";
  png::write(tmp, mask);
  fs::rename(tmp, path);
}

/// Layout: masters/ (master and -bb overlay), subimages/<Edge|Interior>/,
/// metadata/ (one JSON per master), run_log.json.
inline WrittenRun write_run(const ToolkitConfig& cfg, const Scene& scene, const RunResult& run,
                            const fs::path& out) {
  fs::create_directories(out / "masters");
  fs::create_directories(out / "subimages" / "Edge");
  fs::create_directories(out / "subimages" / "Interior");
  fs::create_directories(out / "metadata");
  const Volume volume = cfg.volume();

  WrittenRun written{build_records(cfg, scene, run), run.log};
  for (std::size_t i = 0; i < run.masters.size(); ++i) {
    const MasterCapture& m = run.masters[i];
    const MasterImageRecord& r = written.records[i];
    write_png_atomic(out / "masters" / r.file_name, m.capture.image);
    std::vector<NormalizedBox> boxes;
    for (const auto& d : m.detections) boxes.push_back(d.box);
    write_png_atomic(out / "masters" / r.bb_file_name, draw_boxes(m.capture.image, boxes));
    for (std::size_t b = 0; b < m.detections.size(); ++b) {
      const PlantTarget& p = scene.plants[m.detections[b].plant_index];
      const auto cls = classify_position(p.position_id, p.position, volume, cfg.edge_margin);
      write_png_atomic(out / "subimages" / to_string(cls) / r.bounding_boxes[b].subimage_file_name,
                       crop(m.capture.image, m.detections[b].box));
    }
    const auto stem = fs::path(r.file_name).stem().string();
    io::write_atomic(out / "metadata" / (stem + ".json"), emit_metadata_string(r, cfg.box_origin));
  }
  io::write_atomic(out / "run_log.json", io::to_json(run.log).dump(2) + "\n");
  return written;
}

inline RunSettings run_settings(const ToolkitConfig& cfg) {
  RunSettings s;
  s.timing = cfg.timing;
  s.motion = cfg.motion;
  s.start = timefmt::parse_iso(cfg.start_time);
  return s;
}

inline Json cmd_simulate(const ToolkitConfig& cfg, const Scene& scene,
                         const std::vector<CameraPose>& poses, const fs::path& out) {
  cfg.validate();
  scene.validate(cfg.volume());
  const RunResult run = simulate_run(scene, poses, cfg.intrinsics, cfg.render_scale,
                                     run_settings(cfg));
  const WrittenRun written = write_run(cfg, scene, run, out);
  const RunAccounting acc{run.log.t_p, run.log.t_d, run.log.t_c, run.log.n_masters,
                          run.log.n_subimages};
  Json report = {{"output_dir", out.string()},
                 {"masters", run.log.n_masters},
                 {"subimages", run.log.n_subimages},
                 {"skipped_plants", run.log.skipped.size()},
                 {"t_p", run.log.t_p},
                 {"t_d", run.log.t_d},
                 {"t_c", run.log.t_c}};
  if (acc.n_masters > 0) report["t_m"] = master_rate(acc);
  if (acc.n_subimages > 0) report["t_s"] = subimage_rate(acc);
  return report;
}

// --- segment ----------------------------------------------------------------

struct SegmentOptions {
  double threshold = 0.0;
  std::optional<Image> background;  // switches to background subtraction
  int tolerance = 10;
  int blur_radius = 0;
  int dilate_radius = 0;
  bool fill_holes = false;
  int erode_radius = 0;
};

struct SegmentResult {
  Mask mask;
  Json report;
};

/// Keying followed by the optional clean-up chain dilate, fill holes, erode.
inline SegmentResult cmd_segment(const Image& img, const SegmentOptions& opt) {
  const Image src = box_blur(img, opt.blur_radius);
  Mask mask = opt.background ? background_subtract(src, *opt.background, opt.tolerance)
                             : threshold_keyout(b_channel(src), opt.threshold);
  if (opt.dilate_radius > 0) mask = morphology(mask, MorphOp::Dilate, opt.dilate_radius);
  if (opt.fill_holes) mask = morphology(mask, MorphOp::FillHoles);
  if (opt.erode_radius > 0) mask = morphology(mask, MorphOp::Erode, opt.erode_radius);
  const std::size_t fg = count_set(mask);
  const double fraction = mask.size() ? static_cast<double>(fg) / mask.size() : 0.0;
  return {mask,
          {{"method", opt.background ? "background_subtraction" : "b_threshold"},
           {"width", mask.width()},
           {"height", mask.height()},
           {"foreground_pixels", fg},
           {"foreground_fraction", fraction}}};
}

// --- validate ---------------------------------------------------------------

/// Validates every *.json under `dir/metadata` (or `dir` itself). For a run
/// directory, also checks that referenced images exist and that no subimage
/// is orphaned.
inline Json cmd_validate(const fs::path& dir, BoxOrigin origin = BoxOrigin::TopLeft) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  const bool run_dir = fs::is_directory(dir / "metadata");
  const fs::path meta_dir = run_dir ? dir / "metadata" : dir;

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(meta_dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  Json errors = Json::array();
  auto add = [&](const std::string& file, const std::string& path, const std::string& msg) {
    errors.push_back({{"file", file}, {"path", path}, {"message", msg}});
  };
  std::set<std::string> referenced;
  for (const auto& f : files) {
    const ParseResult pr = parse_and_validate(io::read_text(f), origin);
    for (const auto& e : pr.errors) add(f.filename().string(), e.path, e.message);
    if (!run_dir || !pr.record) continue;
    const auto& r = *pr.record;
    for (const auto& name : {r.file_name, r.bb_file_name})
      if (!fs::exists(dir / "masters" / name)) add(f.filename().string(), "file_name", "missing image " + name);
    for (std::size_t i = 0; i < r.bounding_boxes.size(); ++i) {
      const auto& name = r.bounding_boxes[i].subimage_file_name;
      if (!referenced.insert(name).second)
        add(f.filename().string(), "bounding_boxes[" + std::to_string(i) + "].subimage_file_name",
            "subimage name reused across the run");
      if (!fs::exists(dir / "subimages" / "Edge" / name) &&
          !fs::exists(dir / "subimages" / "Interior" / name))
        add(f.filename().string(), "bounding_boxes[" + std::to_string(i) + "].subimage_file_name",
            "missing subimage " + name);
    }
  }
  if (run_dir) {
    for (const char* cls : {"Edge", "Interior"}) {
      const fs::path sub = dir / "subimages" / cls;
      if (!fs::is_directory(sub)) continue;
      for (const auto& e : fs::directory_iterator(sub))
        if (e.is_regular_file() && !referenced.count(e.path().filename().string()))
          add(e.path().filename().string(), "", "orphaned subimage not referenced by metadata");
    }
  }
  return {{"directory", dir.string()},
          {"files_checked", files.size()},
          {"error_count", errors.size()},
          {"ok", errors.empty()},
          {"errors", errors}};
}

// --- stats ------------------------------------------------------------------

struct IntervalRequest {
  std::int64_t successes = 0;
  std::int64_t trials = 1;
  double alpha = 0.05;
};

inline RunAccounting accounting_from_log(const nlohmann::json& log) {
  try {
    return {log.at("t_p").get<double>(), log.at("t_d").get<double>(), log.at("t_c").get<double>(),
            log.at("n_masters").get<std::size_t>(), log.at("n_subimages").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("run log: ") + e.what());
  }
}

inline Json cmd_stats(const std::optional<RunAccounting>& acc, const ClassCounts& counts,
                      const std::vector<IntervalRequest>& intervals) {
  Json report = Json::object();
  if (acc) {
    Json rates = {{"t_p", acc->t_p}, {"t_d", acc->t_d}, {"t_c", acc->t_c},
                  {"n_masters", acc->n_masters}, {"n_subimages", acc->n_subimages}};
    rates["t_m"] = master_rate(*acc);
    rates["t_s"] = subimage_rate(*acc);
    report["rates"] = rates;
  }
  if (!counts.empty()) {
    Json w = Json::object();
    for (const auto& [name, v] : class_weights(counts)) w[name] = v;
    report["class_weights"] = w;
  }
  if (!intervals.empty()) {
    Json arr = Json::array();
    for (const auto& r : intervals) {
      const Interval ci = clopper_pearson(r.successes, r.trials, r.alpha);
      arr.push_back({{"successes", r.successes},
                     {"trials", r.trials},
                     {"alpha", r.alpha},
                     {"lower", ci.lower},
                     {"upper", ci.upper}});
    }
    report["clopper_pearson"] = arr;
  }
  return report;
}

inline std::string stats_csv(const Json& report) {
  std::string out = "metric,value\n";
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  if (report.contains("rates")) {
    out += "t_m," + num(report["rates"]["t_m"].get<double>()) + "\n";
    out += "t_s," + num(report["rates"]["t_s"].get<double>()) + "\n";
  }
  if (report.contains("class_weights"))
    for (const auto& [k, v] : report["class_weights"].items())
      out += "weight_" + k + "," + num(v.get<double>()) + "\n";
  if (report.contains("clopper_pearson"))
    for (const auto& ci : report["clopper_pearson"]) {
      const std::string tag = std::to_string(ci["successes"].get<long>()) + "/" +
                              std::to_string(ci["trials"].get<long>());
      out += "cp_lower_" + tag + "," + num(ci["lower"].get<double>()) + "\n";
      out += "cp_upper_" + tag + "," + num(ci["upper"].get<double>()) + "\n";
    }
  return out;
}

}  // namespace gantrylab
