// Command-line entry point: plan, simulate, segment, validate, stats.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gantrylab/toolkit.hpp"

namespace fs = std::filesystem;
using namespace gantrylab;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> scale;
  std::optional<std::string> out;
  bool legacy_origin = false;
  bool json = false;
  std::string report_path;
};

ToolkitConfig load_config(const Common& c) {
  ToolkitConfig cfg;
  if (!c.config_path.empty()) cfg = io::config_from_json(io::read_json(c.config_path));
  if (c.seed) cfg.seed = *c.seed;
  if (c.scale) cfg.render_scale = *c.scale;
  if (c.out) cfg.output_dir = *c.out;
  if (c.legacy_origin) cfg.box_origin = BoxOrigin::UpperRight;
  cfg.validate();
  return cfg;
}

void emit(const Common& c, const Json& report, const std::string& summary) {
  if (!c.report_path.empty()) io::write_atomic(c.report_path, report.dump(2) + "\n");
  if (c.json) std::cout << report.dump(2) << "\n";
  else std::cout << summary;
}

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "64-bit seed for generated inputs");
  app->add_option("--scale", c.scale, "render downsampling factor");
  if (with_out) app->add_option("--out", c.out, "output path");
  app->add_flag("--legacy-origin", c.legacy_origin,
                "mirror x so box coordinates use the upper-right origin");
  app->add_flag("--json", c.json, "print the JSON report instead of a summary");
  app->add_option("--report", c.report_path, "also write the JSON report to this file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gantrylab: gantry imaging simulator and labeled-dataset toolkit"};
  app.require_subcommand(1);
  Common common;

  // plan
  auto* plan = app.add_subcommand("plan", "order waypoints with the nested zig-zag planner");
  add_common(plan, common);
  std::string waypoints_path;
  std::size_t random_n = 0;
  bool parallel = false;
  plan->add_option("--waypoints", waypoints_path, "waypoints JSON")->check(CLI::ExistingFile);
  plan->add_option("--random", random_n, "generate N random waypoints instead");
  plan->add_flag("--parallel", parallel, "move X, Y and Z simultaneously");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate an imaging run and write a dataset");
  add_common(sim, common);
  std::string scene_path, poses_path;
  bool demo = false, jpg_names = false;
  sim->add_option("--scene", scene_path, "scene JSON")->check(CLI::ExistingFile);
  sim->add_flag("--demo", demo, "use the seeded 9-plant demo scene");
  sim->add_option("--poses", poses_path, "poses JSON (default: generated around each plant)")
      ->check(CLI::ExistingFile);
  sim->add_flag("--jpg-names", jpg_names, "name image files *.jpg");

  // segment
  auto* seg = app.add_subcommand("segment", "chroma-key a PNG image into a binary mask");
  add_common(seg, common);
  std::string image_path, background_path;
  SegmentOptions seg_opt;
  seg->add_option("image", image_path, "input PNG")->required()->check(CLI::ExistingFile);
  seg->add_option("--threshold", seg_opt.threshold, "CIELAB b threshold (foreground: b > t)");
  seg->add_option("--background", background_path, "background-only PNG for subtraction")
      ->check(CLI::ExistingFile);
  seg->add_option("--tolerance", seg_opt.tolerance, "per-channel tolerance for subtraction");
  seg->add_option("--blur", seg_opt.blur_radius, "box blur radius before keying");
  seg->add_option("--dilate", seg_opt.dilate_radius, "dilation radius");
  seg->add_flag("--fill-holes", seg_opt.fill_holes, "fill enclosed background regions");
  seg->add_option("--erode", seg_opt.erode_radius, "erosion radius");

  // validate
  auto* val = app.add_subcommand("validate", "validate metadata files or a run directory");
  add_common(val, common, false);
  std::string validate_dir;
  val->add_option("dir", validate_dir, "run or metadata directory")->required();

  // stats
  auto* st = app.add_subcommand("stats", "production rates, class weights, binomial intervals");
  add_common(st, common, false);
  std::string run_log_path;
  std::optional<double> tp, td, tc;
  std::optional<std::size_t> nm, ns;
  std::vector<std::string> class_args, cp_args;
  bool csv = false;
  st->add_option("--run-log", run_log_path, "run_log.json from simulate")->check(CLI::ExistingFile);
  st->add_option("--tp", tp, "imaging time t_p (s)");
  st->add_option("--td", td, "download time t_d (s)");
  st->add_option("--tc", tc, "cropping time t_c (s)");
  st->add_option("--nm", nm, "master image count");
  st->add_option("--ns", ns, "subimage count");
  st->add_option("--class", class_args, "class count as name=count (repeatable)");
  st->add_option("--cp", cp_args, "interval request k,n[,alpha] (repeatable)");
  st->add_flag("--csv", csv, "print CSV instead of a summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;  // usage errors
  }

  try {
    if (*plan) {
      ToolkitConfig cfg = load_config(common);
      if (parallel) cfg.motion.parallel = true;
      WaypointSet set;
      if (!waypoints_path.empty()) set = io::waypoints_from_json(io::read_json(waypoints_path), cfg.volume());
      else if (random_n > 0) set = random_waypoints(random_n, cfg.volume(), cfg.seed);
      else throw DomainError("plan: give --waypoints FILE or --random N");
      const Json report = cmd_plan(cfg, set);
      if (common.out) io::write_atomic(*common.out, report.dump(2) + "\n");
      std::string s = "route:";
      for (const auto& i : report["route"]) s += " " + std::to_string(i.get<std::size_t>());
      s += "\n" + fmt("zig-zag:          %.4f s", report["total_seconds"].get<double>()) +
           fmt(", %.1f mm\n", report["total_millimeters"].get<double>());
      const auto& cmp = report["comparison"];
      s += fmt("nearest-neighbor: %.4f s", cmp["nearest_neighbor"]["seconds"].get<double>()) +
           fmt(", %.1f mm\n", cmp["nearest_neighbor"]["millimeters"].get<double>());
      if (cmp.contains("brute_force"))
        s += fmt("brute force:      %.4f s", cmp["brute_force"]["seconds"].get<double>()) +
             fmt(", %.1f mm\n", cmp["brute_force"]["millimeters"].get<double>());
      emit(common, report, s);
    } else if (*sim) {
      ToolkitConfig cfg = load_config(common);
      if (jpg_names) cfg.jpg_names = true;
      if (scene_path.empty()) scene_path = cfg.scene_path;
      Scene scene;
      if (demo || scene_path.empty()) scene = demo_scene(cfg.seed, cfg.volume());
      else scene = io::scene_from_json(io::read_json(scene_path));
      const auto poses = poses_path.empty() ? default_poses(cfg, scene)
                                            : io::poses_from_json(io::read_json(poses_path));
      const Json report = cmd_simulate(cfg, scene, poses, cfg.output_dir);
      std::string s = "wrote " + cfg.output_dir + ": " +
                      std::to_string(report["masters"].get<std::size_t>()) + " masters, " +
                      std::to_string(report["subimages"].get<std::size_t>()) + " subimages\n" +
                      fmt("t_p = %.1f s\n", report["t_p"].get<double>());
      if (report.contains("t_m")) s += fmt("t_m = %.3f s/image\n", report["t_m"].get<double>());
      if (report.contains("t_s")) s += fmt("t_s = %.3f s/image\n", report["t_s"].get<double>());
      emit(common, report, s);
    } else if (*seg) {
      const Image img = png::read(image_path);
      if (!background_path.empty()) seg_opt.background = png::read(background_path);
      const SegmentResult res = cmd_segment(img, seg_opt);
      const std::string out = common.out.value_or(fs::path(image_path).stem().string() + "-mask.png");
      write_png_atomic(out, res.mask);
      Json report = res.report;
      report["mask"] = out;
      emit(common, report,
           "mask " + out + ": " + std::to_string(report["foreground_pixels"].get<std::size_t>()) +
               " foreground pixels" +
               fmt(" (%.4f)\n", report["foreground_fraction"].get<double>()));
    } else if (*val) {
      const BoxOrigin origin = common.legacy_origin ? BoxOrigin::UpperRight : BoxOrigin::TopLeft;
      const Json report = cmd_validate(validate_dir, origin);
      std::string s = std::to_string(report["files_checked"].get<std::size_t>()) +
                      " metadata files, " +
                      std::to_string(report["error_count"].get<std::size_t>()) + " errors\n";
      for (const auto& e : report["errors"])
        s += "  " + e["file"].get<std::string>() + " " + e["path"].get<std::string>() + ": " +
             e["message"].get<std::string>() + "\n";
      emit(common, report, s);
      return report["ok"].get<bool>() ? 0 : 1;
    } else if (*st) {
      std::optional<RunAccounting> acc;
      if (!run_log_path.empty()) acc = accounting_from_log(io::read_json(run_log_path));
      if (tp || td || tc || nm || ns) {
        RunAccounting a = acc.value_or(RunAccounting{});
        if (tp) a.t_p = *tp;
        if (td) a.t_d = *td;
        if (tc) a.t_c = *tc;
        if (nm) a.n_masters = *nm;
        if (ns) a.n_subimages = *ns;
        acc = a;
      }
      ClassCounts counts;
      for (const auto& arg : class_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos) throw DomainError("--class expects name=count");
        counts[arg.substr(0, eq)] = std::stoll(arg.substr(eq + 1));
      }
      std::vector<IntervalRequest> reqs;
      for (const auto& arg : cp_args) {
        IntervalRequest r;
        char tail = 0;
        long long k = 0, n = 0;
        const int got = std::sscanf(arg.c_str(), "%lld,%lld,%lf%c", &k, &n, &r.alpha, &tail);
        if (got < 2 || got > 3) throw DomainError("--cp expects k,n[,alpha]");
        r.successes = k;
        r.trials = n;
        reqs.push_back(r);
      }
      if (!acc && counts.empty() && reqs.empty())
        throw DomainError("stats: nothing to compute (give --run-log, --tp.., --class or --cp)");
      const Json report = cmd_stats(acc, counts, reqs);
      if (csv && !common.json) {
        if (!common.report_path.empty()) io::write_atomic(common.report_path, report.dump(2) + "\n");
        std::cout << stats_csv(report);
      } else {
        std::string s;
        if (report.contains("rates"))
          s += fmt("t_m = %.3f s/image\n", report["rates"]["t_m"].get<double>()) +
               fmt("t_s = %.3f s/image\n", report["rates"]["t_s"].get<double>());
        if (report.contains("class_weights"))
          for (const auto& [k, v] : report["class_weights"].items())
            s += "weight[" + k + "] = " + fmt("%.4f\n", v.get<double>());
        if (report.contains("clopper_pearson"))
          for (const auto& ci : report["clopper_pearson"])
            s += std::to_string(ci["successes"].get<long>()) + "/" +
                 std::to_string(ci["trials"].get<long>()) +
                 fmt(": [%.4f, ", ci["lower"].get<double>()) +
                 fmt("%.4f]\n", ci["upper"].get<double>());
        emit(common, report, s);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
