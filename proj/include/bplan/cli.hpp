#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bplan/bench.hpp"
#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/io.hpp"
#include "bplan/labeling.hpp"
#include "bplan/neuralnet.hpp"
#include "bplan/occupancy.hpp"
#include "bplan/perception.hpp"
#include "bplan/planner.hpp"
#include "bplan/query_gen.hpp"
#include "bplan/rng.hpp"
#include "bplan/scene.hpp"
#include "bplan/smoothing.hpp"

namespace bplan::cli {

namespace detail {

inline Point3 parse_point(const std::string& s) {
    Point3 p;
    char extra;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &p.x, &p.y, &p.z, &extra) != 3)
        throw Error("expected a point as x,y,z: " + s);
    return p;
}

inline Rgb parse_color(const std::string& s) {
    int r, g, b;
    char extra;
    if (std::sscanf(s.c_str(), "%d,%d,%d%c", &r, &g, &b, &extra) != 3)
        throw Error("expected a color as r,g,b: " + s);
    return {static_cast<double>(r), static_cast<double>(g), static_cast<double>(b)};
}

inline uint64_t default_seed() {
    if (const char* env = std::getenv("BPLAN_SEED")) {
        char* end = nullptr;
        uint64_t v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return v;
    }
    return 1;
}

inline std::vector<Point3> plan_targets(const std::string& mode_str,
                                        const occupancy::OccupancyOctree& map,
                                        const scene::Scene& sc, const scene::PlanningQuery& query,
                                        const std::string& weights_path,
                                        const planner::PlannerConfig& cfg, uint64_t seed) {
    bench::PlannerMode mode = bench::parse_mode(mode_str);
    if (mode == bench::PlannerMode::Baseline) return {};
    if (mode == bench::PlannerMode::BottleneckOracle) {
        planner::PlannerConfig base = cfg;
        base.p_goal = 0.1;
        base.p_bottleneck = 0.0;
        base.seed = derive_seed(seed, 0x0acel);
        auto sol = planner::plan(map, query, {}, base);
        if (!sol.success) throw Error("oracle labeling run found no path");
        auto labels = labeling::select_bottleneck_labels(sol.path, map);
        return {labels.begin(), labels.end()};
    }
    if (weights_path.empty()) throw Error("--mode bottleneck_learned requires --weights");
    auto params = nn::load_weights(weights_path);
    auto pts = nn::predict_bottlenecks(params, map, query, sc.bounds);
    return {pts.begin(), pts.end()};
}

}  // namespace detail

/// Parses and runs one subcommand. Returns 0 on success, 1 on domain errors,
/// 2 on usage errors.
inline int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"bottleneck-guided motion planning toolkit"};
    app.require_subcommand(1);
    uint64_t seed = detail::default_seed();

    // scene-gen
    std::string sg_family = "elongated", sg_out = "scene.scene";
    auto* scene_gen = app.add_subcommand("scene-gen", "generate a benchmark scene");
    scene_gen->add_option("--family", sg_family, "elongated|narrow_circular|cluttered");
    scene_gen->add_option("--out", sg_out, "scene file to write");
    scene_gen->add_option("--seed", seed, "rng seed");
    scene_gen->callback([&] {
        auto sc = scene::make_scene(scene::parse_family(sg_family), seed);
        scene::save(sc, sg_out);
        std::cout << "wrote " << sg_out << " (" << sc.obstacles.size() << " obstacles)\n";
    });

    // cloud-sim
    std::string cs_scene, cs_out = "cloud.txt", cs_pos = "0,-1.5,2.8", cs_look = "0,0,1";
    double cs_res = occupancy::kDefaultAngularResolution;
    double cs_tilt_deg = 0;
    std::string cs_translate;
    auto* cloud_sim = app.add_subcommand("cloud-sim", "render a synthetic sensor cloud");
    cloud_sim->add_option("--scene", cs_scene, "scene file")->required();
    cloud_sim->add_option("--pos", cs_pos, "sensor position x,y,z");
    cloud_sim->add_option("--look-at", cs_look, "aim point x,y,z");
    cloud_sim->add_option("--angular-res", cs_res, "ray spacing in radians");
    cloud_sim->add_option("--tilt-deg", cs_tilt_deg, "apply world transform: tilt about x, degrees");
    cloud_sim->add_option("--translate", cs_translate, "apply world transform: translation x,y,z");
    cloud_sim->add_option("--out", cs_out, "cloud file to write");
    cloud_sim->add_option("--seed", seed, "rng seed");
    cloud_sim->callback([&] {
        auto sc = scene::load(cs_scene);
        auto pose = look_at(detail::parse_point(cs_pos), detail::parse_point(cs_look));
        auto cloud = perception::render_point_cloud(sc, pose, cs_res);
        if (!cs_translate.empty()) {
            cloud = perception::transform_cloud(cloud, cs_tilt_deg * M_PI / 180.0,
                                                detail::parse_point(cs_translate));
        }
        perception::save(cloud, cs_out);
        std::cout << "wrote " << cs_out << " (" << cloud.points.size() << " points)\n";
    });

    // segment
    std::string sg_cloud, sg_cloud_out = "cloud_clean.txt", sg_ref = "255,102,0";
    int sg_k = 10;
    double sg_t1 = 30.0, sg_t2 = 20.0, sg_tol = 40.0, sg_leaf = 0.0;
    double sg_zmin = -1e30, sg_zmax = 1e30;
    auto* segment = app.add_subcommand("segment", "region growing + robot self-identification");
    segment->add_option("--cloud", sg_cloud, "input cloud file")->required();
    segment->add_option("--z-min", sg_zmin, "passthrough filter lower z bound");
    segment->add_option("--z-max", sg_zmax, "passthrough filter upper z bound");
    segment->add_option("--leaf", sg_leaf, "voxel downsampling leaf size (0 = off)");
    segment->add_option("--k", sg_k, "neighbors for growing/curvature");
    segment->add_option("--threshold1", sg_t1, "seed color distance for growth");
    segment->add_option("--threshold2", sg_t2, "mean color distance for region merge");
    segment->add_option("--tolerance", sg_tol, "robot color tolerance");
    segment->add_option("--reference-color", sg_ref, "robot color r,g,b");
    segment->add_option("--out", sg_cloud_out, "filtered cloud file");
    segment->add_option("--seed", seed, "rng seed");
    segment->callback([&] {
        auto cloud = perception::load(sg_cloud);
        if (sg_zmin > -1e29 || sg_zmax < 1e29)
            cloud = perception::passthrough_filter(cloud, 2, sg_zmin, sg_zmax);
        if (sg_leaf > 0) cloud = perception::voxel_downsample(cloud, sg_leaf);
        auto regions = perception::region_grow_segment(cloud, sg_k, sg_t1, sg_t2);
        auto filtered =
            perception::remove_robot_regions(cloud, regions, detail::parse_color(sg_ref), sg_tol);
        perception::save(filtered, sg_cloud_out);
        std::cout << "regions: " << regions.size() << ", kept " << filtered.points.size() << "/"
                  << cloud.points.size() << " points -> " << sg_cloud_out << "\n";
    });

    // map-build
    std::string mb_scene, mb_dump = "map.txt", mb_descriptor;
    double mb_res = occupancy::kDefaultAngularResolution;
    double mb_leaf = occupancy::kDefaultLeafResolution;
    uint32_t mb_dims = 32;
    bool mb_from_scene = false;
    auto* map_build = app.add_subcommand("map-build", "build an occupancy map");
    map_build->add_option("--scene", mb_scene, "scene file")->required();
    map_build->add_option("--angular-res", mb_res, "sensor ray spacing, radians");
    map_build->add_option("--leaf", mb_leaf, "leaf resolution, meters");
    map_build->add_flag("--from-scene", mb_from_scene, "voxelize analytically instead of ray casting");
    map_build->add_option("--dump", mb_dump, "occupied-leaf dump file");
    map_build->add_option("--descriptor", mb_descriptor, "also write a voxel descriptor (.bvg)");
    map_build->add_option("--descriptor-dims", mb_dims, "descriptor cells per axis");
    map_build->add_option("--seed", seed, "rng seed");
    map_build->callback([&] {
        auto sc = scene::load(mb_scene);
        auto map = mb_from_scene
                       ? occupancy::voxelize_scene(sc, mb_leaf)
                       : occupancy::build_map(sc, occupancy::default_sensor_poses(sc.bounds),
                                              mb_res, mb_leaf);
        io::write_file(mb_dump, occupancy::dump_occupied(map));
        std::cout << "wrote " << mb_dump << " (" << map.occupied_leaves().size()
                  << " occupied leaves)\n";
        if (!mb_descriptor.empty()) {
            double side = sc.bounds.max_side() / mb_dims;
            auto grid = occupancy::to_voxel_descriptor(map, sc.bounds.min,
                                                       {mb_dims, mb_dims, mb_dims}, side);
            io::write_file(mb_descriptor, occupancy::to_binary(grid));
            std::cout << "wrote " << mb_descriptor << "\n";
        }
    });

    // dataset-gen
    std::string dg_out = "dataset.bnk", dg_weights = "1,1,1";
    int dg_n = 200;
    bool dg_desk = false, dg_verify = false;
    auto* dataset_gen = app.add_subcommand("dataset-gen", "build the supervised dataset");
    dataset_gen->add_option("--n", dg_n, "number of planning problems");
    dataset_gen->add_flag("--desk", dg_desk, "laptop preset: n=50, 16^3 grids");
    dataset_gen->add_option("--families", dg_weights, "family weights w_elongated,w_narrow,w_cluttered");
    dataset_gen->add_flag("--verify", dg_verify, "re-verify labels against each sample's map");
    dataset_gen->add_option("--out", dg_out, "dataset file");
    dataset_gen->add_option("--seed", seed, "rng seed");
    dataset_gen->callback([&] {
        labeling::DatasetConfig cfg = dg_desk ? labeling::desk_dataset_config(seed)
                                              : labeling::DatasetConfig{};
        cfg.seed = seed;
        if (!dg_desk) cfg.n_problems = dg_n;
        double w0, w1, w2;
        char extra;
        if (std::sscanf(dg_weights.c_str(), "%lf,%lf,%lf%c", &w0, &w1, &w2, &extra) != 3)
            throw Error("expected --families w0,w1,w2");
        cfg.family_weights = {w0, w1, w2};
        labeling::ProblemLog log;
        int verified = 0, violations = 0;
        labeling::SampleSink sink;
        if (dg_verify) {
            sink = [&](const labeling::DatasetSample& sample, const std::vector<Point3>& path,
                       const occupancy::OccupancyOctree& map) {
                std::array<Point3, 3> pts;
                for (int l = 0; l < 3; ++l)
                    pts[l] = labeling::denormalize(
                        {sample.labels[3 * l], sample.labels[3 * l + 1], sample.labels[3 * l + 2]},
                        default_bounds());
                ++verified;
                if (!labeling::verify_labels(path, map, pts)) ++violations;
            };
        }
        auto ds = labeling::build_dataset(cfg, sink, &log);
        labeling::save(ds, dg_out);
        std::cout << "wrote " << dg_out << ": " << ds.samples.size() << " samples, "
                  << ds.test_indices().size() << " test / " << ds.train_indices().size()
                  << " train";
        if (log.regenerated) std::cout << ", " << log.regenerated << " problems regenerated";
        std::cout << "\n";
        if (dg_verify) {
            std::cout << "label verification: " << (verified - violations) << "/" << verified
                      << " ok\n";
            if (violations) throw Error("label verification failed");
        }
    });

    // pretrain
    std::string pt_out = "pretrained.bwt";
    int pt_dims = 16, pt_epochs = 20, pt_train = 300, pt_holdout = 60, pt_batch = 32;
    auto* pretrain = app.add_subcommand("pretrain", "shape-classification pretext pretraining");
    pretrain->add_option("--dims", pt_dims, "input grid side (match the dataset)");
    pretrain->add_option("--epochs", pt_epochs, "training epochs");
    pretrain->add_option("--n-train", pt_train, "pretext training samples");
    pretrain->add_option("--n-holdout", pt_holdout, "held-out samples for accuracy");
    pretrain->add_option("--batch", pt_batch, "batch size");
    pretrain->add_option("--out", pt_out, "weights file");
    pretrain->add_option("--seed", seed, "rng seed");
    pretrain->callback([&] {
        nn::PretextConfig cfg;
        cfg.input_dim = pt_dims;
        cfg.epochs = pt_epochs;
        cfg.n_train = pt_train;
        cfg.n_holdout = pt_holdout;
        cfg.batch_size = pt_batch;
        cfg.seed = seed;
        auto result = nn::pretrain_pretext(cfg);
        nn::save_weights(result.params, pt_out);
        std::cout << "holdout accuracy: " << result.holdout_accuracy << "\n";
        std::cout << "parameters: " << nn::count_parameters(result.params) << "\n";
        std::cout << "wrote " << pt_out << "\n";
    });

    // train
    std::string tr_dataset, tr_out = "weights.bwt", tr_from, tr_history;
    int tr_epochs = 170, tr_batch = 16;
    double tr_lr = 0.001;
    auto* train_cmd = app.add_subcommand("train", "train the bottleneck regression network");
    train_cmd->add_option("--dataset", tr_dataset, "dataset file (.bnk)")->required();
    train_cmd->add_option("--epochs", tr_epochs, "training epochs");
    train_cmd->add_option("--batch", tr_batch, "batch size");
    train_cmd->add_option("--lr", tr_lr, "Adam learning rate");
    train_cmd->add_option("--from-pretrained", tr_from, "transfer conv layers from these weights");
    train_cmd->add_option("--history", tr_history, "write per-epoch MSE history CSV");
    train_cmd->add_option("--out", tr_out, "weights file");
    train_cmd->add_option("--seed", seed, "rng seed");
    train_cmd->callback([&] {
        auto ds = labeling::load(tr_dataset);
        if (ds.samples.empty()) throw Error("dataset is empty");
        nn::NetworkParams net;
        if (!tr_from.empty()) {
            net = nn::transfer(nn::load_weights(tr_from), seed);
        } else {
            net = nn::make_regression_net(static_cast<int>(ds.grid_dims[0]), seed);
        }
        nn::TrainConfig cfg;
        cfg.epochs = tr_epochs;
        cfg.batch_size = tr_batch;
        cfg.learning_rate = tr_lr;
        cfg.seed = seed;
        auto history = nn::train(net, ds, cfg);
        nn::save_weights(net, tr_out);
        std::cout << "parameters: " << nn::count_parameters(net) << " ("
                  << nn::count_parameters(net, true) << " trainable)\n";
        std::cout << "initial train mse: " << history.front().train_mse
                  << ", final train mse: " << history.back().train_mse
                  << ", final test mse: " << history.back().test_mse << "\n";
        std::cout << "wrote " << tr_out << "\n";
        if (!tr_history.empty()) {
            std::string csv = "epoch,train_mse,test_mse\n";
            for (size_t e = 0; e < history.size(); ++e)
                csv += std::to_string(e) + ',' + io::fmt_exact(history[e].train_mse) + ',' +
                       io::fmt_exact(history[e].test_mse) + '\n';
            io::write_file(tr_history, csv);
        }
    });

    // predict
    std::string pd_weights, pd_scene, pd_start, pd_goal, pd_out = "bottlenecks.txt";
    double pd_leaf = occupancy::kDefaultLeafResolution;
    auto* predict = app.add_subcommand("predict", "predict bottleneck points for a query");
    predict->add_option("--weights", pd_weights, "weights file")->required();
    predict->add_option("--scene", pd_scene, "scene file")->required();
    predict->add_option("--start", pd_start, "start x,y,z")->required();
    predict->add_option("--goal", pd_goal, "goal x,y,z")->required();
    predict->add_option("--leaf", pd_leaf, "map leaf resolution");
    predict->add_option("--out", pd_out, "output file (3 points)");
    predict->add_option("--seed", seed, "rng seed");
    predict->callback([&] {
        auto sc = scene::load(pd_scene);
        auto map = occupancy::voxelize_scene(sc, pd_leaf);
        scene::PlanningQuery query{detail::parse_point(pd_start), detail::parse_point(pd_goal)};
        auto params = nn::load_weights(pd_weights);
        auto pts = nn::predict_bottlenecks(params, map, query, sc.bounds);
        std::string out;
        for (const auto& p : pts)
            out += io::fmt_real(p.x) + " " + io::fmt_real(p.y) + " " + io::fmt_real(p.z) + "\n";
        io::write_file(pd_out, out);
        std::cout << "wrote " << pd_out << "\n";
    });

    // plan
    std::string pl_scene, pl_start, pl_goal, pl_mode = "baseline", pl_weights, pl_out = "path.txt";
    bool pl_from_scene = false;
    planner::PlannerConfig pl_cfg;
    auto* plan_cmd = app.add_subcommand("plan", "plan a path through a scene");
    plan_cmd->add_option("--scene", pl_scene, "scene file")->required();
    plan_cmd->add_flag("--map-from-scene", pl_from_scene, "voxelize the scene as the map")
        ->required();
    plan_cmd->add_option("--start", pl_start, "start x,y,z")->required();
    plan_cmd->add_option("--goal", pl_goal, "goal x,y,z")->required();
    plan_cmd->add_option("--mode", pl_mode, "baseline|bottleneck_oracle|bottleneck_learned");
    plan_cmd->add_option("--weights", pl_weights, "weights for bottleneck_learned");
    plan_cmd->add_option("--step", pl_cfg.step, "extension step d");
    plan_cmd->add_option("--max-iterations", pl_cfg.max_iterations, "iteration budget");
    plan_cmd->add_option("--goal-tolerance", pl_cfg.goal_tolerance, "goal acceptance radius");
    plan_cmd->add_option("--ee-radius", pl_cfg.ee_radius, "end-effector sphere radius");
    plan_cmd->add_option("--out", pl_out, "path file");
    plan_cmd->add_option("--seed", seed, "rng seed");
    plan_cmd->callback([&] {
        auto sc = scene::load(pl_scene);
        auto map = occupancy::voxelize_scene(sc);
        scene::PlanningQuery query{detail::parse_point(pl_start), detail::parse_point(pl_goal)};
        bench::PlannerMode mode = bench::parse_mode(pl_mode);
        pl_cfg.seed = seed;
        if (mode != bench::PlannerMode::Baseline) {
            pl_cfg.p_goal = 0.2;
            pl_cfg.p_bottleneck = 0.4;
        }
        auto targets = detail::plan_targets(pl_mode, map, sc, query, pl_weights, pl_cfg, seed);
        auto res = planner::plan(map, query, targets, pl_cfg);
        io::write_file(pl_out, planner::to_text(res));
        std::cout << (res.success ? "path found" : "no path") << ": tree_size=" << res.tree_size
                  << " iterations=" << res.iterations << " wall_time_s=" << res.wall_time << "\n";
        std::cout << "wrote " << pl_out << "\n";
        if (!res.success) throw Error("planning failed within the iteration budget");
    });

    // smooth
    std::string sm_path, sm_scene, sm_out = "smooth.txt";
    bool sm_from_scene = false;
    double sm_tension = 1.0 / 3.0, sm_delta = 0.05, sm_ee = kDefaultEndEffectorRadius;
    int sm_samples = 16;
    auto* smooth_cmd = app.add_subcommand("smooth", "fit a cubic Bezier chain through a path");
    smooth_cmd->add_option("--path", sm_path, "plan result file")->required();
    smooth_cmd->add_option("--scene", sm_scene, "scene file (for re-validation)")->required();
    smooth_cmd->add_flag("--map-from-scene", sm_from_scene, "voxelize the scene as the map")
        ->required();
    smooth_cmd->add_option("--tension", sm_tension, "tangent tension in (0, 0.5]");
    smooth_cmd->add_option("--delta", sm_delta, "collision sampling spacing");
    smooth_cmd->add_option("--ee-radius", sm_ee, "end-effector sphere radius");
    smooth_cmd->add_option("--samples-per-segment", sm_samples, "export sampling density");
    smooth_cmd->add_option("--out", sm_out, "smooth path file");
    smooth_cmd->add_option("--seed", seed, "rng seed");
    smooth_cmd->callback([&] {
        auto res = planner::from_text(io::read_file(sm_path));
        if (res.path.size() < 2) throw Error("path file has fewer than 2 waypoints");
        auto sc = scene::load(sm_scene);
        auto map = occupancy::voxelize_scene(sc);
        auto smooth = smoothing::fit_bezier_chain(res.path, sm_tension);
        if (smoothing::validate_smooth(smooth, map, sm_delta, sm_ee)) {
            io::write_file(sm_out, smoothing::to_text(smooth, sm_samples));
            std::cout << "smoothed path ok -> " << sm_out << "\n";
        } else {
            std::string out = "# fallback=polyline segments=" +
                              std::to_string(res.path.size() - 1) + "\n";
            for (const auto& p : res.path)
                out += io::fmt_real(p.x) + " " + io::fmt_real(p.y) + " " + io::fmt_real(p.z) + "\n";
            io::write_file(sm_out, out);
            std::cout << "smoothed curve collides; kept piecewise-linear path -> " << sm_out
                      << "\n";
        }
    });

    // bench
    std::string bn_families = "all", bn_modes = "baseline,bottleneck_oracle", bn_weights;
    std::string bn_prefix = "bench";
    int bn_cycles = 20, bn_jobs = 1;
    bool bn_fixed = false;
    auto* bench_cmd = app.add_subcommand("bench", "compare planner modes across scene families");
    bench_cmd->add_option("--families", bn_families, "all or comma list");
    bench_cmd->add_option("--cycles", bn_cycles, "cycles per family");
    bench_cmd->add_option("--mode", bn_modes, "comma list of planner modes");
    bench_cmd->add_option("--weights", bn_weights, "weights for bottleneck_learned");
    bench_cmd->add_flag("--fixed-scene", bn_fixed, "reuse one scene per family across cycles");
    bench_cmd->add_option("--jobs", bn_jobs, "worker thread cap");
    bench_cmd->add_option("--out-prefix", bn_prefix, "output file prefix");
    bench_cmd->add_option("--seed", seed, "rng seed");
    bench_cmd->callback([&] {
        bench::BenchConfig cfg;
        cfg.n_cycles = bn_cycles;
        cfg.seed = seed;
        cfg.fixed_scene = bn_fixed;
        cfg.jobs = bn_jobs;
        if (bn_families != "all") {
            cfg.families.clear();
            size_t start = 0;
            while (start <= bn_families.size()) {
                size_t comma = bn_families.find(',', start);
                cfg.families.push_back(
                    scene::parse_family(bn_families.substr(start, comma - start)));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
        cfg.modes.clear();
        size_t start = 0;
        while (start <= bn_modes.size()) {
            size_t comma = bn_modes.find(',', start);
            cfg.modes.push_back(bench::parse_mode(bn_modes.substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        std::optional<nn::NetworkParams> params;
        if (!bn_weights.empty()) params = nn::load_weights(bn_weights);
        auto records = bench::run_benchmark(cfg, params ? &*params : nullptr);
        auto summary = bench::summarize(records);
        io::write_file(bn_prefix + ".csv", bench::emit_records_csv(records));
        io::write_file(bn_prefix + "_summary.csv", bench::emit_summary_csv(summary));
        io::write_file(bn_prefix + ".svg", bench::emit_svg_bars(summary));
        for (const auto& imp : summary.improvements) {
            std::cout << scene::family_name(imp.family) << " " << bench::mode_name(imp.planner)
                      << ": tree size " << io::fmt_real(imp.tree_mean_pct, 3)
                      << "% better, planning time " << io::fmt_real(imp.time_mean_pct, 3)
                      << "% better (means vs baseline)\n";
        }
        std::cout << "wrote " << bn_prefix << ".csv, " << bn_prefix << "_summary.csv, "
                  << bn_prefix << ".svg\n";
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

inline int dispatch(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}

}  // namespace bplan::cli
