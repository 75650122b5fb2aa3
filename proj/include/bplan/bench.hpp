#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/io.hpp"
#include "bplan/labeling.hpp"
#include "bplan/neuralnet.hpp"
#include "bplan/occupancy.hpp"
#include "bplan/planner.hpp"
#include "bplan/query_gen.hpp"
#include "bplan/rng.hpp"
#include "bplan/scene.hpp"

namespace bplan::bench {

enum class PlannerMode { Baseline, BottleneckOracle, BottleneckLearned };

inline const char* mode_name(PlannerMode m) {
    switch (m) {
        case PlannerMode::Baseline: return "baseline";
        case PlannerMode::BottleneckOracle: return "bottleneck_oracle";
        case PlannerMode::BottleneckLearned: return "bottleneck_learned";
    }
    return "?";
}

inline PlannerMode parse_mode(const std::string& s) {
    if (s == "baseline") return PlannerMode::Baseline;
    if (s == "bottleneck_oracle") return PlannerMode::BottleneckOracle;
    if (s == "bottleneck_learned") return PlannerMode::BottleneckLearned;
    throw Error("unknown planner mode: " + s);
}

struct TrialRecord {
    scene::Family family = scene::Family::Elongated;
    uint64_t scene_seed = 0;
    PlannerMode planner = PlannerMode::Baseline;
    uint64_t run_seed = 0;
    int tree_size = 0;
    double planning_time = 0;  // seconds
    bool success = false;
};

struct BenchConfig {
    std::vector<scene::Family> families{scene::Family::Elongated, scene::Family::NarrowCircular,
                                        scene::Family::Cluttered};
    std::vector<PlannerMode> modes{PlannerMode::Baseline, PlannerMode::BottleneckOracle};
    int n_cycles = 20;
    planner::PlannerConfig planner;  // per-run seeds are derived from `seed`
    double leaf_resolution = occupancy::kDefaultLeafResolution;
    uint64_t seed = 7;
    bool fixed_scene = false;  // reuse the cycle-0 scene within each family
    int jobs = 1;
};

/// Runs families x cycles x modes. Each cycle gets a fresh scene + map +
/// query; bottleneck_oracle uses labels from a baseline solve with an
/// independent seed, bottleneck_learned queries the network. Records come
/// back ordered (family, cycle, mode) regardless of worker scheduling.
inline std::vector<TrialRecord> run_benchmark(const BenchConfig& cfg,
                                              const nn::NetworkParams* params = nullptr) {
    if (cfg.n_cycles < 1) throw Error("run_benchmark: n_cycles must be >= 1");
    bool needs_oracle = false, needs_learned = false;
    for (PlannerMode m : cfg.modes) {
        needs_oracle |= m == PlannerMode::BottleneckOracle;
        needs_learned |= m == PlannerMode::BottleneckLearned;
    }
    if (needs_learned && !params)
        throw Error("run_benchmark: bottleneck_learned requires network weights");

    const size_t n_modes = cfg.modes.size();
    const size_t n_tasks = cfg.families.size() * static_cast<size_t>(cfg.n_cycles);
    std::vector<TrialRecord> records(n_tasks * n_modes);

    auto run_task = [&](size_t task) {
        size_t fi = task / cfg.n_cycles;
        int cycle = static_cast<int>(task % cfg.n_cycles);
        scene::Family family = cfg.families[fi];
        // a degenerate scene (no admissible query) is regenerated with a
        // fresh seed rather than aborting the whole benchmark
        uint64_t scene_seed = 0;
        std::optional<scene::Scene> sc;
        std::optional<occupancy::OccupancyOctree> map;
        scene::PlanningQuery query;
        for (uint64_t attempt = 0;; ++attempt) {
            if (attempt >= 5) throw GenerationExhaustedError("benchmark scene generation failed");
            scene_seed = derive_seed(cfg.seed, fi, cfg.fixed_scene ? 0 : cycle, 1 + 100 * attempt);
            sc = scene::make_scene(family, scene_seed);
            map = occupancy::voxelize_scene(*sc, cfg.leaf_resolution);
            try {
                query = scene::sample_query(*sc, *map, derive_seed(cfg.seed, fi, cycle, 2),
                                            cfg.planner.ee_radius);
                break;
            } catch (const GenerationExhaustedError&) {
                continue;
            }
        }

        std::vector<Point3> oracle_points;
        if (needs_oracle) {
            planner::PlannerConfig base = cfg.planner;
            base.p_goal = 0.1;
            base.p_bottleneck = 0.0;
            base.seed = derive_seed(cfg.seed, fi, cycle, 3);
            auto sol = planner::plan(*map, query, {}, base);
            if (sol.success) {
                auto labels = labeling::select_bottleneck_labels(sol.path, *map);
                oracle_points.assign(labels.begin(), labels.end());
            }
        }
        std::vector<Point3> learned_points;
        if (needs_learned) {
            auto pts = nn::predict_bottlenecks(*params, *map, query, sc->bounds);
            learned_points.assign(pts.begin(), pts.end());
        }

        for (size_t mi = 0; mi < n_modes; ++mi) {
            PlannerMode mode = cfg.modes[mi];
            planner::PlannerConfig run = cfg.planner;
            run.seed = derive_seed(cfg.seed, fi, cycle, 16 + mi);
            const std::vector<Point3>* targets = nullptr;
            if (mode == PlannerMode::Baseline) {
                run.p_goal = 0.1;
                run.p_bottleneck = 0.0;
            } else {
                run.p_goal = 0.2;
                run.p_bottleneck = 0.4;
                targets = mode == PlannerMode::BottleneckOracle ? &oracle_points : &learned_points;
            }
            static const std::vector<Point3> kNone;
            auto res = planner::plan(*map, query, targets ? *targets : kNone, run);
            TrialRecord rec;
            rec.family = family;
            rec.scene_seed = scene_seed;
            rec.planner = mode;
            rec.run_seed = run.seed;
            rec.tree_size = res.tree_size;
            rec.planning_time = res.wall_time;
            rec.success = res.success;
            records[task * n_modes + mi] = rec;
        }
    };

    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (size_t t = 0; t < n_tasks; ++t) run_task(t);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int j = 0; j < jobs; ++j)
            workers.emplace_back([&] {
                for (size_t t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) run_task(t);
            });
        for (auto& w : workers) w.join();
    }
    return records;
}

// --- Aggregation -----------------------------------------------------------------

struct Stats {
    double mean = 0, median = 0, stddev = 0;
};

inline Stats compute_stats(std::vector<double> v) {
    Stats s;
    if (v.empty()) return s;
    double n = static_cast<double>(v.size());
    for (double x : v) s.mean += x;
    s.mean /= n;
    for (double x : v) s.stddev += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(s.stddev / n);
    std::sort(v.begin(), v.end());
    size_t mid = v.size() / 2;
    s.median = (v.size() % 2) ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    return s;
}

struct GroupSummary {
    scene::Family family;
    PlannerMode planner;
    int n = 0;  // successful runs
    Stats tree_size;
    Stats time;
};

struct Improvement {
    scene::Family family;
    PlannerMode planner;  // the bottleneck mode compared against baseline
    double tree_mean_pct = 0;
    double time_mean_pct = 0;
    double tree_median_pct = 0;
    double time_median_pct = 0;
};

struct Summary {
    std::vector<GroupSummary> groups;
    std::vector<Improvement> improvements;

    const GroupSummary* find(scene::Family f, PlannerMode m) const {
        for (const auto& g : groups)
            if (g.family == f && g.planner == m) return &g;
        return nullptr;
    }
};

inline double improvement_pct(double base, double now) {
    return base != 0.0 ? 100.0 * (base - now) / base : 0.0;
}

/// Per (family, planner) stats over successful runs, plus improvement
/// percentages of each bottleneck mode against the baseline.
inline Summary summarize(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw EmptyInputError("summarize: no records");
    Summary out;
    std::vector<std::pair<scene::Family, PlannerMode>> keys;
    for (const auto& r : records) {
        std::pair<scene::Family, PlannerMode> key{r.family, r.planner};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (auto [family, mode] : keys) {
        std::vector<double> trees, times;
        for (const auto& r : records) {
            if (r.family != family || r.planner != mode || !r.success) continue;
            trees.push_back(r.tree_size);
            times.push_back(r.planning_time);
        }
        GroupSummary g;
        g.family = family;
        g.planner = mode;
        g.n = static_cast<int>(trees.size());
        g.tree_size = compute_stats(trees);
        g.time = compute_stats(times);
        out.groups.push_back(g);
    }
    for (const auto& g : out.groups) {
        if (g.planner == PlannerMode::Baseline) continue;
        const GroupSummary* base = out.find(g.family, PlannerMode::Baseline);
        if (!base || base->n == 0 || g.n == 0) continue;
        Improvement imp;
        imp.family = g.family;
        imp.planner = g.planner;
        imp.tree_mean_pct = improvement_pct(base->tree_size.mean, g.tree_size.mean);
        imp.time_mean_pct = improvement_pct(base->time.mean, g.time.mean);
        imp.tree_median_pct = improvement_pct(base->tree_size.median, g.tree_size.median);
        imp.time_median_pct = improvement_pct(base->time.median, g.time.median);
        out.improvements.push_back(imp);
    }
    return out;
}

// --- CSV -------------------------------------------------------------------------

inline std::string emit_records_csv(const std::vector<TrialRecord>& records) {
    std::string out = "family,scene_seed,planner,run_seed,tree_size,planning_time_s,success\n";
    for (const auto& r : records) {
        out += scene::family_name(r.family);
        out += ',' + std::to_string(r.scene_seed) + ',';
        out += mode_name(r.planner);
        out += ',' + std::to_string(r.run_seed) + ',' + std::to_string(r.tree_size) + ',';
        out += io::fmt_exact(r.planning_time);
        out += ',' + std::to_string(r.success ? 1 : 0) + '\n';
    }
    return out;
}

inline std::vector<TrialRecord> parse_records_csv(const std::string& text) {
    std::vector<TrialRecord> records;
    size_t pos = text.find('\n');
    if (pos == std::string::npos) throw CorruptFileError("records csv: missing header");
    while (pos + 1 < text.size()) {
        size_t eol = text.find('\n', pos + 1);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos + 1, eol - pos - 1);
        pos = eol;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t start = 0;
        for (;;) {
            size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 7) throw CorruptFileError("records csv: bad row");
        TrialRecord r;
        r.family = scene::parse_family(fields[0]);
        r.scene_seed = std::stoull(fields[1]);
        r.planner = parse_mode(fields[2]);
        r.run_seed = std::stoull(fields[3]);
        r.tree_size = std::stoi(fields[4]);
        r.planning_time = std::stod(fields[5]);
        r.success = fields[6] == "1";
        records.push_back(r);
    }
    return records;
}

inline std::string emit_summary_csv(const Summary& s) {
    std::string out =
        "family,planner,n,tree_mean,tree_median,tree_std,time_mean_s,time_median_s,time_std_s,"
        "tree_improvement_pct,time_improvement_pct\n";
    for (const auto& g : s.groups) {
        out += scene::family_name(g.family);
        out += ',';
        out += mode_name(g.planner);
        out += ',' + std::to_string(g.n);
        for (double v : {g.tree_size.mean, g.tree_size.median, g.tree_size.stddev, g.time.mean,
                         g.time.median, g.time.stddev})
            out += ',' + io::fmt_real(v);
        const Improvement* imp = nullptr;
        for (const auto& i : s.improvements)
            if (i.family == g.family && i.planner == g.planner) imp = &i;
        if (imp) {
            out += ',' + io::fmt_real(imp->tree_mean_pct) + ',' + io::fmt_real(imp->time_mean_pct);
        } else {
            out += ",,";
        }
        out += '\n';
    }
    return out;
}

// --- SVG bar chart -----------------------------------------------------------------

namespace detail {

inline void svg_bar_panel(std::string& out, const Summary& s, bool tree_metric, double y0,
                          const std::vector<scene::Family>& families,
                          const std::vector<PlannerMode>& modes) {
    const double panel_w = 760, panel_h = 220, x0 = 90;
    double max_v = 1e-12;
    for (const auto& g : s.groups) {
        double v = tree_metric ? g.tree_size.mean : g.time.mean;
        max_v = std::max(max_v, v);
    }
    static const char* colors[] = {"#4878cf", "#e8a33d", "#6acc65"};
    out += "<text x=\"" + io::fmt_real(x0) + "\" y=\"" + io::fmt_real(y0 - 8) +
           "\" font-size=\"14\" font-family=\"sans-serif\">" +
           (tree_metric ? std::string("Tree size (mean)") : std::string("Planning time, s (mean)")) +
           "</text>\n";
    out += "<line x1=\"" + io::fmt_real(x0) + "\" y1=\"" + io::fmt_real(y0 + panel_h) + "\" x2=\"" +
           io::fmt_real(x0 + panel_w) + "\" y2=\"" + io::fmt_real(y0 + panel_h) +
           "\" stroke=\"#444\"/>\n";
    double group_w = panel_w / families.size();
    for (size_t fi = 0; fi < families.size(); ++fi) {
        double bar_w = std::min(40.0, group_w / (modes.size() + 1.0));
        for (size_t mi = 0; mi < modes.size(); ++mi) {
            const GroupSummary* g = s.find(families[fi], modes[mi]);
            if (!g) continue;
            double v = tree_metric ? g->tree_size.mean : g->time.mean;
            double h = panel_h * v / max_v;
            double x = x0 + fi * group_w + 20 + mi * (bar_w + 6);
            out += "<rect x=\"" + io::fmt_real(x) + "\" y=\"" + io::fmt_real(y0 + panel_h - h) +
                   "\" width=\"" + io::fmt_real(bar_w) + "\" height=\"" + io::fmt_real(h) +
                   "\" fill=\"" + colors[mi % 3] + "\"/>\n";
            out += "<text x=\"" + io::fmt_real(x) + "\" y=\"" +
                   io::fmt_real(y0 + panel_h - h - 4) +
                   "\" font-size=\"10\" font-family=\"sans-serif\">" + io::fmt_real(v, 3) +
                   "</text>\n";
        }
        out += "<text x=\"" + io::fmt_real(x0 + fi * group_w + 20) + "\" y=\"" +
               io::fmt_real(y0 + panel_h + 16) +
               "\" font-size=\"12\" font-family=\"sans-serif\">" +
               scene::family_name(families[fi]) + "</text>\n";
    }
}

}  // namespace detail

/// Static grouped bar chart: one group per family, one bar per planner, both
/// benchmark metrics.
inline std::string emit_svg_bars(const Summary& s) {
    std::vector<scene::Family> families;
    std::vector<PlannerMode> modes;
    for (const auto& g : s.groups) {
        if (std::find(families.begin(), families.end(), g.family) == families.end())
            families.push_back(g.family);
        if (std::find(modes.begin(), modes.end(), g.planner) == modes.end())
            modes.push_back(g.planner);
    }
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"620\" "
        "viewBox=\"0 0 900 620\">\n<rect width=\"900\" height=\"620\" fill=\"white\"/>\n";
    static const char* colors[] = {"#4878cf", "#e8a33d", "#6acc65"};
    for (size_t mi = 0; mi < modes.size(); ++mi) {
        double y = 20 + 18.0 * mi;
        out += "<rect x=\"770\" y=\"" + io::fmt_real(y) + "\" width=\"12\" height=\"12\" fill=\"" +
               colors[mi % 3] + "\"/>\n";
        out += "<text x=\"788\" y=\"" + io::fmt_real(y + 10) +
               "\" font-size=\"11\" font-family=\"sans-serif\">" + mode_name(modes[mi]) +
               "</text>\n";
    }
    detail::svg_bar_panel(out, s, true, 50, families, modes);
    detail::svg_bar_panel(out, s, false, 340, families, modes);
    out += "</svg>\n";
    return out;
}

}  // namespace bplan::bench
