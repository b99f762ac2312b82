// Command line front end: run one mission, compare methods over seeds,
// reproduce the anchor-density and replay studies, or re-run a selective
// replay against a recorded log.

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "lidaus/export_data.hpp"
#include "lidaus/mission.hpp"
#include "lidaus/run_log.hpp"
#include "lidaus/scenario.hpp"

namespace fs = std::filesystem;
using lidaus::Beacon;
using lidaus::Method;
using lidaus::MissionConfig;
using lidaus::MissionReport;

namespace {

std::string out_root() {
    const char* env = std::getenv("LIDAUS_OUT_ROOT");
    return env ? env : "out";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// Writes everything a single run produces into its own directory.
void write_run_outputs(const MissionConfig& cfg, const MissionReport& report,
                       const std::string& dir) {
    fs::create_directories(dir);
    const std::string hash = lidaus::config_hash(cfg);
    write_text(dir + "/scenario.json", lidaus::serialize_scenario(cfg));
    lidaus::write_run_log(dir + "/run.log", report, hash);
    lidaus::write_report_json(dir + "/report.json", report, cfg.targets, hash);
    lidaus::export_plot_data(report, cfg.targets, dir);
}

int cmd_run(const std::string& config_path, std::uint64_t seed, bool seed_given,
            const std::string& method_name_in, std::string out_dir) {
    MissionConfig cfg = lidaus::parse_scenario(config_path);
    if (seed_given) cfg.seed = seed;
    const Method method = lidaus::method_from_name(method_name_in);
    if (out_dir.empty())
        out_dir = out_root() + "/" + cfg.name + "_" + method_name_in + "_seed" +
                  std::to_string(cfg.seed);

    const MissionReport report = lidaus::run_method(cfg, method);
    write_run_outputs(cfg, report, out_dir);

    const lidaus::MetricsTable metrics = lidaus::compute_metrics(report, cfg.targets);
    std::cout << "method=" << method_name_in << " seed=" << cfg.seed
              << " mean_error=" << fmt(metrics.mean_error)
              << " max_error=" << fmt(metrics.max_error) << " steps=" << metrics.total_steps
              << " anchors=" << metrics.total_anchors << " missing=" << metrics.missing_count
              << " termination=" << report.termination_reason << "\n";
    std::cout << "outputs: " << out_dir << "\n";
    return 0;
}

struct CompareJob {
    Method method;
    std::uint64_t seed;
    lidaus::MetricsTable metrics;
};

int cmd_compare(const std::string& config_path, int seeds, const std::string& methods_csv,
                int jobs, std::string out_dir) {
    const MissionConfig base = lidaus::parse_scenario(config_path);
    if (out_dir.empty()) out_dir = out_root() + "/" + base.name + "_compare";
    fs::create_directories(out_dir);

    std::vector<Method> methods;
    for (const std::string& m : split_csv(methods_csv))
        methods.push_back(lidaus::method_from_name(m));
    if (methods.empty()) throw lidaus::ConfigError("compare: no methods given");
    if (seeds < 1) throw lidaus::ConfigError("compare: --seeds must be >= 1");

    std::vector<CompareJob> table;
    for (Method m : methods)
        for (int s = 0; s < seeds; ++s)
            table.push_back({m, base.seed + static_cast<std::uint64_t>(s), {}});

    if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= table.size()) return;
            MissionConfig cfg = base;
            cfg.seed = table[i].seed;
            const MissionReport report = lidaus::run_method(cfg, table[i].method);
            const std::string dir = out_dir + "/" + lidaus::method_name(table[i].method) +
                                    "_seed" + std::to_string(cfg.seed);
            write_run_outputs(cfg, report, dir);
            table[i].metrics = lidaus::compute_metrics(report, cfg.targets);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Per-run rows.
    std::ostringstream per_run;
    per_run << "method,seed,mean_error,max_error,steps,anchors,missing";
    for (const Beacon& b : base.targets) per_run << "," << b.id;
    per_run << "\n";
    for (const CompareJob& job : table) {
        per_run << lidaus::method_name(job.method) << "," << job.seed << ","
                << fmt(job.metrics.mean_error) << "," << fmt(job.metrics.max_error) << ","
                << job.metrics.total_steps << "," << job.metrics.total_anchors << ","
                << job.metrics.missing_count;
        for (const auto& row : job.metrics.rows)
            per_run << "," << (row.has_estimate ? fmt(row.error) : "unfound");
        per_run << "\n";
    }
    write_text(out_dir + "/per_run.csv", per_run.str());

    // One row per method: per-beacon mean error over seeds, then the mean.
    std::ostringstream comparison;
    comparison << "method";
    for (const Beacon& b : base.targets) comparison << "," << b.id;
    comparison << ",mean_error\n";
    std::cout << "method      mean_error  max_error\n";
    for (Method m : methods) {
        comparison << lidaus::method_name(m);
        double method_mean = 0.0, method_max = 0.0;
        int method_runs = 0;
        for (std::size_t bi = 0; bi < base.targets.size(); ++bi) {
            double sum = 0.0;
            int n = 0;
            for (const CompareJob& job : table) {
                if (job.method != m) continue;
                const auto& row = job.metrics.rows[bi];
                if (row.has_estimate) {
                    sum += row.error;
                    ++n;
                }
            }
            comparison << "," << (n > 0 ? fmt(sum / n) : "unfound");
        }
        for (const CompareJob& job : table) {
            if (job.method != m) continue;
            method_mean += job.metrics.mean_error;
            method_max = std::max(method_max, job.metrics.max_error);
            ++method_runs;
        }
        method_mean /= std::max(method_runs, 1);
        comparison << "," << fmt(method_mean) << "\n";
        std::printf("%-11s %-11s %s\n", lidaus::method_name(m).c_str(),
                    fmt(method_mean).c_str(), fmt(method_max).c_str());
    }
    write_text(out_dir + "/comparison.csv", comparison.str());
    std::cout << "outputs: " << out_dir << "\n";
    return 0;
}

int cmd_ablate_anchors(const std::string& config_path, const std::string& noise_csv,
                       const std::string& spacing_csv, int seeds, std::string out_dir) {
    const MissionConfig base = lidaus::parse_scenario(config_path);
    if (out_dir.empty()) out_dir = out_root() + "/" + base.name + "_ablate_anchors";
    fs::create_directories(out_dir);

    std::ostringstream rows, summary;
    rows << "noise,spacing,seed,mean_error,anchors,steps\n";
    summary << "noise,spacing,mean_error\n";
    std::cout << "noise  spacing  mean_error\n";
    for (const std::string& noise_s : split_csv(noise_csv)) {
        const double noise = std::stod(noise_s);
        for (const std::string& spacing_s : split_csv(spacing_csv)) {
            const double spacing = spacing_s == "none" ? 0.0 : std::stod(spacing_s);
            double sum = 0.0;
            for (int s = 0; s < seeds; ++s) {
                MissionConfig cfg = base;
                cfg.seed = base.seed + static_cast<std::uint64_t>(s);
                const lidaus::SweepResult r = lidaus::run_anchor_sweep(cfg, spacing, noise);
                rows << noise_s << "," << spacing_s << "," << cfg.seed << ","
                     << fmt(r.mean_error) << "," << r.anchors << "," << r.steps << "\n";
                sum += r.mean_error;
            }
            const double mean = sum / std::max(seeds, 1);
            summary << noise_s << "," << spacing_s << "," << fmt(mean) << "\n";
            std::printf("%-6s %-8s %s\n", noise_s.c_str(), spacing_s.c_str(), fmt(mean).c_str());
        }
    }
    write_text(out_dir + "/ablation_runs.csv", rows.str());
    write_text(out_dir + "/ablation_summary.csv", summary.str());
    std::cout << "outputs: " << out_dir << "\n";
    return 0;
}

int cmd_ablate_replay(const std::string& config_path, int seeds, std::string out_dir) {
    MissionConfig base = lidaus::parse_scenario(config_path);
    base.max_stages = 0;  // single pass, then cluster + replay
    if (out_dir.empty()) out_dir = out_root() + "/" + base.name + "_ablate_replay";
    fs::create_directories(out_dir);

    std::ostringstream rows;
    rows << "seed,beacon,live_error,replay_error,improvement\n";
    int improved = 0, total = 0;
    double improvement_sum = 0.0;
    for (int s = 0; s < seeds; ++s) {
        MissionConfig cfg = base;
        cfg.seed = base.seed + static_cast<std::uint64_t>(s);
        const MissionReport report = lidaus::run_mission(cfg);
        for (const Beacon& b : cfg.targets) {
            const auto& outcome = report.outcomes.at(b.id);
            if (!outcome.has_estimate) continue;
            const double live = lidaus::distance(outcome.live_estimate, b.true_position);
            const double rep = lidaus::distance(outcome.estimate, b.true_position);
            const double gain = live > 0.0 ? (live - rep) / live : 0.0;
            rows << cfg.seed << "," << b.id << "," << fmt(live) << "," << fmt(rep) << ","
                 << fmt(gain) << "\n";
            ++total;
            if (rep < live) {
                ++improved;
                improvement_sum += gain;
            }
        }
    }
    write_text(out_dir + "/replay_runs.csv", rows.str());

    const double frac = total > 0 ? static_cast<double>(improved) / total : 0.0;
    const double mean_gain = improved > 0 ? improvement_sum / improved : 0.0;
    std::ostringstream summary;
    summary << "improved_fraction,mean_improvement_among_improved\n"
            << fmt(frac) << "," << fmt(mean_gain) << "\n";
    write_text(out_dir + "/replay_summary.csv", summary.str());
    std::cout << "improved " << improved << "/" << total << " (" << fmt(frac * 100.0)
              << "%), mean improvement among improved " << fmt(mean_gain * 100.0) << "%\n";
    std::cout << "outputs: " << out_dir << "\n";
    return 0;
}

int cmd_replay(const std::string& log_path, const std::string& beacon_id,
               const std::string& points_csv, const std::string& points_file,
               const std::string& out_file) {
    const lidaus::RunLog log = lidaus::read_run_log(log_path);

    std::set<int> steps;
    if (!points_csv.empty())
        for (const std::string& p : split_csv(points_csv)) steps.insert(std::stoi(p));
    if (!points_file.empty()) {
        std::ifstream in(points_file);
        if (!in) throw std::runtime_error("cannot open points file: " + points_file);
        int v;
        while (in >> v) steps.insert(v);
    }
    if (steps.empty()) throw lidaus::ConfigError("replay: no points given");

    // Prior: mean and spread of the selected observation poses.
    lidaus::Vec3 mean;
    int n = 0;
    for (const auto& r : log.records)
        if (steps.count(r.step_index)) {
            mean = mean + r.pose_estimate_at_record;
            ++n;
        }
    if (n == 0) throw lidaus::ConfigError("replay: none of the points appear in the log");
    mean = mean * (1.0 / n);
    lidaus::Vec3 spread;
    for (const auto& r : log.records)
        if (steps.count(r.step_index)) {
            const lidaus::Vec3 d = r.pose_estimate_at_record - mean;
            spread.x += d.x * d.x / n;
            spread.y += d.y * d.y / n;
            spread.z += d.z * d.z / n;
        }
    lidaus::BeaconEstimate init;
    init.mu = Eigen::Vector3d(mean.x, mean.y, mean.z);
    init.sigma = Eigen::Vector3d(std::max(spread.x, 1.0), std::max(spread.y, 1.0),
                                 std::max(spread.z, 1.0))
                     .asDiagonal();

    lidaus::PathLossParams params;  // defaults match the shipped scenarios
    const lidaus::ReplayResult result =
        lidaus::replay(log.records, beacon_id, steps, init, params, 0.1);

    nlohmann::ordered_json j;
    j["beacon"] = beacon_id;
    j["points"] = std::vector<int>(steps.begin(), steps.end());
    j["updates_applied"] = result.updates_applied;
    j["estimate"] = {result.estimate.mu.x(), result.estimate.mu.y(), result.estimate.mu.z()};
    const std::string text = j.dump(2) + "\n";
    if (!out_file.empty()) write_text(out_file, text);
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RSSI-only beacon localization simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, method = "lidaus";
    std::uint64_t seed = 0;
    int seeds = 5, jobs = 0;
    std::string methods_csv = "lidaus,random,naive";
    std::string noise_csv = "3,5,8", spacing_csv = "1,4,none";
    std::string log_path, beacon_id, points_csv, points_file, out_file;

    auto* run = app.add_subcommand("run", "Run one mission");
    run->add_option("--config", config_path, "Scenario file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Seed override");
    run->add_option("--method", method, "lidaus|random|naive");
    run->add_option("--out", out_dir, "Output directory");

    auto* compare = app.add_subcommand("compare", "Compare methods over seeds");
    compare->add_option("--config", config_path, "Scenario file")->required();
    compare->add_option("--seeds", seeds, "Number of consecutive seeds")->required();
    compare->add_option("--methods", methods_csv, "Comma-separated methods");
    compare->add_option("--jobs", jobs, "Parallel runs (default: hardware)");
    compare->add_option("--out", out_dir, "Output directory");

    auto* ablate = app.add_subcommand("ablate", "Parameter studies");
    ablate->require_subcommand(1);
    auto* anchors = ablate->add_subcommand("anchors", "Anchor density study");
    anchors->add_option("--config", config_path, "Scenario file")->required();
    anchors->add_option("--noise", noise_csv, "rssi std values, comma-separated");
    anchors->add_option("--spacing", spacing_csv, "anchor spacings; 'none' disables");
    anchors->add_option("--seeds", seeds, "Seeds per cell")->default_val(10);
    anchors->add_option("--out", out_dir, "Output directory");
    auto* replay_study = ablate->add_subcommand("replay", "Selective replay study");
    replay_study->add_option("--config", config_path, "Scenario file")->required();
    replay_study->add_option("--seeds", seeds, "Number of seeds")->default_val(20);
    replay_study->add_option("--out", out_dir, "Output directory");

    auto* replay_cmd = app.add_subcommand("replay", "Selective replay from a run log");
    replay_cmd->add_option("--log", log_path, "run.log path")->required();
    replay_cmd->add_option("--beacon", beacon_id, "Beacon id")->required();
    replay_cmd->add_option("--points", points_csv, "Comma-separated step indices");
    replay_cmd->add_option("--points-file", points_file, "File with one step index per line");
    replay_cmd->add_option("--out", out_file, "Write the estimate here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, seed, seed_opt->count() > 0, method, out_dir);
        if (compare->parsed()) return cmd_compare(config_path, seeds, methods_csv, jobs, out_dir);
        if (anchors->parsed())
            return cmd_ablate_anchors(config_path, noise_csv, spacing_csv, seeds, out_dir);
        if (replay_study->parsed()) return cmd_ablate_replay(config_path, seeds, out_dir);
        if (replay_cmd->parsed())
            return cmd_replay(log_path, beacon_id, points_csv, points_file, out_file);
    } catch (const lidaus::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
