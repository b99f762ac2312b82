#include "lidaus/export_data.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace lidaus {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::ofstream out(dir + "/" + name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
    return out;
}

}  // namespace

std::vector<double> boxplot_quantiles(std::vector<double> values) {
    if (values.empty()) return {0, 0, 0, 0, 0};
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

std::string render_report_json(const MissionReport& report, const std::vector<Beacon>& truth,
                               const std::string& config_hash) {
    using ordered_json = nlohmann::ordered_json;
    ordered_json j;
    j["method"] = method_name(report.method);
    j["seed"] = report.seed;
    j["config_hash"] = config_hash;
    j["termination"] = report.termination_reason;
    j["total_steps"] = report.total_steps;
    j["total_anchors"] = report.anchors.size();

    j["stages"] = ordered_json::array();
    for (const StageResult& s : report.stages) {
        ordered_json sj;
        sj["index"] = s.stage_index;
        sj["kind"] = s.kind;
        sj["steps"] = s.steps;
        sj["last_step"] = s.last_step;
        sj["path_length"] = s.path_length;
        sj["newly_found"] = s.newly_found;
        sj["anchors_deployed"] = s.anchors_deployed;
        sj["clusters"] = ordered_json::object();
        for (const auto& [id, c] : s.clusters) {
            ordered_json cj;
            cj["error"] = c.error;
            cj["points"] = c.point_steps;
            cj["entropy"] = c.entropy;
            cj["center"] = {c.center.x, c.center.y, c.center.z};
            cj["iterations"] = c.iterations;
            sj["clusters"][id] = cj;
        }
        sj["estimates"] = ordered_json::object();
        for (const auto& [id, e] : s.estimates) sj["estimates"][id] = {e.x, e.y, e.z};
        sj["live_estimates"] = ordered_json::object();
        for (const auto& [id, e] : s.live_estimates) sj["live_estimates"][id] = {e.x, e.y, e.z};
        j["stages"].push_back(sj);
    }

    j["outcomes"] = ordered_json::object();
    for (const auto& [id, o] : report.outcomes) {
        ordered_json oj;
        oj["has_estimate"] = o.has_estimate;
        if (o.has_estimate) {
            oj["estimate"] = {o.estimate.x, o.estimate.y, o.estimate.z};
            oj["live_estimate"] = {o.live_estimate.x, o.live_estimate.y, o.live_estimate.z};
        }
        oj["found"] = o.found;
        oj["found_stage"] = o.found_stage;
        j["outcomes"][id] = oj;
    }

    const MetricsTable metrics = compute_metrics(report, truth);
    j["metrics"]["mean_error"] = metrics.mean_error;
    j["metrics"]["max_error"] = metrics.max_error;
    j["metrics"]["estimated"] = metrics.estimated_count;
    j["metrics"]["missing"] = metrics.missing_count;
    j["metrics"]["per_beacon"] = ordered_json::object();
    for (const BeaconMetric& row : metrics.rows) {
        ordered_json rj;
        rj["estimated"] = row.has_estimate;
        rj["found"] = row.found;
        if (row.has_estimate) {
            rj["error"] = row.error;
            rj["err_xyz"] = {row.ex, row.ey, row.ez};
        }
        j["metrics"]["per_beacon"][row.id] = rj;
    }
    return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const MissionReport& report,
                       const std::vector<Beacon>& truth, const std::string& config_hash) {
    const std::string text = render_report_json(report, truth, config_hash);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << text;
}

void export_plot_data(const MissionReport& report, const std::vector<Beacon>& truth,
                      const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const MetricsTable metrics = compute_metrics(report, truth);

    {
        auto out = open_out(out_dir, "errors.csv");
        out << "beacon,found,estimated,error,err_x,err_y,err_z\n";
        for (const BeaconMetric& row : metrics.rows) {
            if (row.has_estimate)
                out << row.id << "," << (row.found ? 1 : 0) << ",1," << fmt(row.error) << ","
                    << fmt(row.ex) << "," << fmt(row.ey) << "," << fmt(row.ez) << "\n";
            else
                out << row.id << ",0,0,unfound,,,\n";
        }
    }

    {
        auto out = open_out(out_dir, "boxplot.csv");
        out << "method,min,q1,median,q3,max,mean\n";
        std::vector<double> errors;
        for (const BeaconMetric& row : metrics.rows)
            if (row.has_estimate) errors.push_back(row.error);
        const std::vector<double> q = boxplot_quantiles(errors);
        out << method_name(report.method) << "," << fmt(q[0]) << "," << fmt(q[1]) << ","
            << fmt(q[2]) << "," << fmt(q[3]) << "," << fmt(q[4]) << ","
            << fmt(metrics.mean_error) << "\n";
    }

    {
        // One row per observation: the true pose and the filter's estimate.
        auto out = open_out(out_dir, "trajectory.csv");
        for (std::size_t i = 0; i < report.log.size(); ++i) {
            const Vec3& t = report.true_trajectory[i];
            const Vec3& e = report.log[i].pose_estimate_at_record;
            out << report.log[i].step_index << "," << fmt(t.x) << "," << fmt(t.y) << ","
                << fmt(t.z) << "," << fmt(e.x) << "," << fmt(e.y) << "," << fmt(e.z) << "\n";
        }
    }

    {
        auto out = open_out(out_dir, "steiner.csv");
        out << "stage,element,x,y\n";
        for (const StageResult& s : report.stages) {
            if (s.kind != "searching") continue;
            for (const Vec3& p : s.steiner_node_positions)
                out << s.stage_index << ",tree," << fmt(p.x) << "," << fmt(p.y) << "\n";
            for (const Vec3& p : s.branch_positions)
                out << s.stage_index << ",branch," << fmt(p.x) << "," << fmt(p.y) << "\n";
        }
    }

    {
        auto out = open_out(out_dir, "anchors.csv");
        out << "id,step,planned_x,planned_y,planned_z,true_x,true_y,true_z\n";
        for (const AnchorInfo& a : report.anchors)
            out << a.id << "," << a.step << "," << fmt(a.planned_position.x) << ","
                << fmt(a.planned_position.y) << "," << fmt(a.planned_position.z) << ","
                << fmt(a.true_position.x) << "," << fmt(a.true_position.y) << ","
                << fmt(a.true_position.z) << "\n";
    }
}

}  // namespace lidaus
