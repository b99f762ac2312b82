#include "lidaus/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace lidaus {

void ClusteringParams::validate() const {
    if (!(w_core >= w_adjacent && w_adjacent >= w_other && w_other > 0.0))
        throw std::invalid_argument("clustering: weights must satisfy core >= adjacent >= other > 0");
    if (!(s_th > 0.0 && s_th < 1.0))
        throw std::invalid_argument("clustering: s_th must lie in (0, 1)");
}

ObservationPoint make_observation_point(const MultiLayerGridGraph& g, int step_index,
                                        const Vec3& raw_position,
                                        const std::map<std::string, double>& medians) {
    ObservationPoint point;
    point.step_index = step_index;
    point.host_edge = g.nearest_edge(raw_position);
    const GridEdge& e = g.edges()[static_cast<std::size_t>(point.host_edge)];
    const Vec3 a = g.node_position(e.u);
    const Vec3 b = g.node_position(e.v);
    const Vec3 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y + ab.z * ab.z;
    double t = 0.0;
    if (len2 > 0.0) {
        const Vec3 ap = raw_position - a;
        t = std::max(0.0, std::min(1.0, (ap.x * ab.x + ap.y * ab.y + ap.z * ab.z) / len2));
    }
    point.position = a + ab * t;
    point.rssi_medians = medians;
    return point;
}

std::vector<double> classify_edges(const MultiLayerGridGraph& g, const CubeId& cube,
                                   const ClusteringParams& params) {
    const std::vector<int> corner_list = g.cube_corner_nodes(cube);
    const std::set<int> corners(corner_list.begin(), corner_list.end());

    std::vector<double> weights(static_cast<std::size_t>(g.total_edge_count()), params.w_other);
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const GridEdge& e = g.edges()[i];
        const bool u_in = corners.count(e.u) > 0;
        const bool v_in = corners.count(e.v) > 0;
        if (u_in && v_in)
            weights[i] = params.w_core;
        else if (u_in || v_in)
            weights[i] = params.w_adjacent;
    }
    return weights;
}

double weighted_entropy(const std::map<int, int>& edge_counts,
                        const std::vector<double>& edge_weights, int total_graph_edges,
                        double w_core) {
    if (total_graph_edges < 2)
        throw std::invalid_argument("weighted_entropy: graph must have at least 2 edges");
    int total = 0;
    for (const auto& [edge, count] : edge_counts) total += count;
    if (total < 1) throw std::invalid_argument("weighted_entropy: empty cluster");

    double s = 0.0;
    for (const auto& [edge, count] : edge_counts) {
        if (count == 0) continue;
        const double frac = static_cast<double>(count) / static_cast<double>(total);
        const double w = edge_weights[static_cast<std::size_t>(edge)];
        s += -w * frac * std::log(frac);
    }
    s /= std::log(static_cast<double>(total_graph_edges));
    return s / w_core;
}

namespace {

struct CandidateSummary {
    // Points carrying an rssi for the beacon, by index into `points`.
    std::vector<std::size_t> indices;
    double min_rssi = std::numeric_limits<double>::infinity();
    double max_point_peak = -std::numeric_limits<double>::infinity();
};

CandidateSummary summarize(const std::vector<ObservationPoint>& points,
                           const std::string& beacon_id) {
    CandidateSummary out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto it = points[i].rssi_medians.find(beacon_id);
        if (it == points[i].rssi_medians.end()) continue;
        out.indices.push_back(i);
        out.min_rssi = std::min(out.min_rssi, it->second);
        for (const auto& [id, rssi] : points[i].rssi_medians)
            out.max_point_peak = std::max(out.max_point_peak, rssi);
    }
    return out;
}

}  // namespace

Cluster cluster_for_beacon(const std::vector<ObservationPoint>& points,
                           const std::string& beacon_id, const ClusteringParams& params,
                           const MultiLayerGridGraph& g) {
    params.validate();

    Cluster cluster;
    cluster.beacon_id = beacon_id;

    const CandidateSummary cand = summarize(points, beacon_id);
    if (cand.indices.empty()) {
        cluster.error = true;
        return cluster;
    }

    // Threshold adjustment bounds: once the admission floor sits below every
    // observed rssi and the difference level covers the full spread, every
    // candidate is admitted and the loop must have exited.
    const double floor_th = cand.min_rssi - 1.0;
    const double cap_dl = std::max(0.0, cand.max_point_peak - cand.min_rssi);

    double r_th_c = params.r_th_c_init;
    double r_dl = params.r_dl_init;
    double s_prev = 0.0;
    double s_cur = 0.0;
    bool first = true;
    std::vector<std::size_t> members;

    for (int iter = 0; iter < 100000; ++iter) {
        cluster.iterations = iter + 1;
        if (!first) {
            const bool want_decrement = s_cur <= s_prev;
            if (want_decrement) {
                if (r_th_c > floor_th)
                    r_th_c -= 1.0;
                else if (r_dl < cap_dl)
                    r_dl += 1.0;
                else
                    break;
            } else {
                if (r_dl < cap_dl)
                    r_dl += 1.0;
                else if (r_th_c > floor_th)
                    r_th_c -= 1.0;
                else
                    break;
            }
        }
        s_prev = first ? 0.0 : s_cur;

        // Rebuild the cluster from scratch under the current thresholds: a
        // point belongs to the beacon when the beacon's median is the point's
        // maximum or within r_dl of it, and clears the admission floor.
        members.clear();
        cluster.edge_counts.clear();
        Vec3 center_sum;
        for (std::size_t idx : cand.indices) {
            const ObservationPoint& p = points[idx];
            const double own = p.rssi_medians.at(beacon_id);
            double peak = -std::numeric_limits<double>::infinity();
            for (const auto& [id, rssi] : p.rssi_medians) peak = std::max(peak, rssi);
            if (own != peak && std::abs(own - peak) > r_dl) continue;
            if (own < r_th_c) continue;
            members.push_back(idx);
            center_sum = center_sum + p.position;
            ++cluster.edge_counts[p.host_edge];
        }

        if (members.empty()) {
            s_cur = 0.0;
        } else {
            cluster.center = center_sum * (1.0 / static_cast<double>(members.size()));
            const Vec3 c = cluster.center;
            cluster.center_clamped = c.x < 0.0 || c.x > g.spec().width || c.y < 0.0 ||
                                     c.y > g.spec().depth || c.z < 0.0 || c.z > g.spec().height;
            const CubeId cube = g.cube_of_point(cluster.center);
            const std::vector<double> weights = classify_edges(g, cube, params);
            s_cur = weighted_entropy(cluster.edge_counts, weights, g.total_edge_count(),
                                     params.w_core);
        }
        first = false;

        if (s_cur >= params.s_th) break;
        if (members.size() == cand.indices.size()) break;
    }

    if (members.empty()) {
        cluster.error = true;
        return cluster;
    }
    cluster.total_points = static_cast<int>(members.size());
    cluster.entropy = s_cur;
    cluster.final_r_th_c = r_th_c;
    cluster.final_r_dl = r_dl;
    for (std::size_t idx : members) cluster.point_steps.push_back(points[idx].step_index);
    std::sort(cluster.point_steps.begin(), cluster.point_steps.end());
    return cluster;
}

std::map<std::string, Cluster> cluster_all(const std::vector<ObservationPoint>& points,
                                           const std::vector<std::string>& beacon_ids,
                                           const ClusteringParams& params,
                                           const MultiLayerGridGraph& g) {
    std::map<std::string, Cluster> out;
    for (const std::string& id : beacon_ids) {
        Cluster c = cluster_for_beacon(points, id, params, g);
        out[id] = std::move(c);
    }
    return out;
}

}  // namespace lidaus
