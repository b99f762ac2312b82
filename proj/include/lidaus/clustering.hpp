#ifndef LIDAUS_CLUSTERING_HPP
#define LIDAUS_CLUSTERING_HPP

#include <map>
#include <string>
#include <vector>

#include "lidaus/space.hpp"

namespace lidaus {

// One observation point: a pose estimate snapped onto its nearest grid
// edge, carrying the per-beacon median rssi collected there.
struct ObservationPoint {
    int step_index = 0;
    Vec3 position;
    int host_edge = -1;
    std::map<std::string, double> rssi_medians;
};

ObservationPoint make_observation_point(const MultiLayerGridGraph& g, int step_index,
                                        const Vec3& raw_position,
                                        const std::map<std::string, double>& medians);

struct ClusteringParams {
    double r_dl_init = 0.0;    // dB tolerance off the per-point maximum
    double r_th_c_init = 0.0;  // dBm admission floor
    double s_th = 0.35;        // entropy target in (0, 1)
    double w_core = 1.0;
    double w_adjacent = 0.5;
    double w_other = 0.25;

    void validate() const;
};

struct Cluster {
    std::string beacon_id;
    std::vector<int> point_steps;       // ascending step_index of members
    Vec3 center;                        // 1-means center of member positions
    double entropy = 0.0;
    std::map<int, int> edge_counts;     // host edge index -> member count
    int total_points = 0;
    bool error = false;                 // no qualifying point at any threshold
    bool center_clamped = false;        // center fell outside the space
    double final_r_th_c = 0.0;
    double final_r_dl = 0.0;
    int iterations = 0;
};

// Per-edge weight table for the cube holding a cluster center: the cube's
// own edges are core, edges touching a cube corner are adjacent, the rest
// are other.
std::vector<double> classify_edges(const MultiLayerGridGraph& g, const CubeId& cube,
                                   const ClusteringParams& params);

// Normalized weighted Shannon entropy of the per-edge membership counts.
// Uniform membership over all graph edges at core weight scores 1; a
// single-edge cluster scores 0.
double weighted_entropy(const std::map<int, int>& edge_counts,
                        const std::vector<double>& edge_weights, int total_graph_edges,
                        double w_core);

Cluster cluster_for_beacon(const std::vector<ObservationPoint>& points,
                           const std::string& beacon_id, const ClusteringParams& params,
                           const MultiLayerGridGraph& g);

std::map<std::string, Cluster> cluster_all(const std::vector<ObservationPoint>& points,
                                           const std::vector<std::string>& beacon_ids,
                                           const ClusteringParams& params,
                                           const MultiLayerGridGraph& g);

}  // namespace lidaus

#endif
