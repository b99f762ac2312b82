#ifndef LIDAUS_MISSION_HPP
#define LIDAUS_MISSION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lidaus/clustering.hpp"
#include "lidaus/planning.hpp"
#include "lidaus/signal_model.hpp"
#include "lidaus/space.hpp"
#include "lidaus/uslam.hpp"

namespace lidaus {

enum class Method { lidaus, random_walk, naive_search };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct MissionConfig {
    std::string name = "scenario";
    SpaceSpec space;
    std::vector<Beacon> targets;
    PathLossParams path_loss;
    NoiseSpec noise;
    int particle_count = 100;
    double anchor_spacing = 4.0;
    double found_rssi_threshold = -51.0;
    // Declared distance equivalent of the found threshold; must agree with
    // the path loss parameters within 0.1 m. <= 0 skips the check.
    double found_distance = 1.7;
    int found_count_threshold = 3;  // n_th
    int max_stages = 5;             // searching stages
    long max_steps = 10000;
    double step_length = 1.0;
    int samples_per_point = 20;
    ClusteringParams clustering;
    double detour_loop_side = 1.0;
    double rssi_floor_dbm = -100.0;  // medians below this are not reported
    int anchor_report_limit = 20;    // strongest anchors visible per point
    std::uint64_t seed = 1;

    void validate() const;
};

struct AnchorInfo {
    std::string id;
    int node = -1;  // ground-graph node where deployment was planned
    Vec3 planned_position;
    Vec3 true_position;
    int step = 0;
};

struct BeaconOutcome {
    bool has_estimate = false;
    Vec3 estimate;       // reported estimate (post-replay for the full system)
    Vec3 live_estimate;  // filter mean at the end of the run
    bool found = false;
    int found_stage = -1;
};

struct StageResult {
    int stage_index = 0;
    std::string kind;  // "exploring" or "searching"
    long steps = 0;
    long last_step = 0;  // step index of the stage's final record
    double path_length = 0.0;
    std::vector<std::string> newly_found;
    std::vector<std::string> anchors_deployed;
    std::map<std::string, Cluster> clusters;
    std::map<std::string, Vec3> estimates;       // post-replay, all estimated targets
    std::map<std::string, Vec3> live_estimates;  // filter means at stage end
    // Searching stages only: the tree and the flown branch, in coordinates.
    std::vector<Vec3> steiner_node_positions;
    std::vector<std::pair<int, int>> steiner_edges;  // indices into the node list
    std::vector<Vec3> branch_positions;
};

struct MissionReport {
    Method method = Method::lidaus;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<StageResult> stages;
    std::map<std::string, BeaconOutcome> outcomes;
    std::vector<AnchorInfo> anchors;
    std::vector<ObservationRecord> log;
    std::vector<Vec3> true_trajectory;  // steps + 1 positions
    long total_steps = 0;
    std::string termination_reason;
};

MissionReport run_mission(const MissionConfig& config);
MissionReport run_baseline_random(const MissionConfig& config);
MissionReport run_baseline_naive(const MissionConfig& config);
MissionReport run_method(const MissionConfig& config, Method method);

struct BeaconMetric {
    std::string id;
    bool has_estimate = false;
    bool found = false;
    double error = 0.0;
    double ex = 0.0;
    double ey = 0.0;
    double ez = 0.0;
};

struct MetricsTable {
    std::vector<BeaconMetric> rows;
    double mean_error = 0.0;  // over beacons with an estimate
    double max_error = 0.0;
    int estimated_count = 0;
    int missing_count = 0;
    long total_steps = 0;
    int total_anchors = 0;
};

MetricsTable compute_metrics(const MissionReport& report, const std::vector<Beacon>& truth);

// Single-sweep study harness: flies a fixed boustrophedon sweep over the
// ground grid at the given anchor spacing (0 disables anchors), reporting
// live-filter errors. Used for the anchor-density study.
struct SweepResult {
    std::map<std::string, double> errors;
    double mean_error = 0.0;
    long steps = 0;
    int anchors = 0;
};
SweepResult run_anchor_sweep(const MissionConfig& config, double anchor_spacing,
                             double rssi_std);

}  // namespace lidaus

#endif
