#include "lidaus/mission.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lidaus {

std::string method_name(Method m) {
    switch (m) {
        case Method::lidaus: return "lidaus";
        case Method::random_walk: return "random";
        case Method::naive_search: return "naive";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "lidaus") return Method::lidaus;
    if (name == "random") return Method::random_walk;
    if (name == "naive") return Method::naive_search;
    throw std::invalid_argument("unknown method: " + name);
}

void MissionConfig::validate() const {
    space.validate();
    if (!path_loss.valid()) throw std::invalid_argument("config: invalid path loss parameters");
    if (!noise.valid()) throw std::invalid_argument("config: noise stds must be non-negative");
    clustering.validate();
    if (particle_count < 1) throw std::invalid_argument("config: particle_count must be >= 1");
    if (step_length <= 0.0) throw std::invalid_argument("config: step_length must be > 0");
    if (max_steps < 1) throw std::invalid_argument("config: max_steps must be >= 1");
    if (max_stages < 0) throw std::invalid_argument("config: max_stages must be >= 0");
    if (anchor_spacing <= 0.0) throw std::invalid_argument("config: anchor_spacing must be > 0");
    if (samples_per_point < 1) throw std::invalid_argument("config: samples_per_point must be >= 1");
    if (found_count_threshold < 1) throw std::invalid_argument("config: found_count_threshold must be >= 1");
    if (detour_loop_side <= 0.0) throw std::invalid_argument("config: detour_loop_side must be > 0");

    const double wq = space.width / step_length;
    const double dq = space.depth / step_length;
    if (std::abs(wq - std::round(wq)) > 1e-9 || std::abs(dq - std::round(dq)) > 1e-9)
        throw std::invalid_argument("config: width and depth must be multiples of step_length");

    std::set<std::string> ids;
    for (const Beacon& b : targets) {
        if (b.id.empty()) throw std::invalid_argument("config: beacon with empty id");
        if (!ids.insert(b.id).second)
            throw std::invalid_argument("config: duplicate beacon id " + b.id);
        if (!b.params.valid())
            throw std::invalid_argument("config: invalid path loss parameters for " + b.id);
        const Vec3& p = b.true_position;
        if (p.x < 0.0 || p.x > space.width || p.y < 0.0 || p.y > space.depth || p.z < 0.0 ||
            p.z > space.height)
            throw std::invalid_argument("config: beacon " + b.id + " lies outside the space");
    }

    if (found_distance > 0.0) {
        const double implied = distance_from_rssi(path_loss, found_rssi_threshold);
        if (std::abs(implied - found_distance) > 0.1)
            throw std::invalid_argument(
                "config: found_rssi_threshold maps to " + std::to_string(implied) +
                " m, which disagrees with found_distance " + std::to_string(found_distance));
    }
}

namespace {

Vec3 to_vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

// Shared simulation engine: owns the ground truth, the noise streams and
// the filter, and executes planned legs step by step. Motion noise is one
// Gaussian error per planned leg (waypoint tracking error), accumulated
// into the true position and interpolated across the leg's steps.
class Engine {
public:
    Engine(const MissionConfig& cfg, Method method)
        : cfg_(cfg),
          method_(method),
          graph_(MultiLayerGridGraph::discretize(cfg.space)),
          motion_rng_(cfg.seed, "motion"),
          height_rng_(cfg.seed, "height"),
          walk_rng_(cfg.seed, "baseline-walk"),
          filter_(make_filter_config(cfg), cfg.seed) {
        const double ground_z = cfg.space.layer_heights.front();
        planned_ = {0.0, 0.0, ground_z};
        drift_ = {0.0, 0.0, 0.0};
        for (const Beacon& t : cfg.targets) {
            beacons_.push_back(t);
            rssi_rngs_.emplace(t.id, RngStream(cfg.seed, "rssi:" + t.id));
        }
    }

    static SlamConfig make_filter_config(const MissionConfig& cfg) {
        SlamConfig fc;
        fc.particle_count = cfg.particle_count;
        fc.noise = cfg.noise;
        fc.default_params = cfg.path_loss;
        for (const Beacon& t : cfg.targets) fc.beacon_params[t.id] = t.params;
        fc.space_height = cfg.space.height;
        return fc;
    }

    const MultiLayerGridGraph& graph() const { return graph_; }
    SlamFilter& filter() { return filter_; }
    const std::vector<ObservationRecord>& log() const { return log_; }
    const std::vector<Vec3>& trajectory() const { return trajectory_; }
    long steps() const { return step_count_; }
    bool step_capped() const { return step_count_ >= cfg_.max_steps; }
    const Vec3& planned_position() const { return planned_; }
    Vec3 true_position() const { return planned_ + drift_; }
    const std::vector<AnchorInfo>& anchors() const { return anchors_; }
    const std::set<int>& anchor_nodes() const { return anchor_nodes_; }

    void enable_found_counting(bool on) { found_counting_ = on; }
    void reset_found_counts() { found_counts_.clear(); }
    const std::set<std::string>& found() const { return found_; }
    std::vector<std::string>& newly_found() { return newly_found_; }

    // Records the observation at the current position without moving;
    // used once at mission start.
    void emit_initial_record() { collect({0.0, 0.0, 0.0}); }

    // Flies one planned leg, collecting an observation at every step.
    // Returns false when the step cap interrupted the leg.
    bool fly_leg(const Vec3& to) {
        const Vec3 from = planned_;
        const Vec3 delta = to - from;
        const double len = delta.norm();
        if (len < 1e-12) return true;

        const Vec3 leg_noise{motion_rng_.gaussian(cfg_.noise.motion_std_xy),
                             motion_rng_.gaussian(cfg_.noise.motion_std_xy),
                             motion_rng_.gaussian(cfg_.noise.motion_std_z)};
        const int n = std::max(1, static_cast<int>(std::ceil(len / cfg_.step_length - 1e-9)));
        for (int k = 1; k <= n; ++k) {
            if (step_capped()) return false;
            const double f = static_cast<double>(k) / n;
            const double fp = static_cast<double>(k - 1) / n;
            const Vec3 planned_next = from + delta * f;
            const MotionCommand cmd{planned_next.x - (from.x + delta.x * fp),
                                    planned_next.y - (from.y + delta.y * fp),
                                    planned_next.z - (from.z + delta.z * fp)};
            planned_ = planned_next;
            partial_drift_ = leg_noise * f;
            ++step_count_;
            collect(cmd);
        }
        drift_ = drift_ + leg_noise;
        partial_drift_ = {0.0, 0.0, 0.0};
        return true;
    }

    bool fly_waypoints(const std::vector<Vec3>& waypoints) {
        for (const Vec3& w : waypoints)
            if (!fly_leg(clamp_to_space(w))) return false;
        return true;
    }

    Vec3 clamp_to_space(const Vec3& p) const {
        return {std::clamp(p.x, 0.0, cfg_.space.width), std::clamp(p.y, 0.0, cfg_.space.depth),
                std::clamp(p.z, 0.0, cfg_.space.height)};
    }

    void deploy_anchor(int ground_node, const MultiLayerGridGraph& ground_graph) {
        if (anchor_nodes_.count(ground_node)) return;
        const double ground_z = cfg_.space.layer_heights.front();
        char name[32];
        std::snprintf(name, sizeof(name), "anchor_%03d", static_cast<int>(anchors_.size()));

        AnchorInfo info;
        info.id = name;
        info.node = ground_node;
        info.planned_position = ground_graph.node_position(ground_node);
        const Vec3 t = true_position();
        info.true_position = {t.x, t.y, ground_z};
        info.step = static_cast<int>(step_count_);
        anchors_.push_back(info);
        anchor_nodes_.insert(ground_node);

        Beacon b;
        b.id = info.id;
        b.kind = BeaconKind::anchor;
        b.true_position = info.true_position;
        b.params = cfg_.path_loss;
        beacons_.push_back(b);
        rssi_rngs_.emplace(b.id, RngStream(cfg_.seed, "rssi:" + b.id));
        filter_.add_anchor(b.id, ground_z);
    }

    // Random-walk step on the step_length lattice; re-draws directions that
    // would leave the space or cross an obstacle.
    bool random_step() {
        static const Vec3 dirs[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                     {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        for (int attempt = 0; attempt < 64; ++attempt) {
            const Vec3 d = dirs[walk_rng_.uniform_int(6)] * cfg_.step_length;
            const Vec3 next = planned_ + d;
            if (next.x < -1e-9 || next.x > cfg_.space.width + 1e-9 || next.y < -1e-9 ||
                next.y > cfg_.space.depth + 1e-9 || next.z < -1e-9 ||
                next.z > cfg_.space.height + 1e-9)
                continue;
            bool blocked = false;
            for (const Box& box : cfg_.space.obstacles)
                if (segment_intersects_box(planned_, next, box)) {
                    blocked = true;
                    break;
                }
            if (blocked) continue;
            return fly_leg(next);
        }
        throw std::runtime_error("random walk: no legal direction found");
    }

private:
    void collect(const MotionCommand& cmd) {
        const Vec3 truth = planned_ + drift_ + partial_drift_;
        trajectory_.push_back(truth);

        ObservationRecord record;
        record.step_index = static_cast<int>(step_count_);
        record.motion = cmd;
        record.height_reading = truth.z + height_rng_.gaussian(cfg_.noise.height_sensor_std);

        std::map<std::string, double> target_medians;
        std::vector<std::pair<std::string, double>> anchor_medians;
        for (const Beacon& b : beacons_) {
            const double d = std::max(distance(truth, b.true_position), 0.01);
            RngStream& rng = rssi_rngs_.at(b.id);
            std::vector<double> samples;
            samples.reserve(static_cast<std::size_t>(cfg_.samples_per_point));
            for (int s = 0; s < cfg_.samples_per_point; ++s)
                samples.push_back(simulate_rssi(d, b.params, cfg_.noise, rng));
            const double median = lower_median(std::move(samples));
            if (median < cfg_.rssi_floor_dbm) continue;
            if (b.kind == BeaconKind::anchor)
                anchor_medians.push_back({b.id, median});
            else
                target_medians[b.id] = median;
        }
        // A receiver scan only keeps the strongest anchors in dense fields.
        std::sort(anchor_medians.begin(), anchor_medians.end(),
                  [](const auto& a, const auto& b) {
                      return a.second != b.second ? a.second > b.second : a.first < b.first;
                  });
        if (static_cast<int>(anchor_medians.size()) > cfg_.anchor_report_limit)
            anchor_medians.resize(static_cast<std::size_t>(cfg_.anchor_report_limit));

        record.rssi_medians = target_medians;
        for (const auto& [id, median] : anchor_medians) record.rssi_medians[id] = median;

        filter_.step(record);
        record.pose_estimate_at_record = filter_.pose_estimate();
        log_.push_back(record);

        if (found_counting_) {
            for (const auto& [id, median] : target_medians) {
                if (found_.count(id) || median <= cfg_.found_rssi_threshold) continue;
                if (++found_counts_[id] >= cfg_.found_count_threshold) {
                    found_.insert(id);
                    newly_found_.push_back(id);
                }
            }
        }
    }

    const MissionConfig& cfg_;
    Method method_;
    MultiLayerGridGraph graph_;
    RngStream motion_rng_;
    RngStream height_rng_;
    RngStream walk_rng_;
    SlamFilter filter_;

    Vec3 planned_;
    Vec3 drift_;          // realized error of completed legs
    Vec3 partial_drift_;  // error fraction inside the current leg
    long step_count_ = 0;

    std::vector<Beacon> beacons_;
    std::map<std::string, RngStream> rssi_rngs_;
    std::vector<ObservationRecord> log_;
    std::vector<Vec3> trajectory_;
    std::vector<AnchorInfo> anchors_;
    std::set<int> anchor_nodes_;

    bool found_counting_ = false;
    std::map<std::string, int> found_counts_;
    std::set<std::string> found_;
    std::vector<std::string> newly_found_;
};

// Cluster + selective replay for one beacon: the cluster center becomes the
// replay prior, with a covariance matching the cluster's spread.
std::optional<Vec3> replay_estimate(const Engine& eng, const MissionConfig& cfg,
                                    const Cluster& cluster,
                                    const std::vector<ObservationPoint>& points,
                                    const PathLossParams& params) {
    if (cluster.error || cluster.point_steps.empty()) return std::nullopt;

    std::map<int, const ObservationPoint*> by_step;
    for (const ObservationPoint& p : points) by_step[p.step_index] = &p;

    Vec3 spread;
    for (int step : cluster.point_steps) {
        const Vec3 d = by_step.at(step)->position - cluster.center;
        spread.x += d.x * d.x;
        spread.y += d.y * d.y;
        spread.z += d.z * d.z;
    }
    const double n = static_cast<double>(cluster.point_steps.size());

    BeaconEstimate init;
    init.mu = Eigen::Vector3d(cluster.center.x, cluster.center.y,
                              std::clamp(cluster.center.z, 0.0, cfg.space.height));
    init.sigma = Eigen::Vector3d(std::max(spread.x / n, 1.0), std::max(spread.y / n, 1.0),
                                 std::max(spread.z / n, 1.0))
                     .asDiagonal();

    const std::set<int> steps(cluster.point_steps.begin(), cluster.point_steps.end());
    const ReplayResult rr = replay(eng.log(), cluster.beacon_id, steps, init, params,
                                   cfg.noise.rssi_std);
    Vec3 out = to_vec(rr.estimate.mu);
    out.z = std::clamp(out.z, 0.0, cfg.space.height);
    return out;
}

std::vector<ObservationPoint> observation_points(const Engine& eng) {
    std::vector<ObservationPoint> points;
    points.reserve(eng.log().size());
    for (const ObservationRecord& r : eng.log())
        points.push_back(make_observation_point(eng.graph(), r.step_index,
                                                r.pose_estimate_at_record, r.rssi_medians));
    return points;
}

void fill_stage_estimates(const std::vector<Beacon>& targets, StageResult& stage,
                          const SlamFilter& filter) {
    for (const Beacon& t : targets)
        if (filter.has_estimate(t.id))
            stage.live_estimates[t.id] = to_vec(filter.beacon_estimate(t.id).mu);
}

MissionReport finalize_report(const MissionConfig& cfg, Engine& eng, Method method,
                              std::vector<StageResult> stages,
                              const std::map<std::string, Vec3>& reported,
                              const std::map<std::string, int>& found_stage,
                              const std::string& termination) {
    MissionReport report;
    report.method = method;
    report.seed = cfg.seed;
    report.stages = std::move(stages);
    report.anchors = eng.anchors();
    report.log = eng.log();
    report.true_trajectory = eng.trajectory();
    report.total_steps = eng.steps();
    report.termination_reason = termination;

    for (const Beacon& t : cfg.targets) {
        BeaconOutcome outcome;
        auto it = reported.find(t.id);
        if (it != reported.end()) {
            outcome.has_estimate = true;
            outcome.estimate = it->second;
        }
        if (eng.filter().has_estimate(t.id)) {
            outcome.live_estimate = to_vec(eng.filter().beacon_estimate(t.id).mu);
            if (!outcome.has_estimate) {
                outcome.has_estimate = true;
                outcome.estimate = outcome.live_estimate;
            }
        }
        outcome.found = eng.found().count(t.id) > 0;
        auto fs = found_stage.find(t.id);
        outcome.found_stage = fs == found_stage.end() ? -1 : fs->second;
        report.outcomes[t.id] = outcome;
    }
    return report;
}

}  // namespace

MissionReport run_mission(const MissionConfig& cfg) {
    cfg.validate();
    Engine eng(cfg, Method::lidaus);
    const MultiLayerGridGraph& graph = eng.graph();

    std::vector<StageResult> stages;
    std::map<std::string, Vec3> reported;  // current b-hat per target
    std::map<std::string, int> found_stage;

    eng.emit_initial_record();

    // Exploring stage: stitched edge-covering tours over all layers.
    {
        StageResult stage;
        stage.stage_index = 0;
        stage.kind = "exploring";
        const long start_steps = eng.steps();

        std::vector<Walk> layer_walks;
        for (int layer = 0; layer < graph.num_layers(); ++layer)
            layer_walks.push_back(eulerian_explore_path(graph, graph.node_id(0, 0, layer)));
        const Walk full = stitch_layers(graph, layer_walks);
        stage.path_length = full.total_length;

        for (std::size_t i = 1; i < full.nodes.size() && !eng.step_capped(); ++i)
            eng.fly_leg(graph.node_position(full.nodes[i]));

        const std::vector<ObservationPoint> points = observation_points(eng);
        std::vector<std::string> ids;
        for (const Beacon& t : cfg.targets) ids.push_back(t.id);
        stage.clusters = cluster_all(points, ids, cfg.clustering, graph);
        for (const Beacon& t : cfg.targets) {
            const auto est = replay_estimate(eng, cfg, stage.clusters.at(t.id), points,
                                             eng.filter().params_for(t.id));
            if (est) reported[t.id] = *est;
        }
        stage.estimates = reported;
        stage.steps = eng.steps() - start_steps;
        stage.last_step = eng.steps();
        fill_stage_estimates(cfg.targets, stage, eng.filter());
        stages.push_back(std::move(stage));
    }

    if (cfg.targets.empty())
        return finalize_report(cfg, eng, Method::lidaus, std::move(stages), reported,
                               found_stage, "no_targets");

    // Searching stages: Steiner branch over the not-yet-found projections,
    // anchors on the way, detour loops at each projection.
    eng.enable_found_counting(true);
    std::optional<MultiLayerGridGraph> ground;
    std::string termination = "stage_cap";

    for (int stage_index = 1; stage_index <= cfg.max_stages; ++stage_index) {
        std::vector<std::string> remaining;
        for (const Beacon& t : cfg.targets)
            if (!eng.found().count(t.id)) remaining.push_back(t.id);
        if (remaining.empty()) {
            termination = "all_found";
            break;
        }
        std::vector<std::string> plannable;
        for (const std::string& id : remaining)
            if (reported.count(id)) plannable.push_back(id);
        if (plannable.empty()) {
            termination = "unobserved_remaining";
            break;
        }
        if (eng.step_capped()) {
            termination = "step_cap";
            break;
        }

        if (!ground) {
            SpaceSpec gs;
            gs.width = cfg.space.width;
            gs.depth = cfg.space.depth;
            gs.height = cfg.space.height;
            gs.layer_heights = {cfg.space.layer_heights.front()};
            gs.cell_side = cfg.step_length;
            gs.obstacles = cfg.space.obstacles;
            ground = MultiLayerGridGraph::discretize(gs);
        }

        StageResult stage;
        stage.stage_index = stage_index;
        stage.kind = "searching";
        const long start_steps = eng.steps();
        eng.reset_found_counts();
        eng.newly_found().clear();

        // Project the remaining estimates and the vehicle onto the ground grid.
        std::map<int, std::vector<std::string>> detour_targets;
        std::vector<int> terminals;
        for (const std::string& id : plannable) {
            const int node = ground->project_to_ground(reported.at(id)).node;
            detour_targets[node].push_back(id);
            terminals.push_back(node);
        }
        for (int node : eng.anchor_nodes()) terminals.push_back(node);
        const int root = ground->project_to_ground(eng.filter().pose_estimate()).node;

        const SteinerTree tree = steiner_tree(*ground, terminals, root);
        const Walk branch = shortest_branch(tree, *ground);
        std::map<int, int> node_index;
        for (int n : tree.nodes) {
            node_index[n] = static_cast<int>(stage.steiner_node_positions.size());
            stage.steiner_node_positions.push_back(ground->node_position(n));
        }
        for (const auto& [u, v] : tree.edges)
            stage.steiner_edges.push_back({node_index.at(u), node_index.at(v)});
        for (int n : branch.nodes) stage.branch_positions.push_back(ground->node_position(n));
        stage.path_length = branch.total_length;

        const AnchorSchedule schedule =
            plan_anchor_schedule(branch, *ground, cfg.anchor_spacing, eng.anchor_nodes());
        const std::set<int> schedule_nodes(schedule.nodes.begin(), schedule.nodes.end());

        const std::size_t anchors_before = eng.anchors().size();
        eng.fly_leg(ground->node_position(root));
        for (std::size_t i = 0; i < branch.nodes.size() && !eng.step_capped(); ++i) {
            const int node = branch.nodes[i];
            if (i > 0 && !eng.fly_leg(ground->node_position(node))) break;
            if (schedule_nodes.count(node)) eng.deploy_anchor(node, *ground);
            auto dt = detour_targets.find(node);
            if (dt != detour_targets.end()) {
                for (const std::string& id : dt->second) {
                    const Vec3 est = reported.at(id);
                    const std::vector<Vec3> loop = target_detour_waypoints(
                        ground->node_position(node), est, cfg.detour_loop_side);
                    if (!eng.fly_waypoints(loop)) break;
                }
            }
        }

        for (std::size_t i = anchors_before; i < eng.anchors().size(); ++i)
            stage.anchors_deployed.push_back(eng.anchors()[i].id);

        // Stage close-out: label, cluster over everything collected so far,
        // replay every remaining target (the freshly found ones included),
        // then retire the found set.
        stage.newly_found = eng.newly_found();
        for (const std::string& id : stage.newly_found) found_stage[id] = stage_index;

        const std::vector<ObservationPoint> points = observation_points(eng);
        stage.clusters = cluster_all(points, remaining, cfg.clustering, graph);
        for (const std::string& id : remaining) {
            const auto est = replay_estimate(eng, cfg, stage.clusters.at(id), points,
                                             eng.filter().params_for(id));
            if (est) reported[id] = *est;
        }
        stage.estimates = reported;
        stage.steps = eng.steps() - start_steps;
        stage.last_step = eng.steps();
        fill_stage_estimates(cfg.targets, stage, eng.filter());
        stages.push_back(std::move(stage));

        if (eng.step_capped()) {
            termination = "step_cap";
            break;
        }
    }

    {
        bool all_found = true;
        for (const Beacon& t : cfg.targets)
            if (!eng.found().count(t.id)) all_found = false;
        if (all_found) termination = "all_found";
    }
    return finalize_report(cfg, eng, Method::lidaus, std::move(stages), reported, found_stage,
                           termination);
}

MissionReport run_baseline_random(const MissionConfig& cfg) {
    cfg.validate();
    Engine eng(cfg, Method::random_walk);
    eng.enable_found_counting(true);
    eng.emit_initial_record();

    std::string termination = "step_cap";
    while (!eng.step_capped()) {
        if (eng.found().size() == cfg.targets.size() && !cfg.targets.empty()) {
            termination = "all_found";
            break;
        }
        eng.random_step();
    }
    if (cfg.targets.empty()) termination = "no_targets";

    StageResult stage;
    stage.stage_index = 0;
    stage.kind = "searching";
    stage.steps = eng.steps();
    stage.last_step = eng.steps();
    stage.newly_found = eng.newly_found();
    fill_stage_estimates(cfg.targets, stage, eng.filter());

    std::map<std::string, Vec3> reported;
    for (const Beacon& t : cfg.targets)
        if (eng.filter().has_estimate(t.id))
            reported[t.id] = eng.clamp_to_space(to_vec(eng.filter().beacon_estimate(t.id).mu));
    stage.estimates = reported;

    std::map<std::string, int> found_stage;
    for (const std::string& id : stage.newly_found) found_stage[id] = 0;
    std::vector<StageResult> stages{std::move(stage)};
    return finalize_report(cfg, eng, Method::random_walk, std::move(stages), reported,
                           found_stage, termination);
}

MissionReport run_baseline_naive(const MissionConfig& cfg) {
    cfg.validate();
    Engine eng(cfg, Method::naive_search);
    const MultiLayerGridGraph& graph = eng.graph();
    eng.enable_found_counting(true);
    eng.emit_initial_record();

    std::vector<StageResult> stages;
    std::map<std::string, int> found_stage;

    // Figure-eight sweep per layer, bottom to top, then straight down.
    {
        StageResult stage;
        stage.stage_index = 0;
        stage.kind = "exploring";
        const double w = cfg.space.width, d = cfg.space.depth;
        for (int layer = 0; layer < graph.num_layers() && !eng.step_capped(); ++layer) {
            const double z = graph.layer_heights()[static_cast<std::size_t>(layer)];
            const std::vector<Vec3> eight{{0, 0, z},         {w / 2.0, 0, z}, {w / 2.0, d, z},
                                          {w, d, z},         {w, d / 2.0, z}, {0, d / 2.0, z},
                                          {0, 0, z}};
            if (!eng.fly_waypoints(eight)) break;
        }
        eng.fly_leg({0.0, 0.0, cfg.space.layer_heights.front()});
        stage.steps = eng.steps();
        stage.last_step = eng.steps();
        stage.newly_found = eng.newly_found();
        for (const std::string& id : stage.newly_found) found_stage[id] = 0;
        eng.newly_found().clear();
        fill_stage_estimates(cfg.targets, stage, eng.filter());
        stages.push_back(std::move(stage));
    }

    // Greedy chase: nearest unfound estimate, at most 5 visits per target.
    std::string termination = "step_cap";
    std::map<std::string, int> visit_counts;
    {
        StageResult stage;
        stage.stage_index = 1;
        stage.kind = "searching";
        const long start_steps = eng.steps();
        while (!eng.step_capped()) {
            if (eng.found().size() == cfg.targets.size()) {
                termination = cfg.targets.empty() ? "no_targets" : "all_found";
                break;
            }
            std::string dest_id;
            double dest_dist = 0.0;
            const Vec3 pose = eng.filter().pose_estimate();
            for (const Beacon& t : cfg.targets) {
                if (eng.found().count(t.id) || visit_counts[t.id] >= 5) continue;
                if (!eng.filter().has_estimate(t.id)) continue;
                const Vec3 est = eng.clamp_to_space(to_vec(eng.filter().beacon_estimate(t.id).mu));
                const double dist = distance(pose, est);
                if (dest_id.empty() || dist < dest_dist) {
                    dest_id = t.id;
                    dest_dist = dist;
                }
            }
            if (dest_id.empty()) {
                termination = "counter_cap";
                break;
            }
            ++visit_counts[dest_id];
            const Vec3 est = eng.clamp_to_space(to_vec(eng.filter().beacon_estimate(dest_id).mu));
            const Vec3 cur = eng.planned_position();
            eng.fly_waypoints({{est.x, cur.y, cur.z}, {est.x, est.y, cur.z}, {est.x, est.y, est.z}});
        }
        stage.steps = eng.steps() - start_steps;
        stage.last_step = eng.steps();
        stage.newly_found = eng.newly_found();
        for (const std::string& id : stage.newly_found)
            if (!found_stage.count(id)) found_stage[id] = 1;
        fill_stage_estimates(cfg.targets, stage, eng.filter());
        stages.push_back(std::move(stage));
    }

    std::map<std::string, Vec3> reported;
    for (const Beacon& t : cfg.targets)
        if (eng.filter().has_estimate(t.id))
            reported[t.id] = eng.clamp_to_space(to_vec(eng.filter().beacon_estimate(t.id).mu));
    stages.back().estimates = reported;
    return finalize_report(cfg, eng, Method::naive_search, std::move(stages), reported,
                           found_stage, termination);
}

MissionReport run_method(const MissionConfig& cfg, Method method) {
    switch (method) {
        case Method::lidaus: return run_mission(cfg);
        case Method::random_walk: return run_baseline_random(cfg);
        case Method::naive_search: return run_baseline_naive(cfg);
    }
    throw std::invalid_argument("run_method: unknown method");
}

MetricsTable compute_metrics(const MissionReport& report, const std::vector<Beacon>& truth) {
    MetricsTable table;
    table.total_steps = report.total_steps;
    table.total_anchors = static_cast<int>(report.anchors.size());

    double sum = 0.0;
    for (const Beacon& b : truth) {
        BeaconMetric row;
        row.id = b.id;
        auto it = report.outcomes.find(b.id);
        if (it != report.outcomes.end() && it->second.has_estimate) {
            const Vec3 err = it->second.estimate - b.true_position;
            row.has_estimate = true;
            row.found = it->second.found;
            row.error = err.norm();
            row.ex = std::abs(err.x);
            row.ey = std::abs(err.y);
            row.ez = std::abs(err.z);
            sum += row.error;
            table.max_error = std::max(table.max_error, row.error);
            ++table.estimated_count;
        } else {
            ++table.missing_count;
        }
        table.rows.push_back(row);
    }
    table.mean_error = table.estimated_count > 0 ? sum / table.estimated_count : 0.0;
    return table;
}

SweepResult run_anchor_sweep(const MissionConfig& base, double anchor_spacing,
                             double rssi_std) {
    MissionConfig cfg = base;
    cfg.noise.rssi_std = rssi_std;
    cfg.validate();
    if (!cfg.space.obstacles.empty())
        throw std::invalid_argument("anchor sweep: obstacle-free ground layer required");

    // Single ground layer at step_length resolution.
    SpaceSpec gs = cfg.space;
    gs.layer_heights = {cfg.space.layer_heights.front()};
    gs.cell_side = cfg.step_length;
    MissionConfig sweep_cfg = cfg;
    sweep_cfg.space = gs;

    Engine eng(sweep_cfg, Method::lidaus);
    const MultiLayerGridGraph& g = eng.graph();
    eng.emit_initial_record();

    // Boustrophedon over all grid nodes.
    Walk walk;
    for (int ix = 0; ix < g.nx(); ++ix) {
        if (ix % 2 == 0)
            for (int iy = 0; iy < g.ny(); ++iy) walk.nodes.push_back(g.node_id(ix, iy, 0));
        else
            for (int iy = g.ny() - 1; iy >= 0; --iy) walk.nodes.push_back(g.node_id(ix, iy, 0));
    }

    std::set<int> scheduled;
    if (anchor_spacing > 0.0) {
        const AnchorSchedule schedule = plan_anchor_schedule(walk, g, anchor_spacing, {});
        scheduled = std::set<int>(schedule.nodes.begin(), schedule.nodes.end());
    }

    for (std::size_t i = 0; i < walk.nodes.size() && !eng.step_capped(); ++i) {
        const int node = walk.nodes[i];
        if (i > 0 && !eng.fly_leg(g.node_position(node))) break;
        if (scheduled.count(node)) eng.deploy_anchor(node, g);
    }

    SweepResult result;
    result.steps = eng.steps();
    result.anchors = static_cast<int>(eng.anchors().size());
    double sum = 0.0;
    int count = 0;
    for (const Beacon& t : cfg.targets) {
        if (!eng.filter().has_estimate(t.id)) continue;
        const Vec3 est = to_vec(eng.filter().beacon_estimate(t.id).mu);
        const double err = distance(est, t.true_position);
        result.errors[t.id] = err;
        sum += err;
        ++count;
    }
    result.mean_error = count > 0 ? sum / count : 0.0;
    return result;
}

}  // namespace lidaus
