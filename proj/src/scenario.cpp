#include "lidaus/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace lidaus {

using ordered_json = nlohmann::ordered_json;

namespace {

void reject_unknown(const ordered_json& obj, const std::set<std::string>& known,
                    const std::string& scope) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key))
            throw ConfigError("unknown key: " + scope + key);
}

const ordered_json& require(const ordered_json& obj, const std::string& key,
                            const std::string& scope) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("missing key: " + scope + key);
    return *it;
}

double number(const ordered_json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("expected a number at: " + where);
    return v.get<double>();
}

Vec3 vec3(const ordered_json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3)
        throw ConfigError("expected [x, y, z] at: " + where);
    return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

SpaceSpec parse_space(const ordered_json& j) {
    reject_unknown(j, {"width", "depth", "height", "layer_heights", "cell_side", "obstacles",
                       "transition_columns"},
                   "space.");
    SpaceSpec space;
    space.width = number(require(j, "width", "space."), "space.width");
    space.depth = number(require(j, "depth", "space."), "space.depth");
    space.height = number(require(j, "height", "space."), "space.height");
    for (const auto& h : require(j, "layer_heights", "space."))
        space.layer_heights.push_back(number(h, "space.layer_heights"));
    space.cell_side = number(require(j, "cell_side", "space."), "space.cell_side");
    if (j.contains("obstacles")) {
        for (const auto& box : j["obstacles"]) {
            reject_unknown(box, {"min", "max"}, "space.obstacles.");
            space.obstacles.push_back({vec3(require(box, "min", "space.obstacles."), "obstacles.min"),
                                       vec3(require(box, "max", "space.obstacles."), "obstacles.max")});
        }
    }
    if (j.contains("transition_columns")) {
        for (const auto& col : j["transition_columns"]) {
            if (!col.is_array() || col.size() != 2)
                throw ConfigError("expected [ix, iy] at: space.transition_columns");
            space.transition_columns.push_back(
                {col[0].get<int>(), col[1].get<int>()});
        }
    }
    return space;
}

PathLossParams parse_path_loss(const ordered_json& j, const std::string& scope) {
    reject_unknown(j, {"alpha", "beta"}, scope);
    PathLossParams params;
    params.alpha = number(require(j, "alpha", scope), scope + "alpha");
    params.beta = number(require(j, "beta", scope), scope + "beta");
    return params;
}

}  // namespace

MissionConfig parse_scenario_text(const std::string& text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    reject_unknown(j,
                   {"name", "space", "path_loss", "noise", "beacons", "beacon_generator",
                    "particle_count", "anchor_spacing", "found_rssi_threshold", "found_distance",
                    "found_count_threshold", "max_stages", "max_steps", "step_length",
                    "samples_per_point", "clustering", "detour_loop_side", "rssi_floor_dbm",
                    "anchor_report_limit", "seed"},
                   "");

    MissionConfig cfg;
    if (j.contains("name")) cfg.name = j["name"].get<std::string>();
    cfg.space = parse_space(require(j, "space", ""));
    cfg.path_loss = parse_path_loss(require(j, "path_loss", ""), "path_loss.");

    {
        const ordered_json& n = require(j, "noise", "");
        reject_unknown(n, {"rssi_std", "motion_std_xy", "motion_std_z", "height_sensor_std"},
                       "noise.");
        cfg.noise.rssi_std = number(require(n, "rssi_std", "noise."), "noise.rssi_std");
        cfg.noise.motion_std_xy =
            number(require(n, "motion_std_xy", "noise."), "noise.motion_std_xy");
        cfg.noise.motion_std_z = number(require(n, "motion_std_z", "noise."), "noise.motion_std_z");
        cfg.noise.height_sensor_std =
            number(require(n, "height_sensor_std", "noise."), "noise.height_sensor_std");
    }

    if (j.contains("beacons") == j.contains("beacon_generator"))
        throw ConfigError("exactly one of beacons / beacon_generator is required");

    if (j.contains("beacons")) {
        for (const auto& b : j["beacons"]) {
            reject_unknown(b, {"id", "position", "alpha", "beta"}, "beacons.");
            Beacon beacon;
            beacon.id = require(b, "id", "beacons.").get<std::string>();
            beacon.true_position = vec3(require(b, "position", "beacons."), "beacons.position");
            beacon.params = cfg.path_loss;
            if (b.contains("alpha")) beacon.params.alpha = number(b["alpha"], "beacons.alpha");
            if (b.contains("beta")) beacon.params.beta = number(b["beta"], "beacons.beta");
            cfg.targets.push_back(beacon);
        }
    } else {
        const ordered_json& gen = j["beacon_generator"];
        reject_unknown(gen, {"count", "seed"}, "beacon_generator.");
        const int count = require(gen, "count", "beacon_generator.").get<int>();
        const std::uint64_t gen_seed = require(gen, "seed", "beacon_generator.").get<std::uint64_t>();
        RngStream rng(gen_seed, "beacon-gen");
        for (int i = 0; i < count; ++i) {
            Beacon beacon;
            beacon.id = "b" + std::to_string(i);
            beacon.true_position = {rng.uniform() * cfg.space.width,
                                    rng.uniform() * cfg.space.depth,
                                    rng.uniform() * cfg.space.height};
            beacon.params = cfg.path_loss;
            cfg.targets.push_back(beacon);
        }
    }

    if (j.contains("particle_count")) cfg.particle_count = j["particle_count"].get<int>();
    if (j.contains("anchor_spacing"))
        cfg.anchor_spacing = number(j["anchor_spacing"], "anchor_spacing");
    if (j.contains("found_rssi_threshold"))
        cfg.found_rssi_threshold = number(j["found_rssi_threshold"], "found_rssi_threshold");
    if (j.contains("found_distance"))
        cfg.found_distance = number(j["found_distance"], "found_distance");
    if (j.contains("found_count_threshold"))
        cfg.found_count_threshold = j["found_count_threshold"].get<int>();
    if (j.contains("max_stages")) cfg.max_stages = j["max_stages"].get<int>();
    if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<long>();
    if (j.contains("step_length")) cfg.step_length = number(j["step_length"], "step_length");
    if (j.contains("samples_per_point")) cfg.samples_per_point = j["samples_per_point"].get<int>();
    if (j.contains("detour_loop_side"))
        cfg.detour_loop_side = number(j["detour_loop_side"], "detour_loop_side");
    if (j.contains("rssi_floor_dbm")) cfg.rssi_floor_dbm = number(j["rssi_floor_dbm"], "rssi_floor_dbm");
    if (j.contains("anchor_report_limit"))
        cfg.anchor_report_limit = j["anchor_report_limit"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

    // Clustering defaults derive the admission floor from the 10 m rssi.
    cfg.clustering.r_th_c_init = expected_rssi(cfg.path_loss, 10.0);
    if (j.contains("clustering")) {
        const ordered_json& c = j["clustering"];
        reject_unknown(c, {"r_dl_init", "r_th_c_init", "s_th", "weights"}, "clustering.");
        if (c.contains("r_dl_init")) cfg.clustering.r_dl_init = number(c["r_dl_init"], "clustering.r_dl_init");
        if (c.contains("r_th_c_init"))
            cfg.clustering.r_th_c_init = number(c["r_th_c_init"], "clustering.r_th_c_init");
        if (c.contains("s_th")) cfg.clustering.s_th = number(c["s_th"], "clustering.s_th");
        if (c.contains("weights")) {
            const auto& w = c["weights"];
            if (!w.is_array() || w.size() != 3)
                throw ConfigError("expected [core, adjacent, other] at: clustering.weights");
            cfg.clustering.w_core = number(w[0], "clustering.weights");
            cfg.clustering.w_adjacent = number(w[1], "clustering.weights");
            cfg.clustering.w_other = number(w[2], "clustering.weights");
        }
    }

    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

MissionConfig parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path);
}

std::string serialize_scenario(const MissionConfig& cfg) {
    ordered_json j;
    j["name"] = cfg.name;
    j["space"]["width"] = cfg.space.width;
    j["space"]["depth"] = cfg.space.depth;
    j["space"]["height"] = cfg.space.height;
    j["space"]["layer_heights"] = cfg.space.layer_heights;
    j["space"]["cell_side"] = cfg.space.cell_side;
    j["space"]["obstacles"] = ordered_json::array();
    for (const Box& box : cfg.space.obstacles) {
        ordered_json b;
        b["min"] = {box.min.x, box.min.y, box.min.z};
        b["max"] = {box.max.x, box.max.y, box.max.z};
        j["space"]["obstacles"].push_back(b);
    }
    j["space"]["transition_columns"] = ordered_json::array();
    for (const auto& [ix, iy] : cfg.space.transition_columns)
        j["space"]["transition_columns"].push_back({ix, iy});

    j["path_loss"]["alpha"] = cfg.path_loss.alpha;
    j["path_loss"]["beta"] = cfg.path_loss.beta;
    j["noise"]["rssi_std"] = cfg.noise.rssi_std;
    j["noise"]["motion_std_xy"] = cfg.noise.motion_std_xy;
    j["noise"]["motion_std_z"] = cfg.noise.motion_std_z;
    j["noise"]["height_sensor_std"] = cfg.noise.height_sensor_std;

    j["beacons"] = ordered_json::array();
    for (const Beacon& b : cfg.targets) {
        ordered_json e;
        e["id"] = b.id;
        e["position"] = {b.true_position.x, b.true_position.y, b.true_position.z};
        if (b.params.alpha != cfg.path_loss.alpha) e["alpha"] = b.params.alpha;
        if (b.params.beta != cfg.path_loss.beta) e["beta"] = b.params.beta;
        j["beacons"].push_back(e);
    }

    j["particle_count"] = cfg.particle_count;
    j["anchor_spacing"] = cfg.anchor_spacing;
    j["found_rssi_threshold"] = cfg.found_rssi_threshold;
    j["found_distance"] = cfg.found_distance;
    j["found_count_threshold"] = cfg.found_count_threshold;
    j["max_stages"] = cfg.max_stages;
    j["max_steps"] = cfg.max_steps;
    j["step_length"] = cfg.step_length;
    j["samples_per_point"] = cfg.samples_per_point;
    j["clustering"]["r_dl_init"] = cfg.clustering.r_dl_init;
    j["clustering"]["r_th_c_init"] = cfg.clustering.r_th_c_init;
    j["clustering"]["s_th"] = cfg.clustering.s_th;
    j["clustering"]["weights"] = {cfg.clustering.w_core, cfg.clustering.w_adjacent,
                                  cfg.clustering.w_other};
    j["detour_loop_side"] = cfg.detour_loop_side;
    j["rssi_floor_dbm"] = cfg.rssi_floor_dbm;
    j["anchor_report_limit"] = cfg.anchor_report_limit;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

std::string config_hash(const MissionConfig& cfg) {
    const std::string text = serialize_scenario(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : text) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace lidaus
