#include "lidaus/run_log.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace lidaus {

using ordered_json = nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : text) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

ordered_json record_json(const ObservationRecord& r) {
    ordered_json j;
    j["type"] = "record";
    j["step"] = r.step_index;
    j["motion"] = {r.motion.dx, r.motion.dy, r.motion.dz};
    j["height"] = r.height_reading;
    j["rssi"] = ordered_json::object();
    for (const auto& [id, v] : r.rssi_medians) j["rssi"][id] = v;
    j["pose"] = {r.pose_estimate_at_record.x, r.pose_estimate_at_record.y,
                 r.pose_estimate_at_record.z};
    return j;
}

}  // namespace

std::string render_run_log(const MissionReport& report, const std::string& hash) {
    std::ostringstream out;
    ordered_json header;
    header["type"] = "header";
    header["version"] = "1";
    header["config_hash"] = hash;
    header["seed"] = report.seed;
    header["method"] = method_name(report.method);
    out << header.dump() << "\n";

    // Interleave stage starts, records and anchor events by step order.
    std::size_t stage_i = 0, anchor_i = 0;
    for (const ObservationRecord& r : report.log) {
        const long prev_last = stage_i == 0 ? -1 : report.stages[stage_i - 1].last_step;
        if (stage_i < report.stages.size() && r.step_index > prev_last) {
            const StageResult& s = report.stages[stage_i];
            ordered_json j;
            j["type"] = "stage";
            j["index"] = s.stage_index;
            j["kind"] = s.kind;
            j["last_step"] = s.last_step;
            out << j.dump() << "\n";
            ++stage_i;
        }
        out << record_json(r).dump() << "\n";
        while (anchor_i < report.anchors.size() &&
               report.anchors[anchor_i].step <= r.step_index) {
            const AnchorInfo& a = report.anchors[anchor_i];
            ordered_json j;
            j["type"] = "anchor";
            j["id"] = a.id;
            j["step"] = a.step;
            j["node"] = a.node;
            j["planned"] = {a.planned_position.x, a.planned_position.y, a.planned_position.z};
            out << j.dump() << "\n";
            ++anchor_i;
        }
    }

    const std::string body = out.str();
    ordered_json footer;
    footer["type"] = "footer";
    footer["records"] = report.log.size();
    footer["log_hash"] = hex64(fnv1a(body));
    return body + footer.dump() + "\n";
}

void write_run_log(const std::string& path, const MissionReport& report,
                   const std::string& hash) {
    const std::string text = render_run_log(report, hash);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write run log: " + path);
    out << text;
}

RunLog parse_run_log_text(const std::string& text, const std::string& origin) {
    RunLog log;
    std::istringstream in(text);
    std::string line;
    std::string body;
    bool have_footer = false;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(origin + ": malformed log line: " + e.what());
        }
        const std::string type = j.at("type").get<std::string>();
        if (type == "footer") {
            have_footer = true;
            const std::string expected = j.at("log_hash").get<std::string>();
            if (hex64(fnv1a(body)) != expected)
                throw std::runtime_error(origin + ": log hash mismatch, file was modified");
            if (j.at("records").get<std::size_t>() != log.records.size())
                throw std::runtime_error(origin + ": record count mismatch");
            break;
        }
        body += line + "\n";
        if (type == "header") {
            log.version = j.at("version").get<std::string>();
            log.config_hash = j.at("config_hash").get<std::string>();
            log.seed = j.at("seed").get<std::uint64_t>();
            log.method = j.at("method").get<std::string>();
        } else if (type == "stage") {
            RunLogStage s;
            s.index = j.at("index").get<int>();
            s.kind = j.at("kind").get<std::string>();
            s.last_step = j.at("last_step").get<long>();
            log.stages.push_back(s);
        } else if (type == "record") {
            ObservationRecord r;
            r.step_index = j.at("step").get<int>();
            const auto& m = j.at("motion");
            r.motion = {m[0].get<double>(), m[1].get<double>(), m[2].get<double>()};
            r.height_reading = j.at("height").get<double>();
            for (const auto& [id, v] : j.at("rssi").items())
                r.rssi_medians[id] = v.get<double>();
            const auto& p = j.at("pose");
            r.pose_estimate_at_record = {p[0].get<double>(), p[1].get<double>(),
                                         p[2].get<double>()};
            log.records.push_back(r);
        } else if (type == "anchor") {
            RunLogAnchorEvent a;
            a.id = j.at("id").get<std::string>();
            a.step = j.at("step").get<int>();
            a.node = j.at("node").get<int>();
            const auto& p = j.at("planned");
            a.planned_position = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
            log.anchor_events.push_back(a);
        } else {
            throw std::runtime_error(origin + ": unknown log line type: " + type);
        }
    }
    if (!have_footer) throw std::runtime_error(origin + ": truncated log, footer missing");
    return log;
}

RunLog read_run_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open run log: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_log_text(buffer.str(), path);
}

}  // namespace lidaus
