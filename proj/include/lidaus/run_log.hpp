#ifndef LIDAUS_RUN_LOG_HPP
#define LIDAUS_RUN_LOG_HPP

#include <string>
#include <vector>

#include "lidaus/mission.hpp"

namespace lidaus {

// Line-delimited run log: one header line, then records in step order with
// stage boundaries and anchor deployments interleaved, then a footer
// carrying a hash of everything above it.
struct RunLogAnchorEvent {
    std::string id;
    int step = 0;
    int node = -1;
    Vec3 planned_position;  // estimator-side knowledge only
};

struct RunLogStage {
    int index = 0;
    std::string kind;
    long last_step = 0;
};

struct RunLog {
    std::string version;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string method;
    std::vector<ObservationRecord> records;
    std::vector<RunLogAnchorEvent> anchor_events;
    std::vector<RunLogStage> stages;
};

std::string render_run_log(const MissionReport& report, const std::string& config_hash);
void write_run_log(const std::string& path, const MissionReport& report,
                   const std::string& config_hash);

// Parses and verifies the footer hash; throws std::runtime_error on
// malformed or tampered logs.
RunLog read_run_log(const std::string& path);
RunLog parse_run_log_text(const std::string& text, const std::string& origin);

}  // namespace lidaus

#endif
