#ifndef LIDAUS_EXPORT_DATA_HPP
#define LIDAUS_EXPORT_DATA_HPP

#include <string>
#include <vector>

#include "lidaus/mission.hpp"

namespace lidaus {

// Plain tabular files for external plotting: per-beacon errors, boxplot
// quantiles, trajectory trace, Steiner-tree snapshots and anchor positions.
void export_plot_data(const MissionReport& report, const std::vector<Beacon>& truth,
                      const std::string& out_dir);

// Five-number summary of a sample (min, q1, median, q3, max).
std::vector<double> boxplot_quantiles(std::vector<double> values);

// Canonical JSON rendering of a full mission report, including metrics
// against the ground truth. Identical runs render byte-identically.
std::string render_report_json(const MissionReport& report, const std::vector<Beacon>& truth,
                               const std::string& config_hash);
void write_report_json(const std::string& path, const MissionReport& report,
                       const std::vector<Beacon>& truth, const std::string& config_hash);

}  // namespace lidaus

#endif
