#ifndef LIDAUS_SIGNAL_MODEL_HPP
#define LIDAUS_SIGNAL_MODEL_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lidaus/rng.hpp"

namespace lidaus {

// Log-distance path loss model: rssi(d) = -10 * alpha * log10(d) + beta,
// with beta referenced at d0 = 1 m.
struct PathLossParams {
    double alpha = 2.0;   // propagation exponent
    double beta = -46.4;  // dBm at 1 m
    double d0 = 1.0;

    bool valid() const { return alpha > 0.0 && d0 == 1.0; }
};

struct RssiSample {
    std::string beacon_id;
    double value = 0.0;  // dBm
    int step_index = 0;
};

struct NoiseSpec {
    double rssi_std = 0.0;           // dB
    double motion_std_xy = 0.0;      // m, per planned leg, per horizontal axis
    double motion_std_z = 0.0;       // m, per planned leg
    double height_sensor_std = 0.0;  // m

    bool valid() const {
        return rssi_std >= 0.0 && motion_std_xy >= 0.0 && motion_std_z >= 0.0 &&
               height_sensor_std >= 0.0;
    }
};

// rssi at distance d. Throws std::domain_error for d <= 0.
double expected_rssi(const PathLossParams& params, double d);

// Inverse of expected_rssi; defined for any finite rssi.
double distance_from_rssi(const PathLossParams& params, double rssi);

// Closed-form least squares fit of (alpha, beta) from (distance, rssi)
// pairs. Needs at least two distinct distances.
PathLossParams fit_params(const std::vector<std::pair<double, double>>& pairs);

// One noisy rssi draw for a beacon at true_distance.
double simulate_rssi(double true_distance, const PathLossParams& params,
                     const NoiseSpec& noise, RngStream& rng);

// First-order propagation of rssi noise into range noise at distance d:
// sigma_d = d * ln(10) / (10 * alpha) * rssi_std.
double range_noise_std(const PathLossParams& params, double d, double rssi_std);

// Per-beacon median over the samples collected at one observation point.
// Even counts take the lower median so the result is always an observed
// value.
std::map<std::string, double> aggregate_medians(const std::vector<RssiSample>& samples);

double lower_median(std::vector<double> values);

}  // namespace lidaus

#endif
