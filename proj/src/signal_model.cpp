#include "lidaus/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lidaus {

double expected_rssi(const PathLossParams& params, double d) {
    if (d <= 0.0) throw std::domain_error("expected_rssi: distance must be > 0");
    return -10.0 * params.alpha * std::log10(d) + params.beta;
}

double distance_from_rssi(const PathLossParams& params, double rssi) {
    return std::pow(10.0, (params.beta - rssi) / (10.0 * params.alpha));
}

PathLossParams fit_params(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("fit_params: need at least 2 pairs");

    // Linear regression of rssi on x = log10(d): rssi = m*x + b with
    // m = -10*alpha, b = beta.
    double sx = 0.0, sy = 0.0;
    for (const auto& [d, rssi] : pairs) {
        if (d <= 0.0) throw std::domain_error("fit_params: distance must be > 0");
        sx += std::log10(d);
        sy += rssi;
    }
    const double n = static_cast<double>(pairs.size());
    const double mx = sx / n, my = sy / n;

    double sxx = 0.0, sxy = 0.0;
    for (const auto& [d, rssi] : pairs) {
        const double dx = std::log10(d) - mx;
        sxx += dx * dx;
        sxy += dx * (rssi - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_params: all distances equal, system singular");

    const double m = sxy / sxx;
    PathLossParams out;
    out.alpha = -m / 10.0;
    out.beta = my - m * mx;
    out.d0 = 1.0;
    return out;
}

double simulate_rssi(double true_distance, const PathLossParams& params,
                     const NoiseSpec& noise, RngStream& rng) {
    return expected_rssi(params, true_distance) + rng.gaussian(noise.rssi_std);
}

double range_noise_std(const PathLossParams& params, double d, double rssi_std) {
    if (d <= 0.0) throw std::domain_error("range_noise_std: distance must be > 0");
    return d * std::log(10.0) / (10.0 * params.alpha) * rssi_std;
}

double lower_median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("lower_median: empty input");
    const std::size_t k = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    return values[k];
}

std::map<std::string, double> aggregate_medians(const std::vector<RssiSample>& samples) {
    std::map<std::string, std::vector<double>> by_beacon;
    for (const auto& s : samples) by_beacon[s.beacon_id].push_back(s.value);

    std::map<std::string, double> medians;
    for (auto& [id, vals] : by_beacon) medians[id] = lower_median(std::move(vals));
    return medians;
}

}  // namespace lidaus
