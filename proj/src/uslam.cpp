#include "lidaus/uslam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lidaus {

HeightFilter height_predict(HeightFilter kf, double dz, double motion_std_z) {
    kf.mean_z += dz;
    kf.var_z += motion_std_z * motion_std_z;
    return kf;
}

HeightFilter height_update(HeightFilter kf, double h, double sensor_std) {
    const double r = sensor_std * sensor_std;
    if (kf.var_z == 0.0 && r == 0.0) return kf;  // degenerate, reject the update
    const double k = kf.var_z / (kf.var_z + r);
    kf.mean_z += k * (h - kf.mean_z);
    kf.var_z *= (1.0 - k);
    return kf;
}

RelativePosition relative_position(const Vec3& pose, const Eigen::Vector3d& beacon_mu) {
    const double dx = beacon_mu.x() - pose.x;
    const double dy = beacon_mu.y() - pose.y;
    const double dz = beacon_mu.z() - pose.z;
    RelativePosition rel;
    rel.r = std::sqrt(dx * dx + dy * dy + dz * dz);
    rel.phi = std::atan2(dy, dx);
    rel.gamma = std::atan2(dz, std::sqrt(dx * dx + dy * dy));
    return rel;
}

void motion_sample(double& x, double& y, const MotionCommand& u, double motion_std_xy,
                   RngStream& rng) {
    x += u.dx + rng.gaussian(motion_std_xy);
    y += u.dy + rng.gaussian(motion_std_xy);
}

BeaconEstimate ekf_update(const BeaconEstimate& est, const Vec3& uav_pose, double r_obs,
                          double r_std, bool* degenerate) {
    if (degenerate) *degenerate = false;
    const Eigen::Vector3d pose(uav_pose.x, uav_pose.y, uav_pose.z);
    const Eigen::Vector3d diff = est.mu - pose;
    const double ghat = diff.norm();
    if (ghat < 1e-6) {
        if (degenerate) *degenerate = true;
        return est;
    }

    const Eigen::RowVector3d jac = diff.transpose() / ghat;
    const double innovation_var = (jac * est.sigma * jac.transpose())(0, 0) + r_std * r_std;
    if (innovation_var < 1e-18) {
        if (degenerate) *degenerate = true;
        return est;
    }

    const Eigen::Vector3d gain = est.sigma * jac.transpose() / innovation_var;
    BeaconEstimate out;
    out.mu = est.mu + gain * (r_obs - ghat);
    out.sigma = (Eigen::Matrix3d::Identity() - gain * jac) * est.sigma;
    out.sigma = 0.5 * (out.sigma + out.sigma.transpose().eval());
    return out;
}

double importance_weight(const Particle& particle, double uav_z,
                         const std::map<std::string, RangeObs>& anchor_obs) {
    double weight = 1.0;
    for (const auto& [id, obs] : anchor_obs) {
        auto it = particle.beacons.find(id);
        if (it == particle.beacons.end())
            throw std::invalid_argument("importance_weight: particle lacks estimate for " + id);
        const BeaconEstimate& est = it->second;
        const Eigen::Vector3d pose(particle.x, particle.y, uav_z);
        const Eigen::Vector3d diff = est.mu - pose;
        const double ghat = diff.norm();
        if (ghat < 1e-6) continue;
        const Eigen::RowVector3d jac = diff.transpose() / ghat;
        const double q = (jac * est.sigma * jac.transpose())(0, 0) + obs.r_std * obs.r_std;
        if (q <= 0.0) continue;
        const double err = obs.r - ghat;
        weight *= std::exp(-0.5 * err * err / q) / std::sqrt(2.0 * M_PI * q);
    }
    return weight;
}

bool resample(std::vector<Particle>& particles, RngStream& rng) {
    const std::size_t count = particles.size();
    double total = 0.0;
    for (const auto& p : particles) total += p.weight;
    if (total <= 0.0) {
        for (auto& p : particles) p.weight = 1.0 / static_cast<double>(count);
        return false;
    }

    const double step = total / static_cast<double>(count);
    const double start = rng.uniform() * step;
    std::vector<Particle> out;
    out.reserve(count);
    double cumulative = particles[0].weight;
    std::size_t index = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double pointer = start + static_cast<double>(i) * step;
        while (cumulative < pointer && index + 1 < count) {
            ++index;
            cumulative += particles[index].weight;
        }
        out.push_back(particles[index]);
        out.back().weight = 1.0 / static_cast<double>(count);
    }
    particles = std::move(out);
    return true;
}

BeaconEstimate initialize_beacon(const std::vector<BufferedRangeObs>& buffered,
                                 double space_height) {
    if (buffered.size() < 3)
        throw std::invalid_argument("initialize_beacon: need at least 3 observations");

    double mean_range = 0.0;
    for (const auto& o : buffered) mean_range += o.range;
    mean_range /= static_cast<double>(buffered.size());

    // Collinearity of the pose footprint decides between trilateration and
    // the vague fallback centered at the latest pose.
    Eigen::MatrixXd xy(buffered.size(), 2);
    for (std::size_t i = 0; i < buffered.size(); ++i)
        xy.row(static_cast<Eigen::Index>(i)) << buffered[i].pose.x, buffered[i].pose.y;
    const Eigen::RowVector2d xy_mean = xy.colwise().mean();
    xy.rowwise() -= xy_mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> xy_svd(xy);
    const bool collinear = xy_svd.singularValues()(1) < 1e-9;

    if (collinear) {
        BeaconEstimate fallback;
        fallback.mu = Eigen::Vector3d(buffered.back().pose.x, buffered.back().pose.y,
                                      buffered.back().pose.z);
        fallback.sigma = Eigen::Matrix3d::Identity() * (mean_range * mean_range);
        return fallback;
    }

    // Linear initialization: difference of squared-range equations against
    // the first pose.
    const Vec3 p0 = buffered[0].pose;
    const double r0 = buffered[0].range;
    const double n0 = p0.x * p0.x + p0.y * p0.y + p0.z * p0.z;
    Eigen::MatrixXd a(buffered.size() - 1, 3);
    Eigen::VectorXd b(buffered.size() - 1);
    for (std::size_t i = 1; i < buffered.size(); ++i) {
        const Vec3 p = buffered[i].pose;
        const double r = buffered[i].range;
        a.row(static_cast<Eigen::Index>(i - 1)) << 2.0 * (p.x - p0.x), 2.0 * (p.y - p0.y),
            2.0 * (p.z - p0.z);
        b(static_cast<Eigen::Index>(i - 1)) =
            (p.x * p.x + p.y * p.y + p.z * p.z) - n0 + r0 * r0 - r * r;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-9);
    Eigen::Vector3d x = svd.solve(b);

    // Gauss-Newton refinement on the range residuals.
    for (int iter = 0; iter < 25; ++iter) {
        Eigen::MatrixXd jac(buffered.size(), 3);
        Eigen::VectorXd res(buffered.size());
        for (std::size_t i = 0; i < buffered.size(); ++i) {
            const Eigen::Vector3d pose(buffered[i].pose.x, buffered[i].pose.y, buffered[i].pose.z);
            const Eigen::Vector3d diff = x - pose;
            const double dist = std::max(diff.norm(), 1e-9);
            jac.row(static_cast<Eigen::Index>(i)) = diff.transpose() / dist;
            res(static_cast<Eigen::Index>(i)) = dist - buffered[i].range;
        }
        const Eigen::Matrix3d h = jac.transpose() * jac + 1e-9 * Eigen::Matrix3d::Identity();
        const Eigen::Vector3d delta = h.ldlt().solve(-jac.transpose() * res);
        x += delta;
        if (delta.norm() < 1e-12) break;
    }
    x.z() = std::max(0.0, std::min(space_height, x.z()));

    double rss = 0.0;
    for (const auto& o : buffered) {
        const Eigen::Vector3d pose(o.pose.x, o.pose.y, o.pose.z);
        const double e = (x - pose).norm() - o.range;
        rss += e * e;
    }
    const double rms2 = rss / static_cast<double>(buffered.size());

    BeaconEstimate est;
    est.mu = x;
    est.sigma = Eigen::Matrix3d::Identity() * std::max(rms2, 1.0);
    return est;
}

SlamFilter::SlamFilter(const SlamConfig& cfg, std::uint64_t seed)
    : config_(cfg), resample_stream_(seed, "resample") {
    if (cfg.particle_count < 1)
        throw std::invalid_argument("slam: particle_count must be at least 1");
    particles_.assign(static_cast<std::size_t>(cfg.particle_count), Particle{});
    const double w = 1.0 / static_cast<double>(cfg.particle_count);
    particle_streams_.reserve(particles_.size());
    for (std::size_t i = 0; i < particles_.size(); ++i) {
        particles_[i].weight = w;
        particle_streams_.emplace_back(seed, "pf:" + std::to_string(i));
    }
    height_.mean_z = 0.0;
    height_.var_z = 1.0;
}

const PathLossParams& SlamFilter::params_for(const std::string& beacon_id) const {
    auto it = config_.beacon_params.find(beacon_id);
    return it == config_.beacon_params.end() ? config_.default_params : it->second;
}

RangeObs SlamFilter::range_from_rssi(const std::string& id, double rssi) const {
    const PathLossParams& params = params_for(id);
    RangeObs obs;
    obs.r = distance_from_rssi(params, rssi);
    obs.r_std = std::max(range_noise_std(params, obs.r, config_.noise.rssi_std),
                         config_.r_std_floor);
    return obs;
}

void SlamFilter::add_anchor(const std::string& id, double ground_z) {
    anchor_ids_.insert(id);
    const double dxy = std::max(config_.noise.motion_std_xy, 0.01);
    Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
    sigma(0, 0) = dxy * dxy;
    sigma(1, 1) = dxy * dxy;
    sigma(2, 2) = 1e-4;  // the drop lands on the ground; z is effectively known
    for (auto& p : particles_) {
        BeaconEstimate est;
        est.mu = Eigen::Vector3d(p.x, p.y, ground_z);
        est.sigma = sigma;
        p.beacons[id] = est;
    }
}

void SlamFilter::step(const ObservationRecord& record) {
    if (!record.motion.axis_aligned())
        throw std::invalid_argument("slam: motion command must be axis-aligned");

    // Step 1: height.
    height_ = height_predict(height_, record.motion.dz, config_.noise.motion_std_z);
    height_ = height_update(height_, record.height_reading, config_.noise.height_sensor_std);
    const double z = height_.mean_z;

    // Ranges for everything observed this step.
    std::map<std::string, RangeObs> ranges;
    std::map<std::string, RangeObs> anchor_ranges;
    for (const auto& [id, rssi] : record.rssi_medians) {
        ranges[id] = range_from_rssi(id, rssi);
        if (anchor_ids_.count(id)) anchor_ranges[id] = ranges[id];
    }

    // Steps 2 and 4: motion sampling, then pose weights against the
    // pre-update anchor estimates.
    for (std::size_t i = 0; i < particles_.size(); ++i) {
        Particle& p = particles_[i];
        motion_sample(p.x, p.y, record.motion, config_.noise.motion_std_xy,
                      particle_streams_[i]);
        if (!anchor_ranges.empty())
            p.weight *= importance_weight(p, z, anchor_ranges);
    }

    double total = 0.0;
    for (const auto& p : particles_) total += p.weight;
    if (total <= 0.0 || !std::isfinite(total)) {
        for (auto& p : particles_) p.weight = 1.0 / static_cast<double>(particles_.size());
        ++stats_.weight_resets;
    } else {
        for (auto& p : particles_) p.weight /= total;
    }

    // Step 3: per-particle EKF update of every observed beacon that already
    // has an estimate.
    for (auto& p : particles_) {
        for (const auto& [id, obs] : ranges) {
            auto it = p.beacons.find(id);
            if (it == p.beacons.end()) continue;
            bool degenerate = false;
            it->second = ekf_update(it->second, {p.x, p.y, z}, obs.r, obs.r_std, &degenerate);
            if (degenerate) ++stats_.degenerate_updates;
        }
    }

    const Vec3 pose = pose_estimate();

    // Targets without an estimate buffer observations until trilateration
    // has enough geometry.
    for (const auto& [id, obs] : ranges) {
        if (anchor_ids_.count(id) || particles_[0].beacons.count(id)) continue;
        auto& buffer = pending_[id];
        buffer.push_back({pose, obs.r});
        int distinct = 1;
        for (std::size_t i = 1; i < buffer.size(); ++i)
            if (buffer[i].pose.x != buffer[0].pose.x || buffer[i].pose.y != buffer[0].pose.y) {
                distinct = 2;
                break;
            }
        if (buffer.size() >= 3 && distinct >= 2) {
            const BeaconEstimate est = initialize_beacon(buffer, config_.space_height);
            for (auto& p : particles_) p.beacons[id] = est;
            pending_.erase(id);
        }
    }

    // Step 5: resample when the effective sample size collapses.
    double sum_sq = 0.0;
    for (const auto& p : particles_) sum_sq += p.weight * p.weight;
    const double ess = 1.0 / sum_sq;
    if (ess < config_.resample_fraction * static_cast<double>(particles_.size())) {
        resample(particles_, resample_stream_);
        ++stats_.resamples;
    }
}

Vec3 SlamFilter::pose_estimate() const {
    double x = 0.0, y = 0.0;
    for (const auto& p : particles_) {
        x += p.weight * p.x;
        y += p.weight * p.y;
    }
    return {x, y, height_.mean_z};
}

bool SlamFilter::has_estimate(const std::string& beacon_id) const {
    return particles_[0].beacons.count(beacon_id) > 0;
}

BeaconEstimate SlamFilter::beacon_estimate(const std::string& beacon_id) const {
    if (!has_estimate(beacon_id))
        throw std::invalid_argument("slam: no estimate for beacon " + beacon_id);
    BeaconEstimate out;
    out.mu = Eigen::Vector3d::Zero();
    out.sigma = Eigen::Matrix3d::Zero();
    for (const auto& p : particles_) out.mu += p.weight * p.beacons.at(beacon_id).mu;
    for (const auto& p : particles_) {
        const BeaconEstimate& est = p.beacons.at(beacon_id);
        const Eigen::Vector3d d = est.mu - out.mu;
        out.sigma += p.weight * (est.sigma + d * d.transpose());
    }
    return out;
}

std::map<std::string, BeaconEstimate> SlamFilter::all_estimates() const {
    std::map<std::string, BeaconEstimate> out;
    for (const auto& [id, est] : particles_[0].beacons) out[id] = beacon_estimate(id);
    return out;
}

std::vector<std::string> SlamFilter::estimated_beacons() const {
    std::vector<std::string> out;
    for (const auto& [id, est] : particles_[0].beacons) out.push_back(id);
    return out;
}

ReplayResult replay(const std::vector<ObservationRecord>& log, const std::string& beacon_id,
                    const std::set<int>& cluster_steps, const BeaconEstimate& init,
                    const PathLossParams& params, double rssi_std, double r_std_floor) {
    ReplayResult result;
    result.estimate = init;
    if (cluster_steps.empty()) {
        result.empty_cluster = true;
        return result;
    }
    for (const auto& record : log) {
        if (!cluster_steps.count(record.step_index)) continue;
        auto it = record.rssi_medians.find(beacon_id);
        if (it == record.rssi_medians.end()) continue;
        const double r = distance_from_rssi(params, it->second);
        const double r_std = std::max(range_noise_std(params, r, rssi_std), r_std_floor);
        result.estimate = ekf_update(result.estimate, record.pose_estimate_at_record, r, r_std);
        ++result.updates_applied;
    }
    return result;
}

}  // namespace lidaus
