#ifndef LIDAUS_USLAM_HPP
#define LIDAUS_USLAM_HPP

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lidaus/geometry.hpp"
#include "lidaus/rng.hpp"
#include "lidaus/signal_model.hpp"

namespace lidaus {

// One simulation step's motion; the vehicle moves along one axis at a time.
struct MotionCommand {
    double dx = 0.0;
    double dy = 0.0;
    double dz = 0.0;

    bool axis_aligned() const {
        return (dx != 0.0) + (dy != 0.0) + (dz != 0.0) <= 1;
    }
};

// Scalar Kalman filter over the vehicle height.
struct HeightFilter {
    double mean_z = 0.0;
    double var_z = 1.0;
};

HeightFilter height_predict(HeightFilter kf, double dz, double motion_std_z);
// Rejects (returns unchanged) the degenerate exact-on-exact case
// var_z == 0 with sensor_std == 0.
HeightFilter height_update(HeightFilter kf, double h, double sensor_std);

// Per-beacon 3D Gaussian carried inside each particle.
struct BeaconEstimate {
    Eigen::Vector3d mu = Eigen::Vector3d::Zero();
    Eigen::Matrix3d sigma = Eigen::Matrix3d::Identity();
};

struct Particle {
    double x = 0.0;
    double y = 0.0;
    std::map<std::string, BeaconEstimate> beacons;
    double weight = 1.0;
};

// Replayable log unit: everything observed at one step.
struct ObservationRecord {
    int step_index = 0;
    MotionCommand motion;
    double height_reading = 0.0;
    std::map<std::string, double> rssi_medians;  // beacon id -> dBm
    Vec3 pose_estimate_at_record;
};

struct RelativePosition {
    double r = 0.0;      // m
    double phi = 0.0;    // azimuth, (-pi, pi]
    double gamma = 0.0;  // elevation, [-pi/2, pi/2]
};

RelativePosition relative_position(const Vec3& pose, const Eigen::Vector3d& beacon_mu);

// Range observation derived from one rssi median.
struct RangeObs {
    double r = 0.0;
    double r_std = 0.0;
};

void motion_sample(double& x, double& y, const MotionCommand& u, double motion_std_xy,
                   RngStream& rng);

// Range-only EKF measurement update. Degenerate geometry (predicted range
// under 1e-6 m) skips the update and sets the flag when given.
BeaconEstimate ekf_update(const BeaconEstimate& est, const Vec3& uav_pose, double r_obs,
                          double r_std, bool* degenerate = nullptr);

// Product of anchor range likelihoods under each anchor's innovation
// distribution. Only anchors weight the pose; no anchors means weight 1.
double importance_weight(const Particle& particle, double uav_z,
                         const std::map<std::string, RangeObs>& anchor_obs);

// Low-variance systematic resampling with a single uniform draw. Returns
// false (and resets to uniform) when all weights are zero.
bool resample(std::vector<Particle>& particles, RngStream& rng);

struct BufferedRangeObs {
    Vec3 pose;
    double range = 0.0;
};

// Least-squares trilateration from buffered observations; falls back to the
// last pose with an uninformative covariance when the poses are collinear.
BeaconEstimate initialize_beacon(const std::vector<BufferedRangeObs>& buffered,
                                 double space_height);

struct SlamConfig {
    int particle_count = 100;
    NoiseSpec noise;
    PathLossParams default_params;
    std::map<std::string, PathLossParams> beacon_params;  // overrides
    double space_height = 3.0;
    double resample_fraction = 0.5;  // resample when ESS < fraction * L
    double r_std_floor = 1e-6;
};

struct SlamStats {
    int resamples = 0;
    int degenerate_updates = 0;
    int weight_resets = 0;
};

// The filter stack: height KF + planar particle filter with one range EKF
// per beacon per particle. Weighting uses anchors only; targets are
// initialized from a short trilateration buffer.
class SlamFilter {
public:
    SlamFilter(const SlamConfig& cfg, std::uint64_t seed);

    // Deploys an anchor believed to sit below the vehicle: each particle
    // starts it at its own pose at ground level.
    void add_anchor(const std::string& id, double ground_z);

    void step(const ObservationRecord& record);

    Vec3 pose_estimate() const;
    bool has_estimate(const std::string& beacon_id) const;
    BeaconEstimate beacon_estimate(const std::string& beacon_id) const;
    std::map<std::string, BeaconEstimate> all_estimates() const;
    std::vector<std::string> estimated_beacons() const;

    const HeightFilter& height() const { return height_; }
    const std::vector<Particle>& particles() const { return particles_; }
    const std::set<std::string>& anchors() const { return anchor_ids_; }
    const SlamStats& stats() const { return stats_; }
    const SlamConfig& config() const { return config_; }

    const PathLossParams& params_for(const std::string& beacon_id) const;

private:
    RangeObs range_from_rssi(const std::string& id, double rssi) const;

    SlamConfig config_;
    HeightFilter height_;
    std::vector<Particle> particles_;
    std::vector<RngStream> particle_streams_;
    RngStream resample_stream_;
    std::set<std::string> anchor_ids_;
    std::map<std::string, std::vector<BufferedRangeObs>> pending_;
    SlamStats stats_;
};

struct ReplayResult {
    BeaconEstimate estimate;
    bool empty_cluster = false;
    int updates_applied = 0;
};

// Offline re-run of one beacon's EKF over the log, applying its rssi only
// at the listed steps. Poses are frozen to the live run's estimates.
ReplayResult replay(const std::vector<ObservationRecord>& log, const std::string& beacon_id,
                    const std::set<int>& cluster_steps, const BeaconEstimate& init,
                    const PathLossParams& params, double rssi_std,
                    double r_std_floor = 1e-6);

}  // namespace lidaus

#endif
