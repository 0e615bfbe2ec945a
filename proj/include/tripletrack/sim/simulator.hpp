#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tripletrack/nn/param.hpp"
#include "tripletrack/sim/types.hpp"

namespace tripletrack::sim {

struct MotionConfig {
    double speed_mean = 0.01;            // per-frame displacement magnitude
    double speed_spread = 0.005;         // initial speed ~ U[mean - spread, mean + spread]
    double accel_noise = 0.0004;         // Gaussian acceleration std per axis
    double curvature_amplitude = 0.04;   // peak turn rate, radians per frame
    double curvature_period = 60.0;      // frames per sinusoid cycle
    double max_speed = 0.03;

    void validate() const;
};

struct SceneConfig {
    int identities = 20;
    int frames = 200;
    int descriptor_dim = 16;
    int min_track_length = 40;

    double appearance_noise = 0.25;
    /// Identities share `appearance_clusters` prototype centers (0: every prototype independent).
    /// A prototype is sqrt(1 - s^2) * center + s * N(0, I) with s = cluster_spread.
    int appearance_clusters = 5;
    double cluster_spread = 0.55;

    MotionConfig motion;
    double position_noise = 0.001;

    double drop_rate = 0.05;
    double false_positive_rate = 0.3;
    double occlusion_rate = 0.01;
    int occlusion_duration = 8;

    BoxSize box_min{0.025, 0.11};
    BoxSize box_max{0.035, 0.16};

    std::uint64_t seed = 1;
    /// Seeds the identity prototypes only. Scenes sharing it show the same population under
    /// different trajectories and noise.
    std::uint64_t appearance_seed = 1;

    /// Throws std::invalid_argument with the offending field name.
    void validate() const;
};

struct Scene {
    SceneConfig config;
    std::vector<Trajectory> trajectories;            // ground truth, one per identity
    std::vector<std::vector<bool>> visible;          // per trajectory, per frame of its lifespan
    std::vector<std::vector<double>> prototypes;     // per identity appearance prototype
    std::vector<Detection> detections;               // sorted by frame, stable within a frame

    int true_detection_count() const;
};

/// Deterministic trajectory from an explicit initial state: constant velocity, Gaussian
/// acceleration, sinusoidal turn rate (phase `curvature_phase`), reflecting boundaries.
Trajectory sample_trajectory(const MotionConfig& motion, Position start, Velocity velocity, int length, Rng& rng,
                             double curvature_phase = 0.0);

/// Trajectory with a random start inside the frame and random heading/speed.
Trajectory sample_trajectory(const SceneConfig& config, int length, Rng& rng);

/// Groups of `group_size` trajectories of `length` frames, all starting at frame 1 with start
/// positions within `group_radius` of a shared random center. Identities are sequential.
std::vector<std::vector<Trajectory>> sample_trajectory_groups(const SceneConfig& config, int groups, int group_size,
                                                              int length, double group_radius, Rng& rng);

/// Ground truth and detection stream; a pure function of `config` (including its seed).
Scene generate_scene(const SceneConfig& config);

/// Adds N(0, sigma^2) jitter to every position, clamped to the frame.
void jitter_positions(Trajectory& trajectory, double sigma, Rng& rng);

}  // namespace tripletrack::sim
