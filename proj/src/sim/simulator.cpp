#include "tripletrack/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tripletrack::sim {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

bool is_rate(double r) { return r >= 0.0 && r <= 1.0; }

// Mirrors a coordinate back into [-0.5, 0.5]; returns true when a reflection happened.
bool reflect(double& coord) {
    if (coord > kCoordMax) {
        coord = 2.0 * kCoordMax - coord;
        return true;
    }
    if (coord < kCoordMin) {
        coord = 2.0 * kCoordMin - coord;
        return true;
    }
    return false;
}

double clamp_coord(double v) { return std::clamp(v, kCoordMin, kCoordMax); }

}  // namespace

void MotionConfig::validate() const {
    require(speed_mean >= 0.0, "motion.speed_mean must be >= 0");
    require(speed_spread >= 0.0 && speed_spread <= speed_mean, "motion.speed_spread must lie in [0, speed_mean]");
    require(accel_noise >= 0.0, "motion.accel_noise must be >= 0");
    require(curvature_amplitude >= 0.0, "motion.curvature_amplitude must be >= 0");
    require(curvature_period > 0.0, "motion.curvature_period must be > 0");
    require(max_speed > 0.0 && max_speed < 0.5, "motion.max_speed must lie in (0, 0.5)");
    require(speed_mean + speed_spread <= max_speed, "motion.speed_mean + speed_spread must not exceed max_speed");
}

void SceneConfig::validate() const {
    require(identities > 0, "scene.identities must be positive");
    require(frames >= 2, "scene.frames must be >= 2");
    require(descriptor_dim > 0, "scene.descriptor_dim must be positive");
    require(min_track_length >= 2 && min_track_length <= frames, "scene.min_track_length must lie in [2, frames]");
    require(appearance_noise >= 0.0, "scene.appearance_noise must be >= 0");
    require(appearance_clusters >= 0, "scene.appearance_clusters must be >= 0");
    require(cluster_spread >= 0.0 && cluster_spread <= 1.0, "scene.cluster_spread must lie in [0, 1]");
    require(position_noise >= 0.0, "scene.position_noise must be >= 0");
    require(is_rate(drop_rate), "scene.drop_rate must lie in [0, 1]");
    require(is_rate(false_positive_rate), "scene.false_positive_rate must lie in [0, 1]");
    require(is_rate(occlusion_rate), "scene.occlusion_rate must lie in [0, 1]");
    require(occlusion_duration > 0, "scene.occlusion_duration must be positive");
    require(box_min.w > 0.0 && box_min.h > 0.0 && box_max.w >= box_min.w && box_max.h >= box_min.h &&
                box_max.w < 1.0 && box_max.h < 1.0,
            "scene box bounds must satisfy 0 < min <= max < 1");
    motion.validate();
}

int Scene::true_detection_count() const {
    return static_cast<int>(std::count_if(detections.begin(), detections.end(),
                                          [](const Detection& d) { return d.truth_id.has_value(); }));
}

Trajectory sample_trajectory(const MotionConfig& motion, Position start, Velocity velocity, int length, Rng& rng,
                             double curvature_phase) {
    if (length < 2) throw std::invalid_argument("sample_trajectory: length must be >= 2");
    std::normal_distribution<double> accel(0.0, 1.0);
    Trajectory traj;
    traj.positions.reserve(static_cast<std::size_t>(length));
    Position p{clamp_coord(start.x), clamp_coord(start.y)};
    Velocity v = velocity;
    traj.positions.push_back(p);
    const double omega = 2.0 * std::numbers::pi / motion.curvature_period;
    for (int k = 1; k < length; ++k) {
        p.x += v.x;
        p.y += v.y;
        if (reflect(p.x)) v.x = -v.x;
        if (reflect(p.y)) v.y = -v.y;
        traj.positions.push_back(p);

        const double turn = motion.curvature_amplitude * std::sin(omega * k + curvature_phase);
        const double c = std::cos(turn), s = std::sin(turn);
        Velocity next{c * v.x - s * v.y, s * v.x + c * v.y};
        if (motion.accel_noise > 0.0) {
            next.x += motion.accel_noise * accel(rng);
            next.y += motion.accel_noise * accel(rng);
        }
        const double speed = std::hypot(next.x, next.y);
        if (speed > motion.max_speed) {
            next.x *= motion.max_speed / speed;
            next.y *= motion.max_speed / speed;
        }
        v = next;
    }
    return traj;
}

namespace {

Trajectory random_trajectory(const SceneConfig& config, Position start, int length, Rng& rng) {
    const auto& m = config.motion;
    std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> speed(m.speed_mean - m.speed_spread, m.speed_mean + m.speed_spread);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double angle = heading(rng);
    const double s = speed(rng);
    const double phase = heading(rng);
    std::uniform_real_distribution<double> bw(config.box_min.w, config.box_max.w);
    const double width = bw(rng);
    const double aspect = (config.box_min.h / config.box_min.w) +
                          unit(rng) * (config.box_max.h / config.box_max.w - config.box_min.h / config.box_min.w);
    Trajectory traj = sample_trajectory(m, start, {s * std::cos(angle), s * std::sin(angle)}, length, rng, phase);
    traj.box = {width, std::clamp(width * aspect, config.box_min.h, config.box_max.h)};
    return traj;
}

}  // namespace

Trajectory sample_trajectory(const SceneConfig& config, int length, Rng& rng) {
    std::uniform_real_distribution<double> coord(-0.45, 0.45);
    const Position start{coord(rng), coord(rng)};
    return random_trajectory(config, start, length, rng);
}

std::vector<std::vector<Trajectory>> sample_trajectory_groups(const SceneConfig& config, int groups, int group_size,
                                                              int length, double group_radius, Rng& rng) {
    if (groups <= 0 || group_size <= 0) throw std::invalid_argument("sample_trajectory_groups: counts must be positive");
    if (!(group_radius >= 0.0 && group_radius < 0.45)) {
        throw std::invalid_argument("sample_trajectory_groups: group_radius must lie in [0, 0.45)");
    }
    std::vector<std::vector<Trajectory>> out(static_cast<std::size_t>(groups));
    std::uniform_real_distribution<double> coord(-0.45 + group_radius, 0.45 - group_radius);
    std::uniform_real_distribution<double> offset(-group_radius, group_radius);
    int identity = 0;
    for (auto& group : out) {
        const Position center{coord(rng), coord(rng)};
        for (int k = 0; k < group_size; ++k) {
            const Position start{center.x + offset(rng), center.y + offset(rng)};
            Trajectory t = random_trajectory(config, start, length, rng);
            t.identity = identity++;
            t.start_frame = 1;
            group.push_back(std::move(t));
        }
    }
    return out;
}

void jitter_positions(Trajectory& trajectory, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& p : trajectory.positions) {
        p.x = clamp_coord(p.x + noise(rng));
        p.y = clamp_coord(p.y + noise(rng));
    }
}

Scene generate_scene(const SceneConfig& config) {
    config.validate();
    Rng rng(config.seed);
    Scene scene;
    scene.config = config;
    const auto dim = static_cast<std::size_t>(config.descriptor_dim);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Rng appearance_rng(config.appearance_seed);
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(config.appearance_clusters));
    for (auto& c : centers) {
        c.resize(dim);
        for (auto& v : c) v = gauss(appearance_rng);
    }
    for (int id = 0; id < config.identities; ++id) {
        std::vector<double> proto(dim);
        if (centers.empty()) {
            for (auto& v : proto) v = gauss(appearance_rng);
        } else {
            // Mixing keeps each prototype marginally N(0, I) while correlating cluster members.
            const auto& c = centers[static_cast<std::size_t>(id % config.appearance_clusters)];
            const double shared = std::sqrt(1.0 - config.cluster_spread * config.cluster_spread);
            for (std::size_t k = 0; k < dim; ++k) {
                proto[k] = shared * c[k] + config.cluster_spread * gauss(appearance_rng);
            }
        }
        scene.prototypes.push_back(std::move(proto));
    }
    for (int id = 0; id < config.identities; ++id) {
        std::uniform_int_distribution<int> start_dist(1, config.frames - config.min_track_length + 1);
        const int start = start_dist(rng);
        std::uniform_int_distribution<int> len_dist(config.min_track_length, config.frames - start + 1);
        Trajectory traj = sample_trajectory(config, len_dist(rng), rng);
        traj.identity = id;
        traj.start_frame = start;
        scene.trajectories.push_back(std::move(traj));
    }

    // Per frame: true detections (identity order), then at most one false positive.
    std::vector<int> occlusion_left(static_cast<std::size_t>(config.identities), 0);
    for (const auto& t : scene.trajectories) scene.visible.emplace_back(static_cast<std::size_t>(t.length()), true);

    auto make_descriptor = [&](const std::vector<double>* proto, double sigma) {
        std::vector<double> d(dim);
        for (std::size_t k = 0; k < dim; ++k) d[k] = (proto ? (*proto)[k] : 0.0) + sigma * gauss(rng);
        return d;
    };

    for (int frame = 1; frame <= config.frames; ++frame) {
        for (std::size_t i = 0; i < scene.trajectories.size(); ++i) {
            const auto& traj = scene.trajectories[i];
            if (!traj.covers(frame)) continue;
            const auto offset = static_cast<std::size_t>(frame - traj.start_frame);

            bool partial = false;
            if (occlusion_left[i] == 0 && unit(rng) < config.occlusion_rate) {
                occlusion_left[i] = config.occlusion_duration;
            }
            if (occlusion_left[i] > 0) {
                const int remaining = occlusion_left[i]--;
                const bool edge = remaining == config.occlusion_duration || remaining == 1;
                if (!edge) {
                    scene.visible[i][offset] = false;
                    continue;
                }
                partial = true;
            }
            const bool dropped = unit(rng) < config.drop_rate;
            if (dropped) continue;

            Detection det;
            det.frame = frame;
            const Position truth = traj.at(frame);
            det.position = {clamp_coord(truth.x + config.position_noise * gauss(rng)),
                            clamp_coord(truth.y + config.position_noise * gauss(rng))};
            det.box = traj.box;
            det.confidence = 0.5 + 0.5 * unit(rng);
            const double sigma = partial ? 3.0 * config.appearance_noise : config.appearance_noise;
            det.descriptor = make_descriptor(&scene.prototypes[i], sigma);
            det.truth_id = traj.identity;
            scene.detections.push_back(std::move(det));
        }
        if (unit(rng) < config.false_positive_rate) {
            Detection fp;
            fp.frame = frame;
            std::uniform_real_distribution<double> coord(-0.45, 0.45);
            fp.position = {coord(rng), coord(rng)};
            std::uniform_real_distribution<double> bw(config.box_min.w, config.box_max.w);
            std::uniform_real_distribution<double> bh(config.box_min.h, config.box_max.h);
            fp.box = {bw(rng), bh(rng)};
            fp.confidence = 0.3 + 0.5 * unit(rng);
            fp.descriptor = make_descriptor(nullptr, 1.0);
            scene.detections.push_back(std::move(fp));
        }
    }
    return scene;
}

}  // namespace tripletrack::sim
