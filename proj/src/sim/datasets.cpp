#include "tripletrack/sim/datasets.hpp"

#include <algorithm>
#include <stdexcept>

namespace tripletrack::sim {

std::vector<Position> padded_window(std::span<const Position> history, int length) {
    if (length <= 0) throw std::invalid_argument("padded_window: length must be positive");
    if (history.empty()) throw std::invalid_argument("padded_window: empty history");
    const auto n = static_cast<std::size_t>(length);
    std::vector<Position> out;
    out.reserve(n);
    if (history.size() >= n) {
        out.assign(history.end() - static_cast<std::ptrdiff_t>(n), history.end());
    } else {
        out.assign(n - history.size(), history.front());
        out.insert(out.end(), history.begin(), history.end());
    }
    return out;
}

MotionSample window_at(const Trajectory& trajectory, int frame, int length) {
    if (!trajectory.covers(frame) || !trajectory.covers(frame + 1)) {
        throw std::out_of_range("window_at: frame " + std::to_string(frame) + " has no successor in trajectory " +
                                std::to_string(trajectory.identity));
    }
    const auto end = static_cast<std::size_t>(frame - trajectory.start_frame + 1);
    std::span<const Position> history(trajectory.positions.data(), end);
    return {padded_window(history, length), trajectory.at(frame + 1)};
}

std::vector<MotionPair> make_positive_pairs(std::span<const Trajectory> trajectories, int window) {
    if (window <= 0) throw std::invalid_argument("make_positive_pairs: window must be positive");
    std::vector<MotionPair> pairs;
    for (const auto& traj : trajectories) {
        for (int t = traj.start_frame + window - 1; t < traj.end_frame(); ++t) {
            pairs.push_back({window_at(traj, t, window), 1});
        }
    }
    return pairs;
}

std::vector<MotionPair> make_motion_pairs(std::span<const Trajectory> trajectories, int window, Rng& rng) {
    if (trajectories.size() < 2) {
        throw std::invalid_argument("make_motion_pairs: need at least two trajectories to form negatives");
    }
    std::vector<MotionPair> pairs;
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& traj = trajectories[i];
        for (int t = traj.start_frame + window - 1; t < traj.end_frame(); ++t) {
            MotionSample positive = window_at(traj, t, window);
            others.clear();
            for (std::size_t j = 0; j < trajectories.size(); ++j) {
                if (j != i && trajectories[j].covers(t + 1)) others.push_back(j);
            }
            Position negative_candidate;
            if (!others.empty()) {
                std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
                negative_candidate = trajectories[others[pick(rng)]].at(t + 1);
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, trajectories.size() - 2);
                std::size_t j = pick(rng);
                if (j >= i) ++j;
                const auto& other = trajectories[j];
                std::uniform_int_distribution<std::size_t> pos(0, other.positions.size() - 1);
                negative_candidate = other.positions[pos(rng)];
            }
            MotionSample negative{positive.window, negative_candidate};
            pairs.push_back({std::move(positive), 1});
            pairs.push_back({std::move(negative), 0});
        }
    }
    return pairs;
}

TripletSampler::TripletSampler(const Scene& scene, int window) : scene_(&scene), window_(window) {
    if (window <= 0) throw std::invalid_argument("TripletSampler: window must be positive");
    views_.resize(scene.trajectories.size());
    for (std::size_t i = 0; i < views_.size(); ++i) {
        const auto& traj = scene.trajectories[i];
        views_[i].traj = &traj;
        views_[i].observed = traj.positions;
        views_[i].detection.assign(traj.positions.size(), -1);
    }
    for (std::size_t d = 0; d < scene.detections.size(); ++d) {
        const auto& det = scene.detections[d];
        if (!det.truth_id) continue;
        auto& v = views_[static_cast<std::size_t>(*det.truth_id)];
        const auto off = static_cast<std::size_t>(det.frame - v.traj->start_frame);
        v.observed[off] = det.position;
        v.detection[off] = static_cast<int>(d);
    }
    for (std::size_t i = 0; i < views_.size(); ++i) {
        auto& v = views_[i];
        for (int t = v.traj->start_frame + window - 1; t < v.traj->end_frame(); ++t) {
            const auto lo = static_cast<std::size_t>(t - window + 1 - v.traj->start_frame);
            const auto hi = static_cast<std::size_t>(t + 1 - v.traj->start_frame);
            bool has_descriptor = false;
            for (auto k = lo; k <= hi; ++k) has_descriptor = has_descriptor || v.detection[k] >= 0;
            if (has_descriptor) v.usable.push_back(t);
        }
        if (v.usable.size() >= 2) {
            eligible_.push_back(i);
        } else {
            skipped_.push_back(v.traj->identity);
        }
    }
}

TripletBundle TripletSampler::bundle(const IdentityView& v, int frame, Rng& rng) const {
    const auto start = v.traj->start_frame;
    const auto end = static_cast<std::size_t>(frame - start + 1);
    const auto lo = static_cast<std::size_t>(frame - window_ + 1 - start);
    std::vector<int> candidates;
    for (auto k = lo; k <= end; ++k) {
        if (v.detection[k] >= 0) candidates.push_back(v.detection[k]);
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const auto& descriptor = scene_->detections[static_cast<std::size_t>(candidates[pick(rng)])].descriptor;
    MotionSample motion{padded_window(std::span<const Position>(v.observed.data(), end), window_), v.observed[end]};
    return {descriptor, std::move(motion), v.traj->identity, frame};
}

std::vector<TripletInstance> TripletSampler::sample(const TripletBatchSpec& spec, Rng& rng) const {
    if (spec.identities_per_batch < 1 || spec.instances_per_identity < 1) {
        throw std::invalid_argument("triplet batch spec entries must be positive");
    }
    if (eligible_.size() < static_cast<std::size_t>(spec.identities_per_batch) + 1) {
        throw std::invalid_argument("make_triplets: need at least " + std::to_string(spec.identities_per_batch + 1) +
                                    " identities with two usable timestamps, found " +
                                    std::to_string(eligible_.size()));
    }
    auto pick_frame = [&](const IdentityView& v) {
        std::uniform_int_distribution<std::size_t> pick(0, v.usable.size() - 1);
        return v.usable[pick(rng)];
    };

    std::vector<std::size_t> ids = eligible_;
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(static_cast<std::size_t>(spec.identities_per_batch));
    std::vector<TripletInstance> batch;
    batch.reserve(static_cast<std::size_t>(spec.identities_per_batch * spec.instances_per_identity));
    std::vector<std::size_t> live;
    for (auto i : ids) {
        const auto& vi = views_[i];
        for (int n = 0; n < spec.instances_per_identity; ++n) {
            const int t1 = pick_frame(vi);
            int t2 = pick_frame(vi);
            while (t2 == t1) t2 = pick_frame(vi);

            std::uniform_int_distribution<std::size_t> pick_other(0, eligible_.size() - 2);
            std::size_t jj = pick_other(rng);
            if (eligible_[jj] == i) jj = eligible_.size() - 1;
            const auto& vj = views_[eligible_[jj]];
            const int t3 = pick_frame(vj);

            TripletBundle anchor = bundle(vi, t1, rng);
            TripletBundle positive = bundle(vi, t2, rng);
            TripletBundle negative = bundle(vj, t3, rng);
            live.clear();
            for (std::size_t k = 0; k < views_.size(); ++k) {
                if (views_[k].traj->covers(t3 + 1)) live.push_back(k);
            }
            std::uniform_int_distribution<std::size_t> pick_live(0, live.size() - 1);
            const auto& vk = views_[live[pick_live(rng)]];
            negative.motion.candidate = vk.observed[static_cast<std::size_t>(t3 + 1 - vk.traj->start_frame)];

            batch.push_back({std::move(anchor), std::move(positive), std::move(negative)});
        }
    }
    check_triplet_invariants(batch);
    return batch;
}

TripletBatches make_triplets(const Scene& scene, const TripletBatchSpec& spec, int window, Rng& rng) {
    if (spec.batches < 1) throw std::invalid_argument("make_triplets: batches must be positive");
    TripletSampler sampler(scene, window);
    TripletBatches out;
    out.skipped_identities = sampler.skipped_identities();
    for (int b = 0; b < spec.batches; ++b) out.batches.push_back(sampler.sample(spec, rng));
    return out;
}

void check_triplet_invariants(std::span<const TripletInstance> batch) {
    for (const auto& z : batch) {
        if (z.anchor.identity != z.positive.identity) throw std::logic_error("triplet: anchor/positive identity differ");
        if (z.anchor.identity == z.negative.identity) throw std::logic_error("triplet: negative shares anchor identity");
        if (z.anchor.frame == z.positive.frame) throw std::logic_error("triplet: anchor and positive share a timestamp");
    }
}

}  // namespace tripletrack::sim
