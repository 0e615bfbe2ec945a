#include "tripletrack/assoc/affinity.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "tripletrack/eval/box.hpp"
#include "tripletrack/nn/losses.hpp"
#include "tripletrack/sim/datasets.hpp"

namespace tripletrack::assoc {

using nn::Tensor;

namespace {

std::vector<Tensor> window_steps(const std::vector<std::vector<sim::Position>>& windows, int length) {
    std::vector<Tensor> steps(static_cast<std::size_t>(length), Tensor::matrix(windows.size(), 2));
    for (std::size_t r = 0; r < windows.size(); ++r) {
        for (std::size_t t = 0; t < windows[r].size(); ++t) {
            steps[t](r, 0) = windows[r][t].x;
            steps[t](r, 1) = windows[r][t].y;
        }
    }
    return steps;
}

Tensor positions_tensor(const std::vector<sim::Position>& ps) {
    Tensor out = Tensor::matrix(ps.size(), 2);
    for (std::size_t r = 0; r < ps.size(); ++r) {
        out(r, 0) = ps[r].x;
        out(r, 1) = ps[r].y;
    }
    return out;
}

double position_distance(sim::Position a, sim::Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

PairFeatures pair_features(const metric::JointFeatures& joint, std::span<const Track* const> tracks,
                           std::span<const sim::Detection> detections) {
    const std::size_t nt = tracks.size(), nd = detections.size();
    const int n = joint.window();
    const auto dim = static_cast<std::size_t>(joint.id_net.config().descriptor_dim);
    const auto& ch = joint.channels();

    std::vector<std::vector<sim::Position>> track_windows, det_windows;
    std::vector<sim::Position> track_candidates;
    Tensor track_desc = Tensor::matrix(nt, dim);
    for (std::size_t i = 0; i < nt; ++i) {
        const Track& t = *tracks[i];
        if (t.descriptor.size() != dim) throw nn::DimensionError("pair_features: track descriptor length mismatch");
        std::copy(t.descriptor.begin(), t.descriptor.end(), track_desc.row(i).begin());
        const std::span<const sim::Position> hist(t.positions);
        auto own = sim::padded_window(hist, n);
        if (t.state == TrackState::tentative) {
            track_windows.push_back(own);
        } else {
            track_windows.push_back(sim::padded_window(hist.first(hist.size() > 1 ? hist.size() - 1 : 1), n));
        }
        det_windows.push_back(std::move(own));
        track_candidates.push_back(t.last_position());
    }
    Tensor det_desc = Tensor::matrix(nd, dim);
    std::vector<sim::Position> det_positions;
    for (std::size_t j = 0; j < nd; ++j) {
        if (detections[j].descriptor.size() != dim) {
            throw nn::DimensionError("pair_features: detection descriptor length mismatch");
        }
        std::copy(detections[j].descriptor.begin(), detections[j].descriptor.end(), det_desc.row(j).begin());
        det_positions.push_back(detections[j].position);
    }

    Tensor track_app, pair_app, track_mot, pair_mot;
    if (ch.appearance) {
        track_app = joint.id_net.features(track_desc);
        const Tensor det_app = joint.id_net.features(det_desc);
        pair_app = Tensor::matrix(nt * nd, det_app.cols());
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = 0; j < nd; ++j) {
                std::copy(det_app.row(j).begin(), det_app.row(j).end(), pair_app.row(i * nd + j).begin());
            }
        }
    }
    if (ch.motion) {
        const auto& net = joint.motion_net;
        const Tensor own_candidates = net.encode_candidates(positions_tensor(track_candidates));
        track_mot = net.combine(net.encode_windows(window_steps(track_windows, n)), own_candidates);
        const Tensor window_codes = net.encode_windows(window_steps(det_windows, n));
        const Tensor det_candidates = net.encode_candidates(positions_tensor(det_positions));
        const std::size_t h = window_codes.cols();
        Tensor wide_windows = Tensor::matrix(nt * nd, h), wide_candidates = Tensor::matrix(nt * nd, h);
        for (std::size_t i = 0; i < nt; ++i) {
            const bool young = tracks[i]->state == TrackState::tentative;
            for (std::size_t j = 0; j < nd; ++j) {
                std::copy(window_codes.row(i).begin(), window_codes.row(i).end(), wide_windows.row(i * nd + j).begin());
                const auto src = young ? own_candidates.row(i) : det_candidates.row(j);
                std::copy(src.begin(), src.end(), wide_candidates.row(i * nd + j).begin());
            }
        }
        pair_mot = net.combine(wide_windows, wide_candidates);
    }
    return {joint.concat(track_app, track_mot), joint.concat(pair_app, pair_mot)};
}

void EmbeddingGate::validate() const {
    if (!(gate >= 0.0)) throw std::invalid_argument("tracker.gate must be >= 0");
    if (!(young_position_gate >= 0.0)) throw std::invalid_argument("tracker.young_position_gate must be >= 0");
}

namespace {

CostMatrix gated_costs(std::span<const Track* const> tracks, std::span<const sim::Detection> detections,
                       const EmbeddingGate& gate, const std::function<double(std::size_t, std::size_t)>& cost) {
    CostMatrix out(tracks.size(), detections.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const bool young = tracks[i]->state == TrackState::tentative;
        for (std::size_t j = 0; j < detections.size(); ++j) {
            double c = cost(i, j);
            if (!(c <= gate.gate)) {
                out.forbid(i, j);
                continue;
            }
            if (young) {
                const double d = position_distance(tracks[i]->last_position(), detections[j].position);
                if (d > gate.young_position_gate) {
                    out.forbid(i, j);
                    continue;
                }
                c += d;
            }
            out.set(i, j, c);
        }
    }
    return out;
}

}  // namespace

EmbeddingAffinity::EmbeddingAffinity(const metric::MetricNet& net, const EmbeddingGate& gate)
    : net_(&net), gate_(gate) {
    gate.validate();
}

CostMatrix EmbeddingAffinity::costs(std::span<const Track* const> tracks,
                                    std::span<const sim::Detection> detections) const {
    if (tracks.empty() || detections.empty()) return CostMatrix(tracks.size(), detections.size());
    const auto f = pair_features(net_->joint, tracks, detections);
    const Tensor et = net_->embed_features(f.track);
    const Tensor ep = net_->embed_features(f.pair);
    const std::size_t nd = detections.size();
    return gated_costs(tracks, detections, gate_, [&](std::size_t i, std::size_t j) {
        return nn::embedding_distance(et.row(i), ep.row(i * nd + j));
    });
}

CostMatrix affinity_matrix(const metric::MetricNet& net, std::span<const Track* const> tracks,
                           std::span<const sim::Detection> detections, double gate) {
    EmbeddingGate g;
    g.gate = gate;
    return EmbeddingAffinity(net, g).costs(tracks, detections);
}

VerificationAffinity::VerificationAffinity(const metric::VerificationNet& net, const EmbeddingGate& gate)
    : net_(&net), gate_(gate) {
    gate.validate();
}

CostMatrix VerificationAffinity::costs(std::span<const Track* const> tracks,
                                       std::span<const sim::Detection> detections) const {
    if (tracks.empty() || detections.empty()) return CostMatrix(tracks.size(), detections.size());
    const auto f = pair_features(net_->joint, tracks, detections);
    const std::size_t nd = detections.size();
    Tensor wide_tracks = Tensor::matrix(f.pair.rows(), f.track.cols());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = 0; j < nd; ++j) {
            std::copy(f.track.row(i).begin(), f.track.row(i).end(), wide_tracks.row(i * nd + j).begin());
        }
    }
    const auto same = net_->same_probability(wide_tracks, f.pair);
    return gated_costs(tracks, detections, gate_,
                       [&](std::size_t i, std::size_t j) { return std::max(0.0, 1.0 - same[i * nd + j]); });
}

IouAffinity::IouAffinity(double min_iou) : min_iou_(min_iou) {
    if (!(min_iou > 0.0 && min_iou <= 1.0)) throw std::invalid_argument("baseline min_iou must lie in (0, 1]");
}

CostMatrix IouAffinity::costs(std::span<const Track* const> tracks, std::span<const sim::Detection> detections) const {
    CostMatrix out(tracks.size(), detections.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const auto a = eval::box_around(tracks[i]->last_position(), tracks[i]->box);
        for (std::size_t j = 0; j < detections.size(); ++j) {
            const double v = eval::iou(a, eval::box_around(detections[j].position, detections[j].box));
            if (v >= min_iou_) {
                out.set(i, j, 1.0 - v);
            } else {
                out.forbid(i, j);
            }
        }
    }
    return out;
}

}  // namespace tripletrack::assoc
