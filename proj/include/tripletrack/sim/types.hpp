#pragma once

#include <optional>
#include <vector>

namespace tripletrack::sim {

/// Normalized image coordinates, each axis in [-0.5, 0.5].
struct Position {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

/// Per-frame displacement in normalized units.
struct Velocity {
    double x = 0.0;
    double y = 0.0;
};

/// Box extent as a fraction of image width / height.
struct BoxSize {
    double w = 0.03;
    double h = 0.14;

    friend bool operator==(const BoxSize&, const BoxSize&) = default;
};

inline constexpr double kCoordMin = -0.5;
inline constexpr double kCoordMax = 0.5;

inline bool in_bounds(const Position& p) {
    return p.x >= kCoordMin && p.x <= kCoordMax && p.y >= kCoordMin && p.y <= kCoordMax;
}

struct Trajectory {
    int identity = 0;
    int start_frame = 1;
    std::vector<Position> positions;  // one per frame starting at start_frame
    BoxSize box;

    int length() const { return static_cast<int>(positions.size()); }
    int end_frame() const { return start_frame + length() - 1; }
    bool covers(int frame) const { return frame >= start_frame && frame <= end_frame(); }
    const Position& at(int frame) const { return positions[static_cast<std::size_t>(frame - start_frame)]; }
};

struct Detection {
    int frame = 0;
    Position position;
    BoxSize box;
    double confidence = 1.0;
    std::vector<double> descriptor;
    std::optional<int> truth_id;  // ground truth only; absent for false positives
};

/// A trajectory window of N positions plus the candidate continuation fed to the motion channel.
struct MotionSample {
    std::vector<Position> window;
    Position candidate;
};

}  // namespace tripletrack::sim
