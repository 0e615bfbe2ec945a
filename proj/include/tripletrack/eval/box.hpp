#pragma once

#include "tripletrack/sim/types.hpp"

namespace tripletrack::eval {

/// Axis-aligned box given by its top-left corner and size.
struct Box {
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;

    friend bool operator==(const Box&, const Box&) = default;
};

/// Box centred on `center`.
Box box_around(sim::Position center, sim::BoxSize size);

/// Intersection over union. Throws std::invalid_argument for non-positive widths or heights.
double iou(const Box& a, const Box& b);

}  // namespace tripletrack::eval
