#include "tripletrack/eval/box.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tripletrack::eval {

Box box_around(sim::Position center, sim::BoxSize size) {
    return {center.x - 0.5 * size.w, center.y - 0.5 * size.h, size.w, size.h};
}

double iou(const Box& a, const Box& b) {
    if (!(a.width > 0.0 && a.height > 0.0 && b.width > 0.0 && b.height > 0.0)) {
        throw std::invalid_argument("iou: box dimensions must be positive");
    }
    const double iw = std::min(a.left + a.width, b.left + b.width) - std::max(a.left, b.left);
    const double ih = std::min(a.top + a.height, b.top + b.height) - std::max(a.top, b.top);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    // Edge arithmetic can round the overlap above either area.
    return std::min(1.0, inter / (a.width * a.height + b.width * b.height - inter));
}

}  // namespace tripletrack::eval
