#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tripletrack/nn/param.hpp"

namespace tripletrack::nn {

struct ParamCheck {
    std::string name;
    double max_relative_error = 0.0;
    bool finite = true;
};

struct GradCheckReport {
    std::vector<ParamCheck> params;
    double max_relative_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string failure;  // names the first offending parameter when not passed

    const ParamCheck* worst() const;
};

/// |ga - gn| / max(|ga|, |gn|, 1e-8)
double relative_error(double analytic, double numeric);

/// Compares analytic gradients against central finite differences.
///   loss:     evaluates the loss from the current parameter values (no side effects on grads).
///   backward: zeroes nothing itself; must run forward+backward accumulating grads into `params`.
/// Gradients are zeroed before `backward` is called.
GradCheckReport grad_check(const std::function<double()>& loss, const std::function<void()>& backward,
                           const ParamRefs& params, double tolerance, double step = 1e-5);

}  // namespace tripletrack::nn
