#include "tripletrack/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace tripletrack::nn {

const ParamCheck* GradCheckReport::worst() const {
    if (params.empty()) return nullptr;
    return &*std::max_element(params.begin(), params.end(), [](const auto& a, const auto& b) {
        return a.max_relative_error < b.max_relative_error;
    });
}

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<double()>& loss, const std::function<void()>& backward,
                           const ParamRefs& params, double tolerance, double step) {
    GradCheckReport report;
    report.tolerance = tolerance;

    zero_grads(params);
    backward();
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (auto* p : params) analytic.push_back(p->grad);
    zero_grads(params);

    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Param& p = *params[pi];
        ParamCheck check{p.name, 0.0, analytic[pi].all_finite()};
        auto values = p.value.values();
        for (std::size_t k = 0; k < values.size() && check.finite; ++k) {
            const double original = values[k];
            values[k] = original + step;
            const double up = loss();
            values[k] = original - step;
            const double down = loss();
            values[k] = original;
            const double numeric = (up - down) / (2.0 * step);
            if (!std::isfinite(numeric)) {
                check.finite = false;
                break;
            }
            check.max_relative_error = std::max(check.max_relative_error, relative_error(analytic[pi][k], numeric));
        }
        if (!check.finite && report.failure.empty()) report.failure = "non-finite gradient in " + p.name;
        report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
        report.params.push_back(std::move(check));
    }

    const bool all_finite =
        std::all_of(report.params.begin(), report.params.end(), [](const auto& c) { return c.finite; });
    report.passed = all_finite && report.max_relative_error < tolerance;
    if (!report.passed && report.failure.empty()) {
        report.failure = "relative error " + std::to_string(report.max_relative_error) + " in " + report.worst()->name;
    }
    return report;
}

}  // namespace tripletrack::nn
