#pragma once

// Central finite-difference checking of analytic gradients for anything
// exposing a ParameterBundle.

#include <functional>

#include "qforecast/nn.hpp"
#include "support/oracles.hpp"

namespace gradcheck {

struct Report {
    double max_rel_err = 0.0;
    std::string worst_block;
    int checked = 0;
};

// `loss` must re-run the forward pass from the current parameter values.
// `backprop` must zero grads and fill them for the current values. `stride`
// subsamples large blocks; 1 checks every entry.
inline Report check(qforecast::nn::ParameterBundle& params, const std::function<double()>& loss,
                    const std::function<void()>& backprop, double step = 1e-6, int stride = 1) {
    backprop();
    std::vector<std::vector<double>> analytic;
    for (const auto& block : params.blocks) {
        analytic.emplace_back(block.grad.data(), block.grad.data() + block.grad.size());
    }

    Report report;
    for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        auto& block = params.blocks[b];
        for (Eigen::Index i = 0; i < block.value.size(); i += stride) {
            const double saved = block.value(i);
            block.value(i) = saved + step;
            const double up = loss();
            block.value(i) = saved - step;
            const double down = loss();
            block.value(i) = saved;
            const double fd = (up - down) / (2.0 * step);
            const double err = oracles::rel_err(analytic[b][static_cast<std::size_t>(i)], fd);
            ++report.checked;
            if (err > report.max_rel_err) {
                report.max_rel_err = err;
                report.worst_block = block.name;
            }
        }
    }
    return report;
}

} // namespace gradcheck
