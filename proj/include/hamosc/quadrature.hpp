#pragma once

#include <functional>
#include <vector>

#include "hamosc/errors.hpp"

namespace hamosc {

using ScalarFn = std::function<double(double)>;

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // accumulated Richardson error estimate
};

/// Adaptive Simpson quadrature with an absolute tolerance. The interval is
/// first cut into `initial_panels` uniform panels so that symmetric
/// integrands cannot fool the coarse estimate. Deterministic: the node set
/// is a pure function of the evaluated values.
QuadratureResult integrate_adaptive(const ScalarFn& f, double a, double b,
                                    double abs_tol = 1e-9, int initial_panels = 8,
                                    int max_depth = 48);

/// Cumulative integral t -> ∫_a^t f built on the adaptive node set. The
/// prefix values at the recorded nodes are sums of single-panel Simpson
/// values over the leaves, and evaluation between nodes uses a single
/// Simpson panel from the containing leaf's left edge, so `at` is continuous
/// and consistent with the stored prefixes.
class CumulativeIntegral {
public:
    CumulativeIntegral(ScalarFn f, double a, double b, double abs_tol = 1e-9,
                       int initial_panels = 8, int max_depth = 48);

    double at(double t) const;
    double total() const { return prefix_.back(); }
    double error() const { return error_; }
    double begin() const { return x_.front(); }
    double end() const { return x_.back(); }
    const std::vector<double>& nodes() const { return x_; }

private:
    ScalarFn f_;
    std::vector<double> x_;       // leaf boundaries, ascending
    std::vector<double> prefix_;  // integral from a to x_[k]
    std::vector<double> fx_;      // f at x_[k]
    double error_ = 0.0;
};

}  // namespace hamosc
