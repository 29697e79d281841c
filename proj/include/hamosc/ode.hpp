#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "hamosc/errors.hpp"

namespace hamosc {

using StateVector = Eigen::VectorXd;
using OdeRhs = std::function<void(double, const StateVector&, StateVector&)>;

struct OdeTolerances {
    double rtol = 1e-9;
    double atol = 1e-12;
};

/// One accepted step of the 5(4) pair together with its quartic
/// interpolation coefficients.
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    StateVector r1, r2, r3, r4, r5;

    StateVector eval(double t) const;
};

class DenseOutput {
public:
    StateVector eval(double t) const;
    double begin() const;
    double end() const;
    bool empty() const { return steps_.empty(); }
    std::size_t size() const { return steps_.size(); }
    void push(DenseStep s) { steps_.push_back(std::move(s)); }

private:
    std::vector<DenseStep> steps_;
};

struct OdeResult {
    std::vector<double> t;        // accepted times, starting with t_begin
    std::vector<StateVector> y;   // states at those times
    DenseOutput dense;
    bool completed = true;        // reached t_end
    double reached = 0.0;
    std::string stop_reason;      // "end" | "underflow" | "stop_condition"
};

/// Adaptive Dormand-Prince 5(4) with dense output. `stop`, when given, is
/// evaluated after every accepted step; returning true halts integration
/// there (reported as stop_reason "stop_condition"). A step size underflow
/// is reported through the result, not thrown.
OdeResult integrate_dopri5(const OdeRhs& rhs, double t_begin, double t_end, StateVector y0,
                           OdeTolerances tol = {},
                           const std::function<bool(double, const StateVector&)>& stop = {});

}  // namespace hamosc
