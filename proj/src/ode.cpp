#include "hamosc/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hamosc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// Error coefficients (5th minus embedded 4th order).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double error_norm(const StateVector& e, const StateVector& y0, const StateVector& y1,
                  const OdeTolerances& tol) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        double sc = tol.atol + tol.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        double q = e(i) / sc;
        sum += q * q;
    }
    double n = std::sqrt(sum / static_cast<double>(e.size()));
    return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}

double initial_step(const OdeRhs& rhs, double t0, const StateVector& y0, const StateVector& f0,
                    double span, const OdeTolerances& tol) {
    auto weighted = [&](const StateVector& v, const StateVector& ref) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            double sc = tol.atol + tol.rtol * std::abs(ref(i));
            double q = v(i) / sc;
            sum += q * q;
        }
        return std::sqrt(sum / static_cast<double>(v.size()));
    };
    double d0 = weighted(y0, y0);
    double d1n = weighted(f0, y0);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    StateVector y1 = y0 + h0 * f0;
    StateVector f1(y0.size());
    rhs(t0 + h0, y1, f1);
    double d2 = weighted(f1 - f0, y0) / h0;
    double dmax = std::max(d1n, d2);
    double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, span});
}

}  // namespace

StateVector DenseStep::eval(double t) const {
    double theta = h != 0.0 ? (t - t0) / h : 0.0;
    theta = std::clamp(theta, 0.0, 1.0);
    double om = 1.0 - theta;
    return r1 + theta * (r2 + om * (r3 + theta * (r4 + om * r5)));
}

StateVector DenseOutput::eval(double t) const {
    if (steps_.empty()) throw OutOfDomain("dense output is empty");
    double lo = begin(), hi = end();
    double slack = 1e-9 * std::max(1.0, hi - lo);
    if (t < lo - slack || t > hi + slack)
        throw OutOfDomain("dense output evaluated outside the integrated span");
    // binary search for the step containing t
    std::size_t left = 0, right = steps_.size() - 1;
    while (left < right) {
        std::size_t mid = (left + right) / 2;
        if (t <= steps_[mid].t0 + steps_[mid].h)
            right = mid;
        else
            left = mid + 1;
    }
    return steps_[left].eval(t);
}

double DenseOutput::begin() const { return steps_.front().t0; }
double DenseOutput::end() const { return steps_.back().t0 + steps_.back().h; }

OdeResult integrate_dopri5(const OdeRhs& rhs, double t_begin, double t_end, StateVector y0,
                           OdeTolerances tol,
                           const std::function<bool(double, const StateVector&)>& stop) {
    if (!(t_end > t_begin)) throw Error("integrate_dopri5: need t_end > t_begin");
    const Eigen::Index dim = y0.size();

    OdeResult out;
    out.t.push_back(t_begin);
    out.y.push_back(y0);

    double t = t_begin;
    StateVector y = std::move(y0);
    StateVector k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), yt(dim), y1(dim),
        err(dim);
    rhs(t, y, k1);

    double h = initial_step(rhs, t, y, k1, t_end - t_begin, tol);
    bool rejected = false;

    while (t < t_end) {
        h = std::min(h, t_end - t);
        if (h < 4.0 * kEps * std::max(1.0, std::abs(t))) {
            out.completed = false;
            out.reached = t;
            out.stop_reason = "underflow";
            return out;
        }

        yt = y + h * (a21 * k1);
        rhs(t + c2 * h, yt, k2);
        yt = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, yt, k3);
        yt = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, yt, k4);
        yt = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, yt, k5);
        yt = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, yt, k6);
        y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs(t + h, y1, k7);

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = error_norm(err, y, y1, tol);

        if (en <= 1.0) {
            DenseStep ds;
            ds.t0 = t;
            ds.h = h;
            ds.r1 = y;
            ds.r2 = y1 - y;
            ds.r3 = h * k1 - ds.r2;
            ds.r4 = ds.r2 - h * k7 - ds.r3;
            ds.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            out.dense.push(std::move(ds));

            t += h;
            y.swap(y1);
            k1.swap(k7);  // first-same-as-last
            out.t.push_back(t);
            out.y.push_back(y);

            if (stop && stop(t, y)) {
                out.completed = false;
                out.reached = t;
                out.stop_reason = "stop_condition";
                return out;
            }

            double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
            fac = std::clamp(fac, 0.2, rejected ? 1.0 : 5.0);
            h *= fac;
            rejected = false;
        } else {
            double fac = std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 1.0) : 0.1;
            h *= fac;
            rejected = true;
        }
    }

    out.completed = true;
    out.reached = t;
    out.stop_reason = "end";
    return out;
}

}  // namespace hamosc
