#include "hamosc/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "hamosc/errors.hpp"

namespace hamosc {

namespace {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) * (fa + 4.0 * fm + fb) / 6.0;
}

// Emits the final leaves in ascending order: (left, right, single-panel
// Simpson value, error share, signed Richardson correction share, f(left),
// f(right)).
template <typename Sink>
void adapt(const ScalarFn& f, double a, double fa, double m, double fm, double b, double fb,
           double whole, double tol, int depth, Sink&& sink) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, m, fa, flm, fm);
    double right = simpson(m, b, fm, frm, fb);
    double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
        double share = std::abs(diff) / 30.0;
        sink(a, m, left, share, diff / 30.0, fa, fm);
        sink(m, b, right, share, diff / 30.0, fm, fb);
        return;
    }
    adapt(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, sink);
    adapt(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, sink);
}

template <typename Sink>
void run_panels(const ScalarFn& f, double a, double b, double abs_tol, int initial_panels,
                int max_depth, Sink&& sink) {
    initial_panels = std::max(1, initial_panels);
    double panel_tol = abs_tol / initial_panels;
    double x0 = a;
    double f0 = f(x0);
    for (int p = 0; p < initial_panels; ++p) {
        double x1 = (p + 1 == initial_panels) ? b : a + (b - a) * (p + 1) / initial_panels;
        double xm = 0.5 * (x0 + x1);
        double fm = f(xm), f1 = f(x1);
        adapt(f, x0, f0, xm, fm, x1, f1, simpson(x0, x1, f0, fm, f1), panel_tol, max_depth, sink);
        x0 = x1;
        f0 = f1;
    }
}

}  // namespace

QuadratureResult integrate_adaptive(const ScalarFn& f, double a, double b, double abs_tol,
                                    int initial_panels, int max_depth) {
    QuadratureResult r;
    if (a == b) return r;
    if (b < a) throw OutOfDomain("integrate_adaptive: reversed interval");
    run_panels(f, a, b, abs_tol, initial_panels, max_depth,
               [&](double, double, double v, double e, double corr, double, double) {
                   r.value += v + corr;
                   r.error += e;
               });
    return r;
}

CumulativeIntegral::CumulativeIntegral(ScalarFn f, double a, double b, double abs_tol,
                                       int initial_panels, int max_depth)
    : f_(std::move(f)) {
    if (b < a) throw OutOfDomain("CumulativeIntegral: reversed interval");
    x_.push_back(a);
    prefix_.push_back(0.0);
    fx_.push_back(f_(a));
    if (a == b) return;
    // Corrections are dropped here: the prefixes must stay consistent with
    // the plain single-panel rule used for points between nodes.
    run_panels(f_, a, b, abs_tol, initial_panels, max_depth,
               [&](double, double right, double v, double e, double, double, double fr) {
                   x_.push_back(right);
                   prefix_.push_back(prefix_.back() + v);
                   fx_.push_back(fr);
                   error_ += e;
               });
}

double CumulativeIntegral::at(double t) const {
    double a = x_.front(), b = x_.back();
    double slack = 1e-9 * std::max(1.0, std::abs(b - a));
    if (t < a - slack || t > b + slack)
        throw OutOfDomain("CumulativeIntegral: point outside the integrated span");
    t = std::clamp(t, a, b);
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - x_.begin()) - 1));
    if (k >= x_.size() - 1 && t >= b) return prefix_.back();
    double tl = x_[k];
    if (t == tl) return prefix_[k];
    double fm = f_(0.5 * (tl + t));
    return prefix_[k] + simpson(tl, t, fx_[k], fm, f_(t));
}

}  // namespace hamosc
