#include "hamosc/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hamosc/quadrature.hpp"

namespace hamosc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSignTol = 1e-12;

using json = nlohmann::ordered_json;

struct SignTracker {
    double min_seen = std::numeric_limits<double>::infinity();
    void update(double v) { min_seen = std::min(min_seen, v); }
    void require_nonnegative(const char* what) const {
        if (min_seen < -kSignTol)
            throw PreconditionFailed(std::string(what) + " must be nonnegative; minimum " +
                                     std::to_string(min_seen) + " observed");
    }
};

json window_json(Window w) { return json::array({w.a, w.b}); }

// Window threshold test shared by the min-integral criteria.
CriterionReport threshold_report(const std::string& id, int j, Window w, double integral,
                                 double error_bound, json extra = json::object()) {
    CriterionReport rep;
    rep.criterion = id;
    rep.j = j;
    rep.margin = integral - kPi;
    rep.verdict =
        rep.margin > error_bound ? Verdict::ProvenOscillatory : Verdict::Inconclusive;
    rep.diagnostics["window"] = window_json(w);
    rep.diagnostics["integral"] = integral;
    rep.diagnostics["threshold"] = kPi;
    rep.diagnostics["error_bound"] = error_bound;
    for (auto& [k, v] : extra.items()) rep.diagnostics[k] = v;
    return rep;
}

struct StagedIntegrals {
    std::vector<double> T, I1, I2;
    bool increasing = false;
    bool exceeded = false;
    double margin = 0.0;
};

StagedIntegrals staged_divergence(const ScalarFn& w1, const ScalarFn& w2, double t0,
                                  double horizon, int stages, double threshold,
                                  double quad_tol) {
    StagedIntegrals st;
    CumulativeIntegral G1(w1, t0, horizon, quad_tol);
    CumulativeIntegral G2(w2, t0, horizon, quad_tol);
    double span = horizon - t0;
    for (int k = 1; k <= stages; ++k) {
        double Tk = t0 + span * std::pow(2.0, static_cast<double>(k - stages));
        st.T.push_back(Tk);
        st.I1.push_back(G1.at(Tk));
        st.I2.push_back(G2.at(Tk));
    }
    st.increasing = true;
    for (std::size_t k = 1; k < st.T.size(); ++k)
        if (!(st.I1[k] > st.I1[k - 1]) || !(st.I2[k] > st.I2[k - 1])) st.increasing = false;
    double last = std::min(st.I1.back(), st.I2.back());
    st.exceeded = last >= threshold;
    st.margin = last - threshold;
    return st;
}

json staged_json(const StagedIntegrals& st, double threshold) {
    json d;
    d["checkpoints"] = st.T;
    d["I1"] = st.I1;
    d["I2"] = st.I2;
    d["threshold"] = threshold;
    d["increasing"] = st.increasing;
    return d;
}

CriterionReport staged_report(const std::string& id, int j, const StagedIntegrals& st,
                              double threshold, json extra = json::object()) {
    CriterionReport rep;
    rep.criterion = id;
    rep.j = j;
    rep.margin = st.margin;
    rep.verdict = (st.increasing && st.exceeded) ? Verdict::DivergenceEvidence
                                                 : Verdict::Inconclusive;
    rep.diagnostics = staged_json(st, threshold);
    for (auto& [k, v] : extra.items()) rep.diagnostics[k] = v;
    return rep;
}

CriterionReport inconclusive_report(const std::string& id, int j, const std::string& reason,
                                    json extra = json::object()) {
    CriterionReport rep;
    rep.criterion = id;
    rep.j = j;
    rep.verdict = Verdict::Inconclusive;
    rep.margin = std::numeric_limits<double>::quiet_NaN();
    rep.diagnostics["reason"] = reason;
    for (auto& [k, v] : extra.items()) rep.diagnostics[k] = v;
    return rep;
}

void require_second_kind_diagonal(const SystemSpec& sys, Window w, int probes = 16) {
    for (int k = 0; k <= probes; ++k) {
        double t = w.a + (w.b - w.a) * k / probes;
        Matrix Bt = sys.B(t);
        double off = 0.0;
        for (Eigen::Index i = 0; i < Bt.rows(); ++i)
            for (Eigen::Index jx = 0; jx < Bt.cols(); ++jx)
                if (i != jx) off += std::norm(Bt(i, jx));
        if (std::sqrt(off) > kSignTol)
            throw PreconditionFailed("B(t) is not diagonal at t = " + std::to_string(t));
        for (Eigen::Index i = 0; i < Bt.rows(); ++i)
            if (Bt(i, i).real() < -kSignTol)
                throw PreconditionFailed("diagonal entry of B is negative at t = " +
                                         std::to_string(t));
        if (sys.A(t).norm() > kSignTol)
            throw PreconditionFailed("A(t) must vanish for the diagonal criteria (t = " +
                                     std::to_string(t) + ")");
    }
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::ProvenOscillatory: return "ProvenOscillatory";
        case Verdict::DivergenceEvidence: return "DivergenceEvidence";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

CriterionReport window_integral_criterion(const ScalarSystem2x2& s, Window w,
                                          const CriterionOptions& opt) {
    auto E = [&s](double t) { return s.E(t); };
    auto exponent = std::make_shared<CumulativeIntegral>(E, w.a, w.b, opt.quad_tol);

    auto sign = std::make_shared<SignTracker>();
    auto max_abs = std::make_shared<double>(0.0);
    ScalarFn integrand = [&s, exponent, sign, max_abs](double t) {
        double p12 = s.p12(t);
        sign->update(p12);
        if (p12 < -kSignTol)
            throw PreconditionFailed("p12 must be nonnegative on the window; p12(" +
                                     std::to_string(t) + ") = " + std::to_string(p12));
        double wgt = exponent->at(t);
        double v = std::min(p12 * std::exp(-wgt), -s.p21(t) * std::exp(wgt));
        *max_abs = std::max(*max_abs, std::abs(v));
        return v;
    };

    QuadratureResult q = integrate_adaptive(integrand, w.a, w.b, opt.quad_tol);
    double error_bound = q.error + exponent->error() * (w.b - w.a) * (*max_abs) +
                         1e-14 * (1.0 + std::abs(q.value));
    json extra;
    extra["min_p12"] = sign->min_seen;
    return threshold_report("thm3.3", 0, w, q.value, error_bound, extra);
}

CriterionReport ray_divergence_criterion(const ScalarSystem2x2& s, double t0, double horizon,
                                         const CriterionOptions& opt) {
    if (!(horizon > t0)) throw PreconditionFailed("horizon must exceed t0");
    auto E = [&s](double t) { return s.E(t); };
    auto exponent = std::make_shared<CumulativeIntegral>(E, t0, horizon, opt.quad_tol);
    ScalarFn w1 = [&s, exponent](double t) {
        double p12 = s.p12(t);
        if (p12 < -kSignTol)
            throw PreconditionFailed("p12 must be nonnegative on the span; p12(" +
                                     std::to_string(t) + ") = " + std::to_string(p12));
        return p12 * std::exp(-exponent->at(t));
    };
    ScalarFn w2 = [&s, exponent](double t) { return -s.p21(t) * std::exp(exponent->at(t)); };

    StagedIntegrals st = staged_divergence(w1, w2, t0, horizon, opt.stages,
                                           opt.divergence_threshold, opt.quad_tol);
    return staged_report("thm3.2", 0, st, opt.divergence_threshold);
}

CriterionReport diagonal_window_criterion(const SystemSpec& sys, int j, Window w,
                                          const CriterionOptions& opt) {
    if (j < 1 || j > sys.n()) throw PreconditionFailed("channel index out of range");
    require_second_kind_diagonal(sys, w);
    const int jj = j - 1;
    ScalarFn integrand = [&sys, jj](double t) {
        Matrix Bt = sys.B(t);
        Matrix Ct = sys.C(t);
        if (Bt(jj, jj).real() < -kSignTol)
            throw PreconditionFailed("b_j negative at t = " + std::to_string(t));
        return std::min(Bt(jj, jj).real(), -Ct(jj, jj).real());
    };
    QuadratureResult q = integrate_adaptive(integrand, w.a, w.b, opt.quad_tol);
    double error_bound = q.error + 1e-14 * (1.0 + std::abs(q.value));
    return threshold_report("cor2.2", j, w, q.value, error_bound);
}

CriterionReport diagonal_ray_criterion(const SystemSpec& sys, int j, double horizon,
                                       const CriterionOptions& opt) {
    if (j < 1 || j > sys.n()) throw PreconditionFailed("channel index out of range");
    double t0 = sys.t0();
    if (!(horizon > t0)) throw PreconditionFailed("horizon must exceed t0");
    require_second_kind_diagonal(sys, Window(t0, horizon));
    const int jj = j - 1;
    ScalarFn w1 = [&sys, jj](double t) {
        double b = sys.B(t)(jj, jj).real();
        if (b < -kSignTol) throw PreconditionFailed("b_j negative at t = " + std::to_string(t));
        return b;
    };
    ScalarFn w2 = [&sys, jj](double t) { return -sys.C(t)(jj, jj).real(); };
    StagedIntegrals st = staged_divergence(w1, w2, t0, horizon, opt.stages,
                                           opt.divergence_threshold, opt.quad_tol);
    return staged_report("cor2.1", j, st, opt.divergence_threshold);
}

namespace {

// Shared plumbing of the factorization route; `w` carries the span, `ray`
// selects the criterion applied to the reduced problem.
CriterionReport factorization_route(const SystemSpec& sys, int j, Window w, bool ray,
                                    const CriterionOptions& opt) {
    const std::string id = ray ? "thm2.1" : "thm2.2";
    std::vector<double> grid = uniform_grid(w.a, w.b, opt.grid_samples);
    DriftFactorization fac = drift_factorization(sys.A_fn(), sys.B_fn(), grid);
    json facd;
    facd["solvable_fraction"] = fac.solvable_fraction();
    facd["max_factorization_residual"] = fac.max_residual();
    facd["sqrt_derivative_defect"] = fac.sqrt_derivative_defect;
    if (!fac.all_solvable())
        return inconclusive_report(
            id, j, "drift factorization unsolvable on part of the span; criterion silent", facd);

    SqrtReduction red = reduce_via_factorization(sys, fac, j, grid);
    ScalarSystem2x2 s = oscillation_test_system(red);
    CriterionReport inner = ray ? ray_divergence_criterion(s, w.a, w.b, opt)
                                : window_integral_criterion(s, w, opt);
    CriterionReport rep;
    rep.criterion = id;
    rep.j = j;
    rep.verdict = inner.verdict;
    rep.margin = inner.margin;
    rep.diagnostics = facd;
    rep.diagnostics["scalar_criterion"] = inner.criterion;
    for (auto& [k, v] : inner.diagnostics.items()) rep.diagnostics[k] = v;
    return rep;
}

CriterionReport unitary_route(const SystemSpec& sys, int j, Window w, bool ray,
                              const CriterionOptions& opt) {
    const std::string id = ray ? "thm2.3" : "thm2.4";
    std::vector<double> grid = uniform_grid(w.a, w.b, opt.grid_samples);

    EigenPath ep;
    try {
        ep = eigen_path(sys.B_fn(), grid);
    } catch (const GridTooCoarse& err) {
        return inconclusive_report(id, j, std::string("eigenvalue path not trackable: ") +
                                              err.what());
    }

    UnitaryReduction red;
    try {
        red = reduce_via_unitary(sys, ep, j, grid, opt.chi_jump_threshold);
    } catch (const NegativeEigenvalue& err) {
        json d;
        d["eigen_continuity_defect"] = ep.continuity_defect;
        return inconclusive_report(id, j, std::string("condition violated: ") + err.what(), d);
    }

    json diag;
    diag["eigen_continuity_defect"] = red.eigen_continuity_defect;
    diag["chi_max_jump"] = red.chi_max_jump;
    diag["chi_jump_threshold"] = red.chi_jump_threshold;
    diag["chi_continuous"] = red.chi_continuous;
    json guard = json::object();
    for (int m = 1; m <= sys.n(); ++m)
        if (m != j) guard[std::to_string(m)] = red.guard.fraction(m);
    diag["guard_activity"] = guard;

    ScalarSystem2x2 s = as_scalar_system(red);
    CriterionReport inner = ray ? ray_divergence_criterion(s, w.a, w.b, opt)
                                : window_integral_criterion(s, w, opt);
    CriterionReport rep;
    rep.criterion = id;
    rep.j = j;
    rep.margin = inner.margin;
    rep.diagnostics = diag;
    rep.diagnostics["scalar_criterion"] = inner.criterion;
    for (auto& [k, v] : inner.diagnostics.items()) rep.diagnostics[k] = v;
    if (!red.chi_continuous) {
        rep.verdict = Verdict::Inconclusive;
        rep.diagnostics["reason"] =
            "chi jump exceeds the continuity threshold; reduction not certifiable";
    } else {
        rep.verdict = inner.verdict;
    }
    return rep;
}

}  // namespace

CriterionReport factorization_route_window(const SystemSpec& sys, int j, Window w,
                                           const CriterionOptions& opt) {
    return factorization_route(sys, j, w, false, opt);
}

CriterionReport factorization_route_ray(const SystemSpec& sys, int j, double horizon,
                                        const CriterionOptions& opt) {
    return factorization_route(sys, j, Window(sys.t0(), horizon), true, opt);
}

CriterionReport unitary_route_window(const SystemSpec& sys, int j, Window w,
                                     const CriterionOptions& opt) {
    return unitary_route(sys, j, w, false, opt);
}

CriterionReport unitary_route_ray(const SystemSpec& sys, int j, double horizon,
                                  const CriterionOptions& opt) {
    return unitary_route(sys, j, Window(sys.t0(), horizon), true, opt);
}

}  // namespace hamosc
