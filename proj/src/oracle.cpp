#include "hamosc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "hamosc/quadrature.hpp"

namespace hamosc {

namespace {

constexpr double kHypTol = 1e-12;

}  // namespace

void ComparisonProblem::with_default_reference() {
    ref_f = f2;
    ref_g = g2;
    ref_h = h2;
}

ComparisonOutcome comparison_condition(const ComparisonProblem& c,
                                       const std::vector<double>& grid) {
    if (grid.size() < 2) throw Error("comparison_condition: need a grid");
    double t0 = grid.front(), t_end = grid.back();

    double y20 = c.y2.at(t0);
    if (c.eta1(t0) < y20 - kHypTol || c.eta2(t0) < y20 - kHypTol)
        throw HypothesisViolated("eta(t0) must dominate y2(t0)");
    if (c.gamma0 < y20 - kHypTol) throw HypothesisViolated("gamma0 must dominate y2(t0)");
    for (double t : grid)
        if (c.f1(t) < -kHypTol)
            throw HypothesisViolated("f1 must be nonnegative; f1(" + std::to_string(t) +
                                     ") = " + std::to_string(c.f1(t)));

    auto weight_exponent = std::make_shared<CumulativeIntegral>(
        [&c](double s) { return c.ref_f(s) * (c.eta1(s) + c.eta2(s)) + c.ref_g(s); }, t0, t_end,
        1e-10);
    ScalarFn integrand = [&c, weight_exponent](double tau) {
        double y = c.y2.at(tau);
        double d = (c.f1(tau) - c.ref_f(tau)) * y * y + (c.g1(tau) - c.ref_g(tau)) * y +
                   (c.h1(tau) - c.ref_h(tau));
        return std::exp(weight_exponent->at(tau)) * d;
    };
    CumulativeIntegral J(integrand, t0, t_end, 1e-10);

    ComparisonOutcome out;
    out.grid = grid;
    out.min_J = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        double v = J.at(t);
        out.J.push_back(v);
        out.min_J = std::min(out.min_J, v);
    }
    out.error_bound = J.error() + weight_exponent->error() * (t_end - t0) + 1e-14;
    out.satisfied = out.min_J >= -out.error_bound;
    return out;
}

ComparisonVerification comparison_predict_and_verify(const ComparisonProblem& c,
                                                     double span_end) {
    ComparisonVerification v;
    v.y1 = integrate_scalar_riccati(c.f1, c.g1, c.h1, c.gamma0, c.t0, span_end);
    v.verified = !v.y1.blow_up.has_value();
    return v;
}

namespace {

// Unweighted (plain square) and weighted (eigenvalue-scaled, guarded)
// diagonal residuals share everything but the coupling term.
ResidualTrace residual_common(const MatrixPath& V, int j, const MatrixFn& drift,
                              const ScalarFn& coeff,
                              const std::function<double(const Matrix&, const Matrix&, double)>&
                                  coupling,
                              const ScalarFn* quad_weight,
                              const std::vector<double>& eval_times) {
    ResidualTrace out;
    const int jj = j - 1;
    for (double t : eval_times) {
        Matrix Vt = V.at(t);
        Matrix dV = path_derivative_clamped(V, t);
        Matrix D = drift(t);
        double v = Vt(jj, jj).real();
        double quad = quad_weight ? (*quad_weight)(t) : 1.0;
        double r = dV(jj, jj).real() + quad * v * v + 2.0 * D(jj, jj).real() * v +
                   coupling(Vt, D, t) - coeff(t);
        out.t.push_back(t);
        out.value.push_back(r);
        out.max_abs = std::max(out.max_abs, std::abs(r));
    }
    return out;
}

}  // namespace

ResidualTrace diagonal_riccati_residual(const MatrixPath& V, const SqrtReduction& red,
                                        const std::vector<double>& eval_times) {
    auto drift = std::make_shared<MatrixPath>(red.drift);
    MatrixFn dfn = [drift](double t) { return drift->at(t); };
    const int jj = red.j - 1;
    auto coupling = [jj](const Matrix& Vt, const Matrix& D, double) {
        double s = 0.0;
        for (Eigen::Index m = 0; m < Vt.rows(); ++m)
            if (m != jj) s += std::norm(Vt(jj, m) + std::conj(D(m, jj)));
        return s;
    };
    return residual_common(V, red.j, dfn, red.theta, coupling, nullptr, eval_times);
}

ResidualTrace diagonal_riccati_residual(const MatrixPath& V, const UnitaryReduction& red,
                                        const std::vector<double>& eval_times) {
    auto drift = std::make_shared<MatrixPath>(red.rotated_drift);
    MatrixFn dfn = [drift](double t) { return drift->at(t); };
    const int jj = red.j - 1;
    auto eigenvalues = red.eigenvalues;
    auto guard = red.guard_tol;
    auto coupling = [jj, eigenvalues, guard](const Matrix& Vt, const Matrix& D, double t) {
        RealVector b = eigenvalues(t);
        double tol = guard(t);
        double s = 0.0;
        for (Eigen::Index m = 0; m < Vt.rows(); ++m) {
            if (m == jj) continue;
            double bm = b(m);
            if (std::abs(bm) <= tol) continue;  // guarded term vanishes with b_m
            s += bm * std::norm(Vt(jj, m) + std::conj(D(m, jj)) / bm);
        }
        return s;
    };
    return residual_common(V, red.j, dfn, red.chi, coupling, &red.b_j, eval_times);
}

MatrixPath transform_by_sqrt(const MatrixRiccatiPath& Z, const MatrixFn& B,
                             const std::vector<double>& grid) {
    auto Zp = std::make_shared<MatrixRiccatiPath>(Z);
    return make_matrix_path(
        [Zp, B](double t) {
            Matrix S = hermitian_sqrt(B(t));
            return Matrix(S * Zp->at(t) * S);
        },
        grid);
}

MatrixPath transform_by_unitary(const MatrixRiccatiPath& Z, const EigenPath& ep,
                                const std::vector<double>& grid) {
    auto Zp = std::make_shared<MatrixRiccatiPath>(Z);
    auto path = std::make_shared<EigenPath>(ep);
    return make_matrix_path(
        [Zp, path](double t) {
            Matrix U = path->U_at(t);
            return Matrix(U * Zp->at(t) * U.adjoint());
        },
        grid);
}

namespace {

class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    // Box-Muller on the raw generator; deterministic across platforms,
    // unlike std::normal_distribution.
    double normal() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

    Matrix hermitian(int n, double max_norm) {
        Matrix H(n, n);
        for (int i = 0; i < n; ++i) {
            H(i, i) = normal();
            for (int j = 0; j < i; ++j) {
                std::complex<double> v{normal() / std::sqrt(2.0), normal() / std::sqrt(2.0)};
                H(i, j) = v;
                H(j, i) = std::conj(v);
            }
        }
        double nrm = H.norm();
        if (nrm > max_norm) H *= max_norm / nrm;
        return H;
    }

private:
    double uniform() {
        return static_cast<double>(rng_()) / (static_cast<double>(rng_.max()) + 1.0);
    }

    std::mt19937_64 rng_;
    bool have_ = false;
    double cached_ = 0.0;
};

}  // namespace

OracleOutcome empirical_oracle(const SystemSpec& sys, Window w, const OracleParams& params) {
    if (params.trials < 1) throw PreconditionFailed("empirical_oracle: trials must be >= 1");
    const int n = sys.n();
    if (w.a < sys.t0() - 1e-12) throw PreconditionFailed("window starts before t0");

    GaussianSampler sampler(params.seed);
    std::vector<std::pair<std::string, std::pair<Matrix, Matrix>>> data;

    Matrix I = Matrix::Identity(n, n);
    data.emplace_back("identity_zero", std::make_pair(I, Matrix::Zero(n, n)));
    // Near-singular start: (W, H·W) is conjoined for Hermitian H since
    // W*·(H·W) = W*·H·W is Hermitian.
    Matrix W = I;
    W(n - 1, n - 1) = 1e-3;
    Matrix Hn = sampler.hermitian(n, 10.0);
    data.emplace_back("near_singular", std::make_pair(W, Matrix(Hn * W)));
    for (int k = 0; k < params.trials; ++k) {
        Matrix H = sampler.hermitian(n, 10.0);
        data.emplace_back("random_" + std::to_string(k), std::make_pair(I, H));
    }

    OracleOutcome out;
    out.all_zero = true;
    for (auto& [label, pair] : data) {
        OracleTrial trial;
        trial.label = label;
        try {
            Trajectory traj =
                integrate_hamiltonian(sys, pair.first, pair.second, sys.t0(), w.b,
                                      params.tolerances);
            ZeroDetection det = detect_zeros(traj, w, -1.0, params.scan_samples);
            trial.threshold = det.threshold;
            for (const ZeroEvent& e : det.zeros) trial.zeros.push_back(e.t);
            if (params.keep_trajectories) out.trajectories.push_back(std::move(traj));
        } catch (const StepSizeUnderflow&) {
            trial.indeterminate = true;
        }
        if (trial.zeros.empty()) out.all_zero = false;
        out.trials.push_back(std::move(trial));
    }
    return out;
}

}  // namespace hamosc
