#include "hamosc/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace hamosc {

ScalarSystem2x2 second_order_as_system(ScalarFn p, ScalarFn q) {
    ScalarSystem2x2 s;
    s.p11 = [](double) { return 0.0; };
    s.p12 = [](double) { return 1.0; };
    s.p21 = [q](double t) { return -q(t); };
    s.p22 = [p](double t) { return -p(t); };
    return s;
}

SqrtReduction reduce_via_factorization(const SystemSpec& sys, const DriftFactorization& fac,
                                       int j, const std::vector<double>& grid) {
    if (j < 1 || j > sys.n()) throw Error("reduce_via_factorization: channel index out of range");
    if (!fac.all_solvable())
        throw UnsolvableFactorization(
            "drift factorization has no solution on part of the grid (solvable fraction " +
            std::to_string(fac.solvable_fraction()) + ")");

    SqrtReduction r;
    r.j = j;
    r.grid = grid;

    MatrixFn F = [fac](double t) { return fac.F.at(t); };
    MatrixFn M = fac.M;
    MatrixFn sqrtB = fac.sqrtB;
    MatrixFn C = sys.C_fn();

    r.drift = make_matrix_path([F, M](double t) -> Matrix { return F(t) * M(t); }, grid);
    r.potential = make_matrix_path(
        [sqrtB, C](double t) {
            Matrix S = sqrtB(t);
            return hermitian_part(S * C(t) * S);
        },
        grid);

    auto drift = std::make_shared<MatrixPath>(r.drift);
    auto potential = std::make_shared<MatrixPath>(r.potential);
    const int jj = j - 1;
    r.drift_diag_re = [drift, jj](double t) { return drift->at(t)(jj, jj).real(); };
    r.theta = [drift, potential, jj](double t) {
        Matrix D = drift->at(t);
        double v = potential->at(t)(jj, jj).real();
        for (Eigen::Index m = 0; m < D.rows(); ++m)
            if (m != jj) v += std::norm(D(m, jj));
        return v;
    };
    for (double t : grid) r.theta_samples.push_back(r.theta(t));
    return r;
}

ScalarSystem2x2 oscillation_test_system(const SqrtReduction& r) {
    ScalarFn a = r.drift_diag_re;
    ScalarFn theta = r.theta;
    return second_order_as_system([a](double t) { return 2.0 * a(t); },
                                  [theta](double t) { return -theta(t); });
}

bool GuardActivity::ever(int m) const {
    for (const auto& v : active)
        if (std::find(v.begin(), v.end(), m) != v.end()) return true;
    return false;
}

double GuardActivity::fraction(int m) const {
    if (active.empty()) return 0.0;
    std::size_t c = 0;
    for (const auto& v : active)
        if (std::find(v.begin(), v.end(), m) != v.end()) ++c;
    return static_cast<double>(c) / static_cast<double>(active.size());
}

UnitaryReduction reduce_via_unitary(const SystemSpec& sys, const EigenPath& ep, int j,
                                    const std::vector<double>& grid, double chi_jump_threshold) {
    const int n = sys.n();
    if (j < 1 || j > n) throw Error("reduce_via_unitary: channel index out of range");

    UnitaryReduction r;
    r.j = j;
    r.grid = grid;
    r.eigen_continuity_defect = ep.continuity_defect;

    // Condition check: eigenvalues of B must be nonnegative on the grid.
    for (std::size_t k = 0; k < ep.grid.size(); ++k)
        for (Eigen::Index m = 0; m < ep.D[k].size(); ++m)
            if (ep.D[k](m) < -1e-10)
                throw NegativeEigenvalue("eigenvalue " + std::to_string(ep.D[k](m)) + " of B(" +
                                         std::to_string(ep.grid[k]) + ") is negative");

    auto path = std::make_shared<EigenPath>(ep);
    MatrixFn A = sys.A_fn();
    MatrixFn B = sys.B_fn();
    MatrixFn C = sys.C_fn();

    MatrixFn Uadj = [path](double t) -> Matrix { return path->U_at(t).adjoint(); };
    MatrixPath Uadj_path = make_matrix_path(Uadj, grid);
    auto Uadj_shared = std::make_shared<MatrixPath>(std::move(Uadj_path));

    r.rotated_drift = make_matrix_path(
        [path, A, Uadj_shared](double t) {
            Matrix U = path->U_at(t);
            Matrix dUadj = path_derivative_clamped(*Uadj_shared, t);
            return Matrix(U * (A(t) * U.adjoint() - dUadj));
        },
        grid);
    r.rotated_potential = make_matrix_path(
        [path, C](double t) {
            Matrix U = path->U_at(t);
            return hermitian_part(U * C(t) * U.adjoint());
        },
        grid);

    auto drift = std::make_shared<MatrixPath>(r.rotated_drift);
    auto potential = std::make_shared<MatrixPath>(r.rotated_potential);
    const int jj = j - 1;

    r.drift_diag_re = [drift, jj](double t) { return drift->at(t)(jj, jj).real(); };
    r.b_j = [path, jj](double t) { return std::max(0.0, path->decompose_at(t).second(jj)); };
    r.eigenvalues = [path](double t) {
        RealVector b = path->decompose_at(t).second;
        return RealVector(b.cwiseMax(0.0));
    };
    MatrixFn Bfn = B;
    r.guard_tol = [Bfn](double t) { return 1e-12 * std::max(1.0, Bfn(t).norm()); };
    r.chi = [path, drift, potential, Bfn, jj](double t) {
        RealVector b = path->decompose_at(t).second;
        Matrix D = drift->at(t);
        double guard_tol = 1e-12 * std::max(1.0, Bfn(t).norm());
        double v = potential->at(t)(jj, jj).real();
        for (Eigen::Index m = 0; m < b.size(); ++m) {
            if (m == jj) continue;
            if (std::abs(b(m)) <= guard_tol) continue;  // guarded quotient forced to zero
            v += std::norm(D(m, jj)) / b(m);
        }
        return v;
    };

    // Grid samples, guard activity, and the continuity score of chi.
    r.guard.grid = grid;
    for (double t : grid) {
        RealVector b = path->decompose_at(t).second;
        double guard_tol = 1e-12 * std::max(1.0, Bfn(t).norm());
        std::vector<int> act;
        for (Eigen::Index m = 0; m < b.size(); ++m)
            if (m != jj && std::abs(b(m)) <= guard_tol) act.push_back(static_cast<int>(m) + 1);
        r.guard.active.push_back(std::move(act));
        r.chi_samples.push_back(r.chi(t));
    }
    double step = grid.size() > 1 ? (grid.back() - grid.front()) / (grid.size() - 1) : 0.0;
    r.chi_jump_threshold = chi_jump_threshold > 0.0 ? chi_jump_threshold : 1e3 * step;
    for (std::size_t k = 1; k < r.chi_samples.size(); ++k)
        r.chi_max_jump = std::max(r.chi_max_jump,
                                  std::abs(r.chi_samples[k] - r.chi_samples[k - 1]));
    r.chi_continuous = r.chi_max_jump <= r.chi_jump_threshold;
    return r;
}

ScalarSystem2x2 as_scalar_system(const UnitaryReduction& r) {
    ScalarSystem2x2 s;
    ScalarFn a = r.drift_diag_re;
    s.p11 = [a](double t) { return 2.0 * a(t); };
    s.p12 = r.b_j;
    s.p21 = r.chi;
    s.p22 = [](double) { return 0.0; };
    return s;
}

}  // namespace hamosc
