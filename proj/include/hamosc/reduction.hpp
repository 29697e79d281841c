#pragma once

#include <vector>

#include "hamosc/matfun.hpp"
#include "hamosc/system.hpp"

namespace hamosc {

/// Generic linear system of two scalar ordinary differential equations
///     phi' = p11·phi + p12·psi,   psi' = p21·phi + p22·psi.
/// E = p11 − p22 is derived, never stored.
struct ScalarSystem2x2 {
    ScalarFn p11, p12, p21, p22;

    double E(double t) const { return p11(t) - p22(t); }
};

/// Companion system of phi'' + p·phi' + q·phi = 0:
/// phi' = psi, psi' = −q·phi − p·psi.
ScalarSystem2x2 second_order_as_system(ScalarFn p, ScalarFn q);

/// Reduction of the matrix problem through a drift factorization F.
/// drift = F·(A·√B − √B'), potential = √B·C·√B, and for the chosen channel j
///     theta = [potential]_jj + Σ_{m≠j} |[drift]_mj|².
/// The scalar oscillation test problem for channel j is
///     phi'' + 2·Re[drift]_jj·phi' − theta·phi = 0;
/// the sign of theta follows from the diagonal reduction of the transformed
/// Riccati flow (theta collects the diagonal potential plus the squared
/// column couplings, and enters the test equation negated).
struct SqrtReduction {
    int j = 1;  // 1-based channel index
    std::vector<double> grid;
    MatrixPath drift;      // F·(A·√B − √B')
    MatrixPath potential;  // √B·C·√B
    ScalarFn drift_diag_re;
    ScalarFn theta;
    std::vector<double> theta_samples;
};

SqrtReduction reduce_via_factorization(const SystemSpec& sys, const DriftFactorization& fac,
                                       int j, const std::vector<double>& grid);

/// Companion form of the channel's test equation (p = 2·Re drift_jj, q = −theta).
ScalarSystem2x2 oscillation_test_system(const SqrtReduction& r);

/// Which channels' guarded quotients were forced to zero, per grid sample.
struct GuardActivity {
    std::vector<double> grid;
    std::vector<std::vector<int>> active;  // per sample: 1-based indices m

    bool ever(int m) const;
    double fraction(int m) const;
};

/// Reduction through the tracked unitary diagonalization B = U*·diag(b)·U.
/// rotated_drift = U·(A·U* − (U*)'), rotated_potential = U·C·U*, and
///     chi = [rotated_potential]_jj + Σ_{m≠j} [ |[rotated_drift]_mj|² / b_m ]₀
/// where the bracket is zero whenever |b_m| ≤ 1e-12·max(1, ‖B‖). The scalar
/// test problem is the 2x2 system
///     phi' = 2·Re[rotated_drift]_jj·phi + b_j·psi,   psi' = chi·phi.
struct UnitaryReduction {
    int j = 1;
    std::vector<double> grid;
    MatrixPath rotated_drift;
    MatrixPath rotated_potential;
    ScalarFn drift_diag_re;
    ScalarFn b_j;   // clamped at zero
    ScalarFn chi;
    std::function<RealVector(double)> eigenvalues;  // all b_m(t), clamped at zero
    ScalarFn guard_tol;                             // 1e-12 · max(1, ‖B(t)‖)
    std::vector<double> chi_samples;
    GuardActivity guard;
    double chi_max_jump = 0.0;
    double chi_jump_threshold = 0.0;
    bool chi_continuous = true;
    double eigen_continuity_defect = 0.0;
};

/// Throws NegativeEigenvalue when some b_m < −1e-10 on the grid. The
/// continuity of chi is judged by its largest jump between adjacent samples
/// against `chi_jump_threshold` (non-positive = default 1e3·grid step).
UnitaryReduction reduce_via_unitary(const SystemSpec& sys, const EigenPath& ep, int j,
                                    const std::vector<double>& grid,
                                    double chi_jump_threshold = -1.0);

ScalarSystem2x2 as_scalar_system(const UnitaryReduction& r);

}  // namespace hamosc
