#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "hamosc/errors.hpp"

namespace hamosc {

using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using MatrixFn = std::function<Matrix(double)>;
using ScalarFn = std::function<double(double)>;

/// ‖M − M*‖_F ≤ tol_factor · max(1, ‖M‖_F)
bool is_hermitian(const Matrix& M, double tol_factor = 1e-12);

Matrix hermitian_part(const Matrix& M);

/// Principal square root of a nonnegative-definite Hermitian matrix.
/// Eigenvalues in [-tol, 0) with tol = 1e-10·‖B‖_F are clamped to zero;
/// anything below -tol throws NotPositiveSemidefinite.
Matrix hermitian_sqrt(const Matrix& B);

/// Moore-Penrose pseudoinverse by SVD; singular values below
/// rel_tol · sigma_max are treated as zero.
Matrix pseudoinverse(const Matrix& M, double rel_tol = 1e-12);

/// A matrix-valued function of time carried on a sampling grid. When an
/// analytic rule exists the evaluator recomputes the value; otherwise
/// values are cubically interpolated from the samples (flagged).
struct MatrixPath {
    std::vector<double> grid;
    std::vector<Matrix> values;
    MatrixFn evaluator;         // null => interpolate samples
    bool interpolated = false;

    // Set when the path is f(base(t)) for a Hermitian base; the derivative
    // then uses the divided differences of f along the eigenbasis of base
    // (Daleckii-Krein) instead of differencing the path itself.
    MatrixFn base;
    std::function<double(double, double)> divided_difference;

    Matrix at(double t) const;
    double span_begin() const { return grid.front(); }
    double span_end() const { return grid.back(); }
};

MatrixPath make_matrix_path(MatrixFn evaluator, std::vector<double> grid);
MatrixPath make_sampled_path(std::vector<double> grid, std::vector<Matrix> values);

/// Path of hermitian_sqrt(B(t)) with Daleckii-Krein derivative metadata.
MatrixPath make_sqrt_path(MatrixFn B, std::vector<double> grid);

/// Derivative of the path at t. Central finite difference with step
/// h = max(1,|t|)·eps^(1/3); Daleckii-Krein when the metadata is present.
/// Throws OutOfDomain when t ± h leaves the grid span.
Matrix path_derivative(const MatrixPath& P, double t);

/// Same stencil but falls back to a one-sided second order difference at the
/// span ends, so values on closed windows stay defined.
Matrix path_derivative_clamped(const MatrixPath& P, double t);

/// Continuously tracked unitary diagonalization B(t) = U*(t) · diag(D(t)) · U(t).
/// Columns of U* (the eigenvectors) are matched between adjacent samples by
/// greedy maximum overlap with phase alignment; the first sample is matched
/// against the identity, which keeps already-diagonal inputs at U ≡ I.
struct EigenPath {
    std::vector<double> grid;
    std::vector<Matrix> U;           // B = U* diag(D) U at each sample
    std::vector<RealVector> D;
    double continuity_defect = 0.0;  // max ‖U(t_{k+1}) − U(t_k)‖_F
    MatrixFn B;

    /// Aligned decomposition at arbitrary t: fresh eigendecomposition of
    /// B(t), matched against the sample at or before t. Continuous across
    /// sample boundaries by construction.
    std::pair<Matrix, RealVector> decompose_at(double t) const;
    Matrix U_at(double t) const { return decompose_at(t).first; }
};

/// Throws GridTooCoarse when the continuity defect exceeds 0.5.
EigenPath eigen_path(const MatrixFn& B, const std::vector<double>& grid);

/// Factorization of the transformed drift M(t) = A(t)·√B(t) − √B(t)' through
/// √B(t): classifies per sample whether col(M) ⊆ range(√B) — equivalently
/// whether √B·X·M = M admits a solution — and carries the canonical
/// candidate F = (√B)⁺. Unsolvability is data, not an error.
struct DriftFactorization {
    std::vector<double> grid;
    std::vector<char> solvable;
    std::vector<double> residual;  // ‖√B·F·M − M‖_F per sample
    MatrixPath F;                  // pseudoinverse of √B
    MatrixFn sqrtB;
    MatrixFn sqrtB_derivative;     // Daleckii-Krein
    MatrixFn M;
    double sqrt_derivative_defect = 0.0;  // max ‖DK − finite difference‖_F on the grid

    bool all_solvable() const;
    double solvable_fraction() const;
    double max_residual() const;
};

DriftFactorization drift_factorization(const MatrixFn& A, const MatrixFn& B,
                                       const std::vector<double>& grid);

/// Uniform grid helper: count+1 points from a to b inclusive.
std::vector<double> uniform_grid(double a, double b, int count);

}  // namespace hamosc
