#include "hamosc/matfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hamosc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double fd_step(double t) { return std::max(1.0, std::abs(t)) * std::cbrt(kEps); }

struct Decomposition {
    Matrix V;        // columns are eigenvectors
    RealVector lam;  // ascending
};

Decomposition decompose(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    if (es.info() != Eigen::Success) throw Error("hermitian eigendecomposition failed");
    return {es.eigenvectors(), es.eigenvalues()};
}

// Deterministic canonical phase: the first component of significant
// magnitude is made real positive.
void canonical_phase(Matrix& V) {
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
        for (Eigen::Index i = 0; i < V.rows(); ++i) {
            std::complex<double> v = V(i, j);
            if (std::abs(v) > 1e-12) {
                V.col(j) *= std::conj(v) / std::abs(v);
                break;
            }
        }
    }
}

// Greedy maximum-overlap assignment of the columns of V against the columns
// of ref, then a phase rotation making each matched overlap real positive.
void match_and_align(const Matrix& ref, Matrix& V, RealVector& lam) {
    const Eigen::Index n = V.cols();
    Eigen::MatrixXd overlap(n, n);
    Eigen::MatrixXcd inner(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            inner(i, j) = ref.col(i).adjoint() * V.col(j);
            overlap(i, j) = std::abs(inner(i, j));
        }
    std::vector<Eigen::Index> perm(n, -1);
    std::vector<bool> row_used(n, false), col_used(n, false);
    for (Eigen::Index step = 0; step < n; ++step) {
        double best = -1.0;
        Eigen::Index bi = 0, bj = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (row_used[i]) continue;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (col_used[j]) continue;
                if (overlap(i, j) > best) {
                    best = overlap(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        perm[bi] = bj;
        row_used[bi] = true;
        col_used[bj] = true;
    }
    Matrix W(V.rows(), n);
    RealVector lw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index j = perm[i];
        std::complex<double> s = inner(i, j);
        std::complex<double> phase = std::abs(s) > 1e-12 ? std::conj(s) / std::abs(s)
                                                         : std::complex<double>(1.0, 0.0);
        W.col(i) = V.col(j) * phase;
        lw(i) = lam(j);
    }
    V = std::move(W);
    lam = std::move(lw);
}

std::pair<Matrix, RealVector> aligned_decomposition(const Matrix& B, const Matrix& ref) {
    auto [V, lam] = decompose(B);
    canonical_phase(V);
    match_and_align(ref, V, lam);
    return {std::move(V), std::move(lam)};
}

Matrix interp_cubic(const std::vector<double>& grid, const std::vector<Matrix>& values, double t) {
    const std::size_t n = grid.size();
    if (n == 1) return values[0];
    if (n < 4) {
        // linear fallback for short paths
        auto it = std::upper_bound(grid.begin(), grid.end(), t);
        std::size_t k = std::min<std::size_t>(n - 2, std::max<std::ptrdiff_t>(0, it - grid.begin() - 1));
        double w = (t - grid[k]) / (grid[k + 1] - grid[k]);
        return (1.0 - w) * values[k] + w * values[k + 1];
    }
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::ptrdiff_t k = std::clamp<std::ptrdiff_t>(it - grid.begin() - 1, 1, static_cast<std::ptrdiff_t>(n) - 3);
    std::size_t i0 = static_cast<std::size_t>(k - 1);
    Matrix out = Matrix::Zero(values[0].rows(), values[0].cols());
    for (std::size_t a = 0; a < 4; ++a) {
        double w = 1.0;
        for (std::size_t b = 0; b < 4; ++b) {
            if (a == b) continue;
            w *= (t - grid[i0 + b]) / (grid[i0 + a] - grid[i0 + b]);
        }
        out += w * values[i0 + a];
    }
    return out;
}

Matrix daleckii_krein(const MatrixFn& base,
                      const std::function<double(double, double)>& dd, double t, double h,
                      bool one_sided_lo, bool one_sided_hi) {
    Matrix Bt = base(t);
    Matrix dB;
    if (one_sided_lo)
        dB = (-3.0 * base(t) + 4.0 * base(t + h) - base(t + 2.0 * h)) / (2.0 * h);
    else if (one_sided_hi)
        dB = (3.0 * base(t) - 4.0 * base(t - h) + base(t - 2.0 * h)) / (2.0 * h);
    else
        dB = (base(t + h) - base(t - h)) / (2.0 * h);
    auto [V, lam] = decompose(hermitian_part(Bt));
    Matrix K = V.adjoint() * hermitian_part(dB) * V;
    for (Eigen::Index i = 0; i < K.rows(); ++i)
        for (Eigen::Index j = 0; j < K.cols(); ++j) K(i, j) *= dd(lam(i), lam(j));
    return V * K * V.adjoint();
}

Matrix derivative_impl(const MatrixPath& P, double t, bool clamped) {
    double h = fd_step(t);
    double lo = P.span_begin(), hi = P.span_end();
    bool below = t - h < lo, above = t + h > hi;
    if (below && above) throw OutOfDomain("path_derivative: span shorter than the stencil");
    if (!clamped && (below || above))
        throw OutOfDomain("path_derivative: t +/- h leaves the grid span");
    if (P.base && P.divided_difference)
        return daleckii_krein(P.base, P.divided_difference, t, h, below, above);
    if (below) return (-3.0 * P.at(t) + 4.0 * P.at(t + h) - P.at(t + 2.0 * h)) / (2.0 * h);
    if (above) return (3.0 * P.at(t) - 4.0 * P.at(t - h) + P.at(t - 2.0 * h)) / (2.0 * h);
    return (P.at(t + h) - P.at(t - h)) / (2.0 * h);
}

}  // namespace

bool is_hermitian(const Matrix& M, double tol_factor) {
    double scale = std::max(1.0, M.norm());
    return (M - M.adjoint()).norm() <= tol_factor * scale;
}

Matrix hermitian_part(const Matrix& M) { return 0.5 * (M + M.adjoint()); }

Matrix hermitian_sqrt(const Matrix& B) {
    if (!is_hermitian(B, 1e-10))
        throw Error("hermitian_sqrt: input is not Hermitian");
    double tol = 1e-10 * B.norm();
    auto [V, lam] = decompose(hermitian_part(B));
    RealVector s(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        double l = lam(i);
        if (l < -tol)
            throw NotPositiveSemidefinite("hermitian_sqrt: eigenvalue " + std::to_string(l) +
                                          " below -" + std::to_string(tol));
        s(i) = l > 0.0 ? std::sqrt(l) : 0.0;
    }
    Matrix S = V * s.asDiagonal() * V.adjoint();
    return hermitian_part(S);
}

Matrix pseudoinverse(const Matrix& M, double rel_tol) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    double cutoff = sv.size() ? rel_tol * sv(0) : 0.0;
    RealVector inv = RealVector::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

Matrix MatrixPath::at(double t) const {
    if (evaluator) return evaluator(t);
    return interp_cubic(grid, values, t);
}

MatrixPath make_matrix_path(MatrixFn evaluator, std::vector<double> grid) {
    MatrixPath p;
    p.grid = std::move(grid);
    p.values.reserve(p.grid.size());
    for (double t : p.grid) p.values.push_back(evaluator(t));
    p.evaluator = std::move(evaluator);
    return p;
}

MatrixPath make_sampled_path(std::vector<double> grid, std::vector<Matrix> values) {
    MatrixPath p;
    p.grid = std::move(grid);
    p.values = std::move(values);
    p.interpolated = true;
    return p;
}

MatrixPath make_sqrt_path(MatrixFn B, std::vector<double> grid) {
    MatrixFn base = B;
    MatrixPath p = make_matrix_path([base](double t) { return hermitian_sqrt(base(t)); },
                                    std::move(grid));
    p.base = base;
    // For f = sqrt the divided difference (√x−√y)/(x−y) is algebraically
    // 1/(√x+√y), exact also for coincident arguments. Eigenvalues are
    // clamped at zero; a vanishing denominator is floored so that the
    // coefficient stays finite (it only multiplies the corresponding
    // component of B', which is zero whenever the zero eigenspace is flat).
    double norm0 = 0.0;
    for (const Matrix& v : p.values) norm0 = std::max(norm0, v.norm());
    double floor_val = std::sqrt(std::max(1e-10 * norm0 * norm0, 1e-300));
    p.divided_difference = [floor_val](double x, double y) {
        double sx = x > 0.0 ? std::sqrt(x) : 0.0;
        double sy = y > 0.0 ? std::sqrt(y) : 0.0;
        return 1.0 / std::max(sx + sy, floor_val);
    };
    return p;
}

Matrix path_derivative(const MatrixPath& P, double t) { return derivative_impl(P, t, false); }

Matrix path_derivative_clamped(const MatrixPath& P, double t) {
    return derivative_impl(P, t, true);
}

std::pair<Matrix, RealVector> EigenPath::decompose_at(double t) const {
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t k = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(it - grid.begin() - 1, 0,
                                   static_cast<std::ptrdiff_t>(grid.size()) - 1));
    Matrix ref = U[k].adjoint();
    auto [V, lam] = aligned_decomposition(hermitian_part(B(t)), ref);
    return {V.adjoint(), std::move(lam)};
}

EigenPath eigen_path(const MatrixFn& B, const std::vector<double>& grid) {
    if (grid.size() < 2) throw Error("eigen_path: need at least two grid points");
    EigenPath ep;
    ep.grid = grid;
    ep.B = B;
    Matrix B0 = B(grid.front());
    Matrix ref = Matrix::Identity(B0.rows(), B0.cols());
    Matrix prevV;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        Matrix Bk = hermitian_part(B(grid[k]));
        auto [V, lam] = aligned_decomposition(Bk, ref);
        if (k > 0) ep.continuity_defect = std::max(ep.continuity_defect, (V - prevV).norm());
        ep.U.push_back(V.adjoint());
        ep.D.push_back(lam);
        prevV = V;
        ref = std::move(V);
    }
    if (ep.continuity_defect > 0.5)
        throw GridTooCoarse(ep.continuity_defect,
                            "eigen_path: continuity defect " +
                                std::to_string(ep.continuity_defect) +
                                " exceeds 0.5; refine the grid");
    return ep;
}

bool DriftFactorization::all_solvable() const {
    for (char s : solvable)
        if (!s) return false;
    return true;
}

double DriftFactorization::solvable_fraction() const {
    if (solvable.empty()) return 0.0;
    std::size_t c = 0;
    for (char s : solvable) c += s ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(solvable.size());
}

double DriftFactorization::max_residual() const {
    double m = 0.0;
    for (double r : residual) m = std::max(m, r);
    return m;
}

DriftFactorization drift_factorization(const MatrixFn& A, const MatrixFn& B,
                                       const std::vector<double>& grid) {
    DriftFactorization out;
    out.grid = grid;
    MatrixPath S = make_sqrt_path(B, grid);
    MatrixFn sqrtB = [S](double t) { return S.at(t); };
    MatrixFn dsqrtB = [S](double t) { return path_derivative_clamped(S, t); };
    out.sqrtB = sqrtB;
    out.sqrtB_derivative = dsqrtB;
    out.M = [A, sqrtB, dsqrtB](double t) -> Matrix { return A(t) * sqrtB(t) - dsqrtB(t); };
    out.F = make_matrix_path([sqrtB](double t) { return pseudoinverse(sqrtB(t)); }, grid);

    for (std::size_t k = 0; k < grid.size(); ++k) {
        double t = grid[k];
        const Matrix& Sk = S.values[k];
        Matrix Mk = A(t) * Sk - dsqrtB(t);
        const Matrix& Fk = out.F.values[k];
        double r = (Sk * (Fk * Mk) - Mk).norm();
        out.residual.push_back(r);
        out.solvable.push_back(r <= 1e-9 * std::max(1.0, Mk.norm()) ? 1 : 0);
        if (k > 0 && k + 1 < grid.size()) {
            Matrix fd = (S.at(t + fd_step(t)) - S.at(t - fd_step(t))) / (2.0 * fd_step(t));
            out.sqrt_derivative_defect =
                std::max(out.sqrt_derivative_defect, (dsqrtB(t) - fd).norm());
        }
    }
    return out;
}

std::vector<double> uniform_grid(double a, double b, int count) {
    if (count < 1) throw Error("uniform_grid: need at least one interval");
    std::vector<double> g(static_cast<std::size_t>(count) + 1);
    for (int i = 0; i <= count; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / count;
    g.back() = b;
    return g;
}

}  // namespace hamosc
