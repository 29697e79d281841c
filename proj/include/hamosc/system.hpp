#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hamosc/expr.hpp"
#include "hamosc/matfun.hpp"

namespace hamosc {

/// One matrix entry: a real expression, optionally paired with an imaginary
/// part. Complex entries are pairs of real expressions.
struct ComplexEntry {
    Expr re;
    Expr im;  // may be empty

    std::complex<double> eval(double t) const {
        return {re.eval(t), im.empty() ? 0.0 : im.eval(t)};
    }
    bool has_imag() const { return !im.empty(); }
};

using EntryGrid = std::vector<std::vector<ComplexEntry>>;

/// The coefficient triple (A, B, C) of the first-order pair
///     X' = A(t)·X + B(t)·Y,   Y' = C(t)·X − A*(t)·Y,   t ≥ t0,
/// with Hermitian B and C. Entries are expression-valued; evaluation at a
/// given time is exact recomputation. Immutable and cheap to copy.
class SystemSpec {
public:
    SystemSpec() = default;

    /// Validation runs over `span` when given, else over [t0, t0 + 10].
    static SystemSpec from_entries(int n, double t0, EntryGrid A, EntryGrid B, EntryGrid C,
                                   std::string name = {}, std::string description = {},
                                   std::optional<std::pair<double, double>> span = std::nullopt);
    /// Entries given as expression source strings (real entries only).
    static SystemSpec from_strings(int n, double t0,
                                   const std::vector<std::vector<std::string>>& A,
                                   const std::vector<std::vector<std::string>>& B,
                                   const std::vector<std::vector<std::string>>& C,
                                   std::string name = {});
    /// Constant coefficient matrices (complex allowed).
    static SystemSpec constant(const Matrix& A, const Matrix& B, const Matrix& C, double t0 = 0.0,
                               std::string name = {});

    int n() const;
    double t0() const;
    const std::string& name() const;
    const std::string& description() const;

    Matrix A(double t) const;
    Matrix B(double t) const;
    Matrix C(double t) const;
    MatrixFn A_fn() const;
    MatrixFn B_fn() const;
    MatrixFn C_fn() const;

    /// Detected on the validation grid: B diagonal / A identically zero.
    bool diagonal_B() const;
    bool zero_A() const;

    /// Checks Hermitian-ness of B and C on a uniform validation grid over
    /// [a, b] (relative tolerance 1e-9) and refreshes the detection flags.
    /// Throws HermitianViolation.
    void validate(double a, double b, int points = 64) const;

private:
    struct Data;
    std::shared_ptr<Data> data_;
};

/// Loads a system definition from JSON. Entries of A, B, C are either a
/// single expression string (real entry) or a two-element array
/// [re-expr, im-expr]. Validation runs over [span_begin, span_end]
/// (defaults to [t0, t0 + 10]). Throws SystemParseError, DimensionMismatch,
/// HermitianViolation.
SystemSpec load_system(const std::filesystem::path& path,
                       std::optional<std::pair<double, double>> span = std::nullopt);
SystemSpec parse_system(const std::string& json_text,
                        std::optional<std::pair<double, double>> span = std::nullopt);

}  // namespace hamosc
