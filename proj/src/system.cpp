#include "hamosc/system.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hamosc {

struct SystemSpec::Data {
    int n = 0;
    double t0 = 0.0;
    EntryGrid A, B, C;
    std::string name, description;
    mutable bool diagonal_B = false;
    mutable bool zero_A = false;
};

namespace {

Matrix eval_grid(const EntryGrid& g, int n, double t) {
    Matrix M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(t);
    return M;
}

void require_shape(const EntryGrid& g, int n, const char* which) {
    if (static_cast<int>(g.size()) != n)
        throw DimensionMismatch(std::string(which) + ": expected " + std::to_string(n) + " rows");
    for (const auto& row : g)
        if (static_cast<int>(row.size()) != n)
            throw DimensionMismatch(std::string(which) + ": expected " + std::to_string(n) +
                                    " columns per row");
}

ComplexEntry entry_from_number(double re, double im = 0.0) {
    ComplexEntry e;
    e.re = Expr::number(re);
    if (im != 0.0) e.im = Expr::number(im);
    return e;
}

}  // namespace

SystemSpec SystemSpec::from_entries(int n, double t0, EntryGrid A, EntryGrid B, EntryGrid C,
                                    std::string name, std::string description,
                                    std::optional<std::pair<double, double>> span) {
    if (n < 1) throw DimensionMismatch("dimension must be at least 1");
    require_shape(A, n, "A");
    require_shape(B, n, "B");
    require_shape(C, n, "C");
    SystemSpec s;
    s.data_ = std::make_shared<Data>();
    s.data_->n = n;
    s.data_->t0 = t0;
    s.data_->A = std::move(A);
    s.data_->B = std::move(B);
    s.data_->C = std::move(C);
    s.data_->name = std::move(name);
    s.data_->description = std::move(description);
    if (span)
        s.validate(span->first, span->second);
    else
        s.validate(t0, t0 + 10.0);
    return s;
}

SystemSpec SystemSpec::from_strings(int n, double t0,
                                    const std::vector<std::vector<std::string>>& A,
                                    const std::vector<std::vector<std::string>>& B,
                                    const std::vector<std::vector<std::string>>& C,
                                    std::string name) {
    auto build = [n](const std::vector<std::vector<std::string>>& src, const char* which) {
        EntryGrid g;
        for (int i = 0; i < static_cast<int>(src.size()); ++i) {
            std::vector<ComplexEntry> row;
            for (int j = 0; j < static_cast<int>(src[static_cast<std::size_t>(i)].size()); ++j) {
                ComplexEntry e;
                try {
                    e.re = Expr::parse(src[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                } catch (const SyntaxError& err) {
                    throw SystemParseError(std::string(which) + "[" + std::to_string(i) + "][" +
                                           std::to_string(j) + "]: " + err.what());
                }
                row.push_back(std::move(e));
            }
            g.push_back(std::move(row));
        }
        return g;
    };
    return from_entries(n, t0, build(A, "A"), build(B, "B"), build(C, "C"), std::move(name));
}

SystemSpec SystemSpec::constant(const Matrix& A, const Matrix& B, const Matrix& C, double t0,
                                std::string name) {
    const int n = static_cast<int>(A.rows());
    auto build = [n](const Matrix& M) {
        EntryGrid g;
        for (int i = 0; i < n; ++i) {
            std::vector<ComplexEntry> row;
            for (int j = 0; j < n; ++j) row.push_back(entry_from_number(M(i, j).real(), M(i, j).imag()));
            g.push_back(std::move(row));
        }
        return g;
    };
    if (B.rows() != n || C.rows() != n || A.cols() != n || B.cols() != n || C.cols() != n)
        throw DimensionMismatch("constant system: matrices must share one square dimension");
    return from_entries(n, t0, build(A), build(B), build(C), std::move(name));
}

int SystemSpec::n() const { return data_->n; }
double SystemSpec::t0() const { return data_->t0; }
const std::string& SystemSpec::name() const { return data_->name; }
const std::string& SystemSpec::description() const { return data_->description; }

Matrix SystemSpec::A(double t) const { return eval_grid(data_->A, data_->n, t); }
Matrix SystemSpec::B(double t) const { return eval_grid(data_->B, data_->n, t); }
Matrix SystemSpec::C(double t) const { return eval_grid(data_->C, data_->n, t); }

MatrixFn SystemSpec::A_fn() const {
    auto d = data_;
    return [d](double t) { return eval_grid(d->A, d->n, t); };
}
MatrixFn SystemSpec::B_fn() const {
    auto d = data_;
    return [d](double t) { return eval_grid(d->B, d->n, t); };
}
MatrixFn SystemSpec::C_fn() const {
    auto d = data_;
    return [d](double t) { return eval_grid(d->C, d->n, t); };
}

bool SystemSpec::diagonal_B() const { return data_->diagonal_B; }
bool SystemSpec::zero_A() const { return data_->zero_A; }

void SystemSpec::validate(double a, double b, int points) const {
    const int n = data_->n;
    bool diag = true, zero = true;
    for (int k = 0; k < points; ++k) {
        double t = points == 1 ? a : a + (b - a) * k / (points - 1);
        Matrix At, Bt, Ct;
        try {
            At = A(t);
            Bt = B(t);
            Ct = C(t);
        } catch (const EvalError& err) {
            throw SystemParseError("entry cannot be evaluated at t = " + std::to_string(t) +
                                   ": " + err.what());
        }
        auto check = [t](const char* which, const Matrix& M) {
            double defect = (M - M.adjoint()).norm();
            if (defect > 1e-9 * std::max(1.0, M.norm()))
                throw HermitianViolation(std::string(which) + "(t) is not Hermitian at t = " +
                                         std::to_string(t) + " (defect " + std::to_string(defect) +
                                         ")");
        };
        check("B", Bt);
        check("C", Ct);
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) off += std::norm(Bt(i, j));
        if (std::sqrt(off) > 1e-12) diag = false;
        if (At.norm() > 1e-12) zero = false;
    }
    data_->diagonal_B = diag;
    data_->zero_A = zero;
}

// ---------------------------------------------------------------------------
// JSON loader

namespace {

using nlohmann::json;

ComplexEntry parse_entry(const json& v, const char* which, int i, int j) {
    auto where = [&]() {
        return std::string(which) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
    };
    ComplexEntry e;
    try {
        if (v.is_string()) {
            e.re = Expr::parse(v.get<std::string>());
            return e;
        }
        if (v.is_array() && v.size() == 2 && v[0].is_string() && v[1].is_string()) {
            e.re = Expr::parse(v[0].get<std::string>());
            e.im = Expr::parse(v[1].get<std::string>());
            return e;
        }
    } catch (const SyntaxError& err) {
        throw SystemParseError(where() + ": " + err.what());
    }
    throw SystemParseError(where() +
                           ": entry must be an expression string or [re-expr, im-expr]");
}

EntryGrid parse_matrix(const json& doc, const char* which, int n) {
    if (!doc.contains(which)) throw SystemParseError(std::string("missing field '") + which + "'");
    const json& m = doc.at(which);
    if (!m.is_array() || static_cast<int>(m.size()) != n)
        throw DimensionMismatch(std::string(which) + ": expected an array of " +
                                std::to_string(n) + " rows");
    EntryGrid g;
    for (int i = 0; i < n; ++i) {
        const json& row = m[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw DimensionMismatch(std::string(which) + "[" + std::to_string(i) +
                                    "]: expected " + std::to_string(n) + " entries");
        std::vector<ComplexEntry> out;
        for (int j = 0; j < n; ++j)
            out.push_back(parse_entry(row[static_cast<std::size_t>(j)], which, i, j));
        g.push_back(std::move(out));
    }
    return g;
}

}  // namespace

SystemSpec parse_system(const std::string& json_text,
                        std::optional<std::pair<double, double>> span) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw SystemParseError(std::string("invalid JSON: ") + err.what());
    }
    if (!doc.is_object()) throw SystemParseError("top level must be a JSON object");
    if (!doc.contains("n") || !doc["n"].is_number_integer())
        throw SystemParseError("missing integer field 'n'");
    int n = doc["n"].get<int>();
    if (n < 1) throw DimensionMismatch("n must be at least 1");
    double t0 = 0.0;
    if (doc.contains("t0")) {
        if (!doc["t0"].is_number()) throw SystemParseError("'t0' must be a number");
        t0 = doc["t0"].get<double>();
    }
    EntryGrid A = parse_matrix(doc, "A", n);
    EntryGrid B = parse_matrix(doc, "B", n);
    EntryGrid C = parse_matrix(doc, "C", n);
    std::string name = doc.value("name", std::string{});
    std::string description = doc.value("description", std::string{});

    return SystemSpec::from_entries(n, t0, std::move(A), std::move(B), std::move(C),
                                    std::move(name), std::move(description), span);
}

SystemSpec load_system(const std::filesystem::path& path,
                       std::optional<std::pair<double, double>> span) {
    std::ifstream in(path);
    if (!in) throw SystemParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_system(ss.str(), span);
}

}  // namespace hamosc
