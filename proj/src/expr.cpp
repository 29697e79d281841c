#include "hamosc/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace hamosc {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

struct FuncInfo {
    const char* name;
    Func func;
    int arity;
};

constexpr FuncInfo kFuncs[] = {
    {"sin", Func::Sin, 1}, {"cos", Func::Cos, 1}, {"tan", Func::Tan, 1},
    {"exp", Func::Exp, 1}, {"log", Func::Log, 1}, {"sqrt", Func::Sqrt, 1},
    {"abs", Func::Abs, 1}, {"min", Func::Min, 2}, {"max", Func::Max, 2},
};

const FuncInfo* lookup_func(std::string_view name) {
    for (const auto& f : kFuncs)
        if (name == f.name) return &f;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::size_t offset;
    std::size_t length;
    double number = 0.0;
    std::string_view text;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.offset = pos_;
        tok_.length = 1;
        if (pos_ >= src_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        char c = src_[pos_];
        switch (c) {
            case '+': tok_.kind = Tok::Plus; ++pos_; return;
            case '-': tok_.kind = Tok::Minus; ++pos_; return;
            case '*': tok_.kind = Tok::Star; ++pos_; return;
            case '/': tok_.kind = Tok::Slash; ++pos_; return;
            case '^': tok_.kind = Tok::Caret; ++pos_; return;
            case '(': tok_.kind = Tok::LParen; ++pos_; return;
            case ')': tok_.kind = Tok::RParen; ++pos_; return;
            case ',': tok_.kind = Tok::Comma; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_.kind = Tok::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            tok_.length = pos_ - start;
            return;
        }
        throw SyntaxError(pos_, "number, 't', constant, function, '(', or operator",
                          "unexpected character '" + std::string(1, c) + "' at offset " +
                              std::to_string(pos_));
    }

    void lex_number() {
        std::size_t start = pos_;
        bool digits = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
            digits = true;
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                digits = true;
            }
        }
        if (!digits)
            throw SyntaxError(start, "digit", "malformed number at offset " + std::to_string(start));
        // Exponent only when it is unambiguously one: 'e'/'E' followed by
        // optional sign and at least one digit. Otherwise the 'e' is the
        // Euler constant of the following token ("2*e" stays two tokens).
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        tok_.kind = Tok::Number;
        tok_.number = std::strtod(text.c_str(), nullptr);
        tok_.length = pos_ - start;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_;
};

// ---------------------------------------------------------------------------
// Parser
//
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right associative exponent)
//   primary := number | 't' | 'pi' | 'e' | func '(' expr (',' expr)* ')' | '(' expr ')'

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    NodePtr parse() {
        NodePtr e = parse_expr();
        const Token& t = lex_.peek();
        if (t.kind != Tok::End) fail(t, "operator or end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const Token& t, const std::string& expected) {
        throw SyntaxError(t.offset, expected,
                          "syntax error at offset " + std::to_string(t.offset) + ": expected " +
                              expected);
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind != Tok::Plus && t.kind != Tok::Minus) return lhs;
            Token op = lex_.take();
            NodePtr rhs = parse_term();
            ExprNode n;
            n.kind = ExprKind::Binary;
            n.op = op.kind == Tok::Plus ? '+' : '-';
            n.offset = op.offset;
            n.args = {std::move(lhs), std::move(rhs)};
            lhs = make_node(std::move(n));
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind != Tok::Star && t.kind != Tok::Slash) return lhs;
            Token op = lex_.take();
            NodePtr rhs = parse_unary();
            ExprNode n;
            n.kind = ExprKind::Binary;
            n.op = op.kind == Tok::Star ? '*' : '/';
            n.offset = op.offset;
            n.args = {std::move(lhs), std::move(rhs)};
            lhs = make_node(std::move(n));
        }
    }

    NodePtr parse_unary() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Minus) {
            Token op = lex_.take();
            NodePtr arg = parse_unary();
            ExprNode n;
            n.kind = ExprKind::Negate;
            n.offset = op.offset;
            n.args = {std::move(arg)};
            return make_node(std::move(n));
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        const Token& t = lex_.peek();
        if (t.kind != Tok::Caret) return base;
        Token op = lex_.take();
        NodePtr exponent = parse_unary();  // right associative, admits 2^-3
        ExprNode n;
            n.kind = ExprKind::Binary;
        n.op = '^';
        n.offset = op.offset;
        n.args = {std::move(base), std::move(exponent)};
        return make_node(std::move(n));
    }

    NodePtr parse_primary() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::Number: {
                ExprNode n;
            n.kind = ExprKind::Number;
                n.number = t.number;
                n.offset = t.offset;
                return make_node(std::move(n));
            }
            case Tok::Ident:
                return parse_ident(t);
            case Tok::LParen: {
                NodePtr inner = parse_expr();
                const Token& close = lex_.peek();
                if (close.kind != Tok::RParen) fail(close, "')'");
                lex_.take();
                return inner;
            }
            default:
                fail(t, "number, 't', constant, function, '(' or unary '-'");
        }
    }

    NodePtr parse_ident(const Token& t) {
        if (t.text == "t") {
            ExprNode n;
            n.kind = ExprKind::Time;
            n.offset = t.offset;
            return make_node(std::move(n));
        }
        if (t.text == "pi" || t.text == "e") {
            ExprNode n;
            n.kind = ExprKind::Constant;
            n.constant = std::string(t.text);
            n.offset = t.offset;
            return make_node(std::move(n));
        }
        const FuncInfo* fi = lookup_func(t.text);
        if (!fi)
            throw SyntaxError(t.offset, "'t', 'pi', 'e', or a function name",
                              "unknown identifier '" + std::string(t.text) + "' at offset " +
                                  std::to_string(t.offset));
        const Token& open = lex_.peek();
        if (open.kind != Tok::LParen) fail(open, "'('");
        lex_.take();
        std::vector<NodePtr> args;
        args.push_back(parse_expr());
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            args.push_back(parse_expr());
        }
        const Token& close = lex_.peek();
        if (close.kind != Tok::RParen) fail(close, "',' or ')'");
        lex_.take();
        if (static_cast<int>(args.size()) != fi->arity)
            throw SyntaxError(t.offset, fi->arity == 1 ? "1 argument" : "2 arguments",
                              "function '" + std::string(fi->name) + "' expects " +
                                  std::to_string(fi->arity) + " argument(s), got " +
                                  std::to_string(args.size()));
        ExprNode n;
            n.kind = ExprKind::Call;
        n.func = fi->func;
        n.offset = t.offset;
        n.args = std::move(args);
        return make_node(std::move(n));
    }

    Lexer lex_;
};

// ---------------------------------------------------------------------------
// Evaluation

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;

double eval_node(const ExprNode& n, double t) {
    switch (n.kind) {
        case ExprKind::Number:
            return n.number;
        case ExprKind::Time:
            return t;
        case ExprKind::Constant:
            return n.constant == "pi" ? kPi : kE;
        case ExprKind::Negate:
            return -eval_node(*n.args[0], t);
        case ExprKind::Binary: {
            double a = eval_node(*n.args[0], t);
            double b = eval_node(*n.args[1], t);
            switch (n.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/':
                    if (b == 0.0)
                        throw EvalError(n.offset, "division by zero at offset " +
                                                      std::to_string(n.offset));
                    return a / b;
                case '^':
                    if (a == 0.0 && b < 0.0)
                        throw EvalError(n.offset, "zero raised to a negative power at offset " +
                                                      std::to_string(n.offset));
                    if (a < 0.0 && b != std::rint(b))
                        throw EvalError(n.offset,
                                        "negative base raised to a non-integer power at offset " +
                                            std::to_string(n.offset));
                    return std::pow(a, b);
                default: break;
            }
            break;
        }
        case ExprKind::Call: {
            double a = eval_node(*n.args[0], t);
            switch (n.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Exp: return std::exp(a);
                case Func::Log:
                    if (a <= 0.0)
                        throw EvalError(n.offset, "log of a non-positive value at offset " +
                                                      std::to_string(n.offset));
                    return std::log(a);
                case Func::Sqrt:
                    if (a < 0.0)
                        throw EvalError(n.offset, "sqrt of a negative value at offset " +
                                                      std::to_string(n.offset));
                    return std::sqrt(a);
                case Func::Abs: return std::fabs(a);
                case Func::Min: return std::fmin(a, eval_node(*n.args[1], t));
                case Func::Max: return std::fmax(a, eval_node(*n.args[1], t));
            }
            break;
        }
    }
    throw Error("corrupt expression tree");
}

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

void serialize_node(const ExprNode& n, std::string& out) {
    switch (n.kind) {
        case ExprKind::Number:
            out += format_double(n.number);
            return;
        case ExprKind::Time:
            out += 't';
            return;
        case ExprKind::Constant:
            out += n.constant;
            return;
        case ExprKind::Negate:
            out += "(-";
            serialize_node(*n.args[0], out);
            out += ')';
            return;
        case ExprKind::Binary:
            out += '(';
            serialize_node(*n.args[0], out);
            out += n.op;
            serialize_node(*n.args[1], out);
            out += ')';
            return;
        case ExprKind::Call:
            out += func_name(n.func);
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ',';
                serialize_node(*n.args[i], out);
            }
            out += ')';
            return;
    }
}

bool equal_nodes(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::Number: {
            // bit comparison keeps -0 and NaN payloads distinguishable
            double x = a.number, y = b.number;
            return std::memcmp(&x, &y, sizeof x) == 0;
        }
        case ExprKind::Time: return true;
        case ExprKind::Constant: return a.constant == b.constant;
        case ExprKind::Binary:
            if (a.op != b.op) return false;
            break;
        case ExprKind::Call:
            if (a.func != b.func) return false;
            break;
        case ExprKind::Negate: break;
    }
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equal_nodes(*a.args[i], *b.args[i])) return false;
    return true;
}

}  // namespace

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
        case Func::Abs: return "abs";
        case Func::Min: return "min";
        case Func::Max: return "max";
    }
    return "?";
}

Expr Expr::parse(std::string_view source) { return Expr(Parser(source).parse()); }

Expr Expr::number(double value) {
    ExprNode n;
            n.kind = ExprKind::Number;
    n.number = value;
    return Expr(make_node(std::move(n)));
}

Expr Expr::time() {
    ExprNode n;
    n.kind = ExprKind::Time;
    return Expr(make_node(std::move(n)));
}

Expr Expr::constant(std::string_view name) {
    if (name != "pi" && name != "e") throw Error("unknown constant '" + std::string(name) + "'");
    ExprNode n;
            n.kind = ExprKind::Constant;
    n.constant = std::string(name);
    return Expr(make_node(std::move(n)));
}

Expr Expr::negate(Expr arg) {
    ExprNode n;
            n.kind = ExprKind::Negate;
    n.args = {arg.root_};
    return Expr(make_node(std::move(n)));
}

Expr Expr::binary(char op, Expr lhs, Expr rhs) {
    if (!std::strchr("+-*/^", op)) throw Error("unknown operator");
    ExprNode n;
            n.kind = ExprKind::Binary;
    n.op = op;
    n.args = {lhs.root_, rhs.root_};
    return Expr(make_node(std::move(n)));
}

Expr Expr::call(std::string_view name, std::vector<Expr> args) {
    const FuncInfo* fi = lookup_func(name);
    if (!fi) throw Error("unknown function '" + std::string(name) + "'");
    if (static_cast<int>(args.size()) != fi->arity) throw Error("wrong arity");
    ExprNode n;
            n.kind = ExprKind::Call;
    n.func = fi->func;
    for (auto& a : args) n.args.push_back(a.root_);
    return Expr(make_node(std::move(n)));
}

double Expr::eval(double t) const { return eval_node(root(), t); }

std::string Expr::serialize() const {
    std::string out;
    serialize_node(root(), out);
    return out;
}

bool Expr::operator==(const Expr& other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return equal_nodes(*root_, *other.root_);
}

const ExprNode& Expr::root() const {
    if (!root_) throw Error("empty expression");
    return *root_;
}

}  // namespace hamosc
