#include "madelung/exprlang.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace madelung::expr {

namespace {

struct FunctionInfo {
    const char* name;
    Function fn;
    std::size_t arity;
};

constexpr std::array<FunctionInfo, 11> kFunctions{{
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"tan", Function::Tan, 1},
    {"exp", Function::Exp, 1},
    {"ln", Function::Ln, 1},
    {"sqrt", Function::Sqrt, 1},
    {"abs", Function::Abs, 1},
    {"atan2", Function::Atan2, 2},
    {"re", Function::Re, 1},
    {"im", Function::Im, 1},
    {"conj", Function::Conj, 1},
}};

NodePtr make_number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Number;
    n->number = v;
    return n;
}

NodePtr make_constant(Constant c) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Constant;
    n->constant = c;
    return n;
}

NodePtr make_variable(Variable v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Variable;
    n->variable = v;
    return n;
}

NodePtr make_negate(NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Negate;
    n->children = {std::move(a)};
    return n;
}

NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->children = {std::move(a), std::move(b)};
    return n;
}

NodePtr make_call(Function f, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Call;
    n->function = f;
    n->children = std::move(args);
    return n;
}

// Recursive descent over the grammar
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' args ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse_all() {
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'", "operator or end of input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg, const std::string& expected) const {
        throw ParseError(pos_, msg, expected);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) fail("unexpected end of input", std::string("'") + c + "'");
            fail("unexpected '" + std::string(1, src_[pos_]) + "'", std::string("'") + c + "'");
        }
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = make_binary(BinaryOp::Add, lhs, parse_term());
            else if (accept('-')) lhs = make_binary(BinaryOp::Sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = make_binary(BinaryOp::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = make_binary(BinaryOp::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_negate(parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_binary(BinaryOp::Pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input", "expression");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail("unexpected '" + std::string(1, c) + "'", "expression");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) {
            pos_ = start;
            fail("malformed number", "digit");
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            // Only an exponent if digits follow; otherwise 'e' is left for the
            // next token (and will be rejected as a missing operator).
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;
        }
        double v = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
            pos_ = start;
            fail("number out of range", "finite number");
        }
        return make_number(v);
    }

    NodePtr parse_name() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view id = src_.substr(start, pos_ - start);

        for (const auto& info : kFunctions) {
            if (id != info.name) continue;
            if (!accept('(')) fail("function '" + std::string(id) + "' needs an argument list", "'('");
            std::vector<NodePtr> args;
            args.push_back(parse_expr());
            while (accept(',')) args.push_back(parse_expr());
            expect(')');
            if (args.size() != info.arity) {
                throw ParseError(start,
                                 "function '" + std::string(id) + "' takes " +
                                     std::to_string(info.arity) + " argument(s), got " +
                                     std::to_string(args.size()),
                                 std::to_string(info.arity) + " argument(s)");
            }
            return make_call(info.fn, std::move(args));
        }
        if (id == "x") return make_variable(Variable::X);
        if (id == "y") return make_variable(Variable::Y);
        if (id == "pi") return make_constant(Constant::Pi);
        if (id == "e") return make_constant(Constant::E);
        if (id == "i") return make_constant(Constant::I);
        throw ParseError(start, "unknown identifier '" + std::string(id) + "'",
                         "x, y, pi, e, i or a function name");
    }
};

bool is_small_integer(Complex b, long& n) {
    if (b.imag() != 0.0) return false;
    const double r = b.real();
    if (std::abs(r) > 1024.0 || std::trunc(r) != r) return false;
    n = static_cast<long>(r);
    return true;
}

Complex integer_power(Complex a, long n) {
    const bool invert = n < 0;
    unsigned long e = static_cast<unsigned long>(invert ? -n : n);
    Complex result{1.0, 0.0};
    while (e) {
        if (e & 1u) result *= a;
        a *= a;
        e >>= 1u;
    }
    return invert ? Complex{1.0, 0.0} / result : result;
}

Complex power(Complex a, Complex b) {
    long n = 0;
    if (is_small_integer(b, n)) return integer_power(a, n);
    if (a.imag() == 0.0 && a.real() >= 0.0 && b.imag() == 0.0) return {std::pow(a.real(), b.real()), 0.0};
    if (a == Complex{0.0, 0.0}) {
        if (b.real() > 0.0) return {0.0, 0.0};
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    return std::exp(b * std::log(a));
}

Complex eval_node(const Node& n, double x, double y) {
    switch (n.kind) {
        case Node::Kind::Number: return {n.number, 0.0};
        case Node::Kind::Constant:
            switch (n.constant) {
                case Constant::Pi: return {std::numbers::pi, 0.0};
                case Constant::E: return {std::numbers::e, 0.0};
                case Constant::I: return {0.0, 1.0};
            }
            break;
        case Node::Kind::Variable: return {n.variable == Variable::X ? x : y, 0.0};
        case Node::Kind::Negate: {
            // + 0.0 turns -0 into +0 so "-4" stays on the principal side of branch cuts
            const Complex v = eval_node(*n.children[0], x, y);
            return {-v.real() + 0.0, -v.imag() + 0.0};
        }
        case Node::Kind::Binary: {
            const Complex a = eval_node(*n.children[0], x, y);
            const Complex b = eval_node(*n.children[1], x, y);
            switch (n.op) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div: return a / b;
                case BinaryOp::Pow: return power(a, b);
            }
            break;
        }
        case Node::Kind::Call: {
            const Complex a = eval_node(*n.children[0], x, y);
            switch (n.function) {
                case Function::Sin: return std::sin(a);
                case Function::Cos: return std::cos(a);
                case Function::Tan: return std::tan(a);
                case Function::Exp: return std::exp(a);
                case Function::Ln: return std::log(a);
                case Function::Sqrt: return std::sqrt(a);
                case Function::Abs: return {std::abs(a), 0.0};
                case Function::Atan2: {
                    const Complex b = eval_node(*n.children[1], x, y);
                    return {std::atan2(a.real(), b.real()), 0.0};
                }
                case Function::Re: return {a.real(), 0.0};
                case Function::Im: return {a.imag(), 0.0};
                case Function::Conj: return std::conj(a);
            }
            break;
        }
    }
    return {std::numeric_limits<double>::quiet_NaN(), 0.0};
}

void unparse_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case Node::Kind::Number: {
            std::array<char, 32> buf{};
            auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.number);
            (void)ec;
            out.append(buf.data(), end);
            return;
        }
        case Node::Kind::Constant:
            out += n.constant == Constant::Pi ? "pi" : n.constant == Constant::E ? "e" : "i";
            return;
        case Node::Kind::Variable: out += n.variable == Variable::X ? "x" : "y"; return;
        case Node::Kind::Negate:
            out += "(-";
            unparse_node(*n.children[0], out);
            out += ')';
            return;
        case Node::Kind::Binary: {
            static constexpr char ops[] = {'+', '-', '*', '/', '^'};
            out += '(';
            unparse_node(*n.children[0], out);
            out += ops[static_cast<int>(n.op)];
            unparse_node(*n.children[1], out);
            out += ')';
            return;
        }
        case Node::Kind::Call:
            out += name(n.function);
            out += '(';
            for (std::size_t k = 0; k < n.children.size(); ++k) {
                if (k) out += ',';
                unparse_node(*n.children[k], out);
            }
            out += ')';
            return;
    }
}

bool same_tree(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
    switch (a.kind) {
        case Node::Kind::Number:
            if (std::bit_cast<std::uint64_t>(a.number) != std::bit_cast<std::uint64_t>(b.number)) return false;
            break;
        case Node::Kind::Constant:
            if (a.constant != b.constant) return false;
            break;
        case Node::Kind::Variable:
            if (a.variable != b.variable) return false;
            break;
        case Node::Kind::Binary:
            if (a.op != b.op) return false;
            break;
        case Node::Kind::Call:
            if (a.function != b.function) return false;
            break;
        case Node::Kind::Negate: break;
    }
    for (std::size_t k = 0; k < a.children.size(); ++k)
        if (!same_tree(*a.children[k], *b.children[k])) return false;
    return true;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::string message, std::string expected)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message +
                         " (expected " + expected + ")"),
      offset_(offset),
      message_(std::move(message)),
      expected_(std::move(expected)) {}

Expr parse(std::string_view src) { return Expr(Parser(src).parse_all()); }

Complex Expr::eval(double x, double y) const { return eval_node(*root_, x, y); }

ComplexField Expr::eval_field(const GridSpec& spec) const {
    spec.validate();
    ComplexField out(spec);
    for (std::size_t j = 0; j < spec.ny; ++j) {
        for (std::size_t i = 0; i < spec.nx; ++i) {
            const std::size_t k = spec.index(i, j);
            const Complex v = eval(spec.x(i), spec.y(j));
            if (std::isfinite(v.real()) && std::isfinite(v.imag())) out[k] = v;
            else out.invalidate(k);
        }
    }
    return out;
}

std::string Expr::unparse() const {
    std::string out;
    unparse_node(*root_, out);
    return out;
}

bool operator==(const Expr& a, const Expr& b) { return same_tree(*a.root_, *b.root_); }

std::size_t arity(Function f) {
    for (const auto& info : kFunctions)
        if (info.fn == f) return info.arity;
    return 0;
}

const char* name(Function f) {
    for (const auto& info : kFunctions)
        if (info.fn == f) return info.name;
    return "?";
}

}  // namespace madelung::expr
