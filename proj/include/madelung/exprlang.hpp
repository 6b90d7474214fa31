#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "madelung/grid.hpp"

namespace madelung::expr {

using Complex = std::complex<double>;

/// Parse failure. `offset` is a byte offset into the source (may equal its
/// length when input ended early).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::string message, std::string expected);

    std::size_t offset() const { return offset_; }
    const std::string& message() const { return message_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::string message_;
    std::string expected_;
};

enum class Function { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs, Atan2, Re, Im, Conj };
enum class Constant { Pi, E, I };
enum class Variable { X, Y };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { Number, Constant, Variable, Negate, Binary, Call };

    Kind kind;
    double number = 0.0;
    Constant constant = Constant::Pi;
    Variable variable = Variable::X;
    BinaryOp op = BinaryOp::Add;
    Function function = Function::Sin;
    std::vector<NodePtr> children;
};

/// Immutable expression tree; cheap to copy and safe to share across threads.
class Expr {
public:
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    const Node& root() const { return *root_; }

    Complex eval(double x, double y) const;

    /// Evaluates at every cell centre; non-finite results are masked.
    ComplexField eval_field(const GridSpec& spec) const;

    /// Canonical, fully parenthesized source text that parses back to an
    /// identical tree.
    std::string unparse() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    NodePtr root_;
};

Expr parse(std::string_view src);

std::size_t arity(Function f);
const char* name(Function f);

}  // namespace madelung::expr
