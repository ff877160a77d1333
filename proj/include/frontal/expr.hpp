#pragma once

#include "frontal/jet.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace frontal {

enum class NodeKind { Number, Variable, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Function { Sin, Cos, Tan, Exp, Log, Sqrt };

const char* function_name(Function f);

struct ExprNode {
    NodeKind kind = NodeKind::Number;
    double value = 0.0;        // Number literal, or the exponent of Pow
    std::string name;          // Variable
    Function function = Function::Sin;
    std::shared_ptr<const ExprNode> lhs;  // operand of unary nodes
    std::shared_ptr<const ExprNode> rhs;
};

/**
 * Immutable closed-form scalar expression.
 *
 * Grammar:
 *   expr   := term (('+'|'-') term)*
 *   term   := factor (('*'|'/') factor)*
 *   factor := ('-')? atom ('^' number)?
 *   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
 *
 * Functions: sin cos tan exp log sqrt. Constant: pi. Every other identifier is a
 * variable. Nodes are shared and never mutated, so copies are cheap and
 * concurrent evaluation is safe.
 */
class Expression {
public:
    Expression();

    /// Parses `source`. With a non-null `allowed`, identifiers outside that list
    /// are rejected as unknown.
    static Expression parse(std::string_view source,
                            const std::vector<std::string>* allowed = nullptr);

    static Expression number(double v);
    static Expression variable(std::string name);
    static Expression pi();
    static Expression call(Function f, const Expression& arg);
    static Expression power(const Expression& base, double exponent);

    friend Expression operator+(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a, const Expression& b);
    friend Expression operator*(const Expression& a, const Expression& b);
    friend Expression operator/(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a);

    /// Fully parenthesized text; parses back to the same tree.
    std::string to_string() const;

    /// Distinct variable names in first-occurrence order.
    std::vector<std::string> variables() const;

    /// Replaces variables by expressions (used for `let` bindings and parameters).
    Expression substitute(const std::map<std::string, Expression>& bindings) const;

    bool structurally_equal(const Expression& other) const;

    /// Taylor jet at `point`, where point[i] is the value of vars[i].
    Jet eval_jet(std::span<const double> point, int order,
                 std::span<const std::string> vars) const;

    double eval(std::span<const double> point, std::span<const std::string> vars) const;

    const ExprNode& root() const { return *root_; }
    std::shared_ptr<const ExprNode> node() const { return root_; }

private:
    explicit Expression(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

    std::shared_ptr<const ExprNode> root_;
};

/// Formats a double so that parsing it returns the same value.
std::string format_number(double v);

} // namespace frontal
