#include "frontal/expr.hpp"

#include "frontal/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>

namespace frontal {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

constexpr std::array<std::pair<std::string_view, Function>, 6> kFunctions{{
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"tan", Function::Tan},
    {"exp", Function::Exp},
    {"log", Function::Log},
    {"sqrt", Function::Sqrt},
}};

constexpr std::array<std::string_view, 12> kNonSmooth{
    "abs", "fabs", "min", "max", "sign", "sgn", "floor", "ceil", "round", "heaviside", "step", "mod"};

NodePtr make(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>* allowed)
        : src_(src), allowed_(allowed) {}

    NodePtr parse() {
        auto e = expr();
        skip();
        if (pos_ != src_.size())
            fail("expected operator or end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what, std::size_t at) const {
        throw ParseError(ParseError::Kind::Syntax, at, "syntax error: " + what);
    }
    [[noreturn]] void fail(const std::string& what) const { fail(what, pos_); }

    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make(NodeKind::Add, lhs, term());
            else if (accept('-'))
                lhs = make(NodeKind::Sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        auto lhs = factor();
        for (;;) {
            if (accept('*'))
                lhs = make(NodeKind::Mul, lhs, factor());
            else if (accept('/'))
                lhs = make(NodeKind::Div, lhs, factor());
            else
                return lhs;
        }
    }

    NodePtr factor() {
        const bool negate = accept('-');
        auto base = atom();
        if (accept('^')) {
            skip();
            const std::size_t at = pos_;
            if (!(std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.'))
                fail("expected numeric exponent", at);
            auto p = std::make_shared<ExprNode>(*make(NodeKind::Pow, base));
            p->value = number_value();
            base = p;
        }
        return negate ? make(NodeKind::Neg, base) : base;
    }

    double number_value() {
        skip();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && src_[start] == '.'))
            fail("expected number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-'))
                ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p])))
                    ++p;
                pos_ = p;
            } else {
                fail("malformed exponent", pos_);
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        return std::strtod(text.c_str(), nullptr);
    }

    NodePtr atom() {
        const char c = peek();
        const std::size_t at = pos_;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            auto n = std::make_shared<ExprNode>();
            n->kind = NodeKind::Number;
            n->value = number_value();
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            const std::string_view ident = src_.substr(pos_, end - pos_);
            pos_ = end;
            if (peek() == '(') {
                for (const auto& [name, fn] : kFunctions) {
                    if (name == ident) {
                        accept('(');
                        auto arg = expr();
                        if (!accept(')'))
                            fail("expected ')'");
                        auto n = std::make_shared<ExprNode>(*make(NodeKind::Call, arg));
                        n->function = fn;
                        return n;
                    }
                }
                if (std::find(kNonSmooth.begin(), kNonSmooth.end(), ident) != kNonSmooth.end())
                    throw ParseError(ParseError::Kind::NonSmooth, at,
                                     "non-smooth primitive '" + std::string(ident) + "'");
                throw ParseError(ParseError::Kind::UnknownIdentifier, at,
                                 "unknown function '" + std::string(ident) + "'");
            }
            for (const auto& [name, fn] : kFunctions)
                if (name == ident)
                    fail("expected '(' after function name");
            if (std::find(kNonSmooth.begin(), kNonSmooth.end(), ident) != kNonSmooth.end())
                throw ParseError(ParseError::Kind::NonSmooth, at,
                                 "non-smooth primitive '" + std::string(ident) + "'");
            if (ident == "pi")
                return make(NodeKind::Pi);
            if (allowed_ &&
                std::find(allowed_->begin(), allowed_->end(), ident) == allowed_->end())
                throw ParseError(ParseError::Kind::UnknownIdentifier, at,
                                 "unknown identifier '" + std::string(ident) + "'");
            auto n = std::make_shared<ExprNode>();
            n->kind = NodeKind::Variable;
            n->name = std::string(ident);
            return n;
        }
        if (accept('(')) {
            auto e = expr();
            if (!accept(')'))
                fail("expected ')'");
            return e;
        }
        fail(pos_ < src_.size() ? "unexpected character '" + std::string(1, c) + "'"
                                : "unexpected end of input");
    }

    std::string_view src_;
    const std::vector<std::string>* allowed_;
    std::size_t pos_ = 0;
};

void print(const ExprNode& n, std::string& out) {
    switch (n.kind) {
    case NodeKind::Number:
        if (n.value < 0.0 || std::signbit(n.value)) {
            out += "(-";
            out += format_number(-n.value);
            out += ")";
        } else {
            out += format_number(n.value);
        }
        return;
    case NodeKind::Variable:
        out += n.name;
        return;
    case NodeKind::Pi:
        out += "pi";
        return;
    case NodeKind::Neg:
        out += "(-";
        print(*n.lhs, out);
        out += ")";
        return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
        static constexpr const char* ops[] = {" + ", " - ", " * ", " / "};
        out += "(";
        print(*n.lhs, out);
        out += ops[static_cast<int>(n.kind) - static_cast<int>(NodeKind::Add)];
        print(*n.rhs, out);
        out += ")";
        return;
    }
    case NodeKind::Pow:
        out += "(";
        print(*n.lhs, out);
        out += "^";
        out += format_number(n.value);
        out += ")";
        return;
    case NodeKind::Call:
        out += function_name(n.function);
        out += "(";
        print(*n.lhs, out);
        out += ")";
        return;
    }
}

void collect(const ExprNode& n, std::vector<std::string>& names) {
    if (n.kind == NodeKind::Variable) {
        if (std::find(names.begin(), names.end(), n.name) == names.end())
            names.push_back(n.name);
        return;
    }
    if (n.lhs)
        collect(*n.lhs, names);
    if (n.rhs)
        collect(*n.rhs, names);
}

NodePtr substitute_node(const NodePtr& n, const std::map<std::string, Expression>& b) {
    if (n->kind == NodeKind::Variable) {
        auto it = b.find(n->name);
        return it == b.end() ? n : it->second.node();
    }
    if (!n->lhs)
        return n;
    auto lhs = substitute_node(n->lhs, b);
    auto rhs = n->rhs ? substitute_node(n->rhs, b) : nullptr;
    if (lhs == n->lhs && rhs == n->rhs)
        return n;
    auto copy = std::make_shared<ExprNode>(*n);
    copy->lhs = lhs;
    copy->rhs = rhs;
    return copy;
}

bool equal(const ExprNode& a, const ExprNode& b) {
    if (&a == &b)
        return true;
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case NodeKind::Number:
        return a.value == b.value;
    case NodeKind::Variable:
        return a.name == b.name;
    case NodeKind::Pi:
        return true;
    case NodeKind::Pow:
        return a.value == b.value && equal(*a.lhs, *b.lhs);
    case NodeKind::Call:
        return a.function == b.function && equal(*a.lhs, *b.lhs);
    case NodeKind::Neg:
        return equal(*a.lhs, *b.lhs);
    default:
        return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    }
}

Jet apply(Function f, const Jet& x) {
    switch (f) {
    case Function::Sin: return sin(x);
    case Function::Cos: return cos(x);
    case Function::Tan: return tan(x);
    case Function::Exp: return exp(x);
    case Function::Log: return log(x);
    case Function::Sqrt: return sqrt(x);
    }
    throw EvalError("unknown function");
}

struct JetEvaluator {
    std::span<const double> point;
    std::span<const std::string> vars;
    int order;
    int nvars;

    Jet operator()(const ExprNode& n) const {
        switch (n.kind) {
        case NodeKind::Number: return Jet::constant(n.value, nvars, order);
        case NodeKind::Pi: return Jet::constant(std::numbers::pi, nvars, order);
        case NodeKind::Variable: {
            for (std::size_t i = 0; i < vars.size(); ++i)
                if (vars[i] == n.name)
                    return Jet::variable(static_cast<int>(i), point[i], nvars, order);
            throw EvalError("variable '" + n.name + "' is not bound");
        }
        case NodeKind::Neg: return -(*this)(*n.lhs);
        case NodeKind::Add: return (*this)(*n.lhs) + (*this)(*n.rhs);
        case NodeKind::Sub: return (*this)(*n.lhs) - (*this)(*n.rhs);
        case NodeKind::Mul: return (*this)(*n.lhs) * (*this)(*n.rhs);
        case NodeKind::Div: return (*this)(*n.lhs) / (*this)(*n.rhs);
        case NodeKind::Pow: return pow((*this)(*n.lhs), n.value);
        case NodeKind::Call: return apply(n.function, (*this)(*n.lhs));
        }
        throw EvalError("corrupt expression node");
    }
};

} // namespace

const char* function_name(Function f) {
    for (const auto& [name, fn] : kFunctions)
        if (fn == f)
            return name.data();
    return "?";
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Expression::Expression() : root_(make(NodeKind::Number)) {}

Expression Expression::parse(std::string_view source, const std::vector<std::string>* allowed) {
    return Expression(Parser(source, allowed).parse());
}

Expression Expression::number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Number;
    n->value = v;
    return Expression(n);
}

Expression Expression::variable(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Variable;
    n->name = std::move(name);
    return Expression(n);
}

Expression Expression::pi() { return Expression(make(NodeKind::Pi)); }

Expression Expression::call(Function f, const Expression& arg) {
    auto n = std::make_shared<ExprNode>(*make(NodeKind::Call, arg.root_));
    n->function = f;
    return Expression(n);
}

Expression Expression::power(const Expression& base, double exponent) {
    auto n = std::make_shared<ExprNode>(*make(NodeKind::Pow, base.root_));
    n->value = exponent;
    return Expression(n);
}

Expression operator+(const Expression& a, const Expression& b) {
    return Expression(make(NodeKind::Add, a.root_, b.root_));
}
Expression operator-(const Expression& a, const Expression& b) {
    return Expression(make(NodeKind::Sub, a.root_, b.root_));
}
Expression operator*(const Expression& a, const Expression& b) {
    return Expression(make(NodeKind::Mul, a.root_, b.root_));
}
Expression operator/(const Expression& a, const Expression& b) {
    return Expression(make(NodeKind::Div, a.root_, b.root_));
}
Expression operator-(const Expression& a) { return Expression(make(NodeKind::Neg, a.root_)); }

std::string Expression::to_string() const {
    std::string out;
    print(*root_, out);
    return out;
}

std::vector<std::string> Expression::variables() const {
    std::vector<std::string> names;
    collect(*root_, names);
    return names;
}

Expression Expression::substitute(const std::map<std::string, Expression>& bindings) const {
    return Expression(substitute_node(root_, bindings));
}

bool Expression::structurally_equal(const Expression& other) const {
    return equal(*root_, *other.root_);
}

Jet Expression::eval_jet(std::span<const double> point, int order,
                         std::span<const std::string> vars) const {
    if (order < 0 || order > kMaxJetOrder)
        throw EvalError("jet order must be in 0..3");
    if (vars.empty() || vars.size() > static_cast<std::size_t>(kMaxJetVars))
        throw EvalError("between 1 and 3 variables required");
    if (point.size() != vars.size())
        throw EvalError("point and variable list differ in length");
    return JetEvaluator{point, vars, order, static_cast<int>(vars.size())}(*root_);
}

double Expression::eval(std::span<const double> point, std::span<const std::string> vars) const {
    return eval_jet(point, 0, vars).value();
}

} // namespace frontal
