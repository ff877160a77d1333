#include "frontal/program.hpp"

#include "frontal/errors.hpp"

#include <numbers>

namespace frontal {

Program::Program(std::vector<std::string> vars) : vars_(std::move(vars)) {
    if (vars_.empty() || vars_.size() > static_cast<std::size_t>(kMaxJetVars))
        throw EvalError("a program needs between 1 and 3 variables");
}

int Program::add(const Expression& e) {
    const int slot = emit(e.root());
    outputs_.push_back(slot);
    return static_cast<int>(outputs_.size()) - 1;
}

int Program::intern(const Instr& ins) {
    const auto key = std::make_tuple(static_cast<int>(ins.kind), static_cast<int>(ins.function),
                                     ins.value, ins.a, ins.b);
    auto it = cache_.find(key);
    if (it != cache_.end())
        return it->second;
    code_.push_back(ins);
    const int id = static_cast<int>(code_.size()) - 1;
    cache_.emplace(key, id);
    return id;
}

int Program::emit(const ExprNode& n) {
    Instr ins{n.kind, Function::Sin, 0.0, -1, -1};
    switch (n.kind) {
    case NodeKind::Number:
        ins.value = n.value;
        break;
    case NodeKind::Pi:
        ins.kind = NodeKind::Number;
        ins.value = std::numbers::pi;
        break;
    case NodeKind::Variable: {
        int idx = -1;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == n.name)
                idx = static_cast<int>(i);
        if (idx < 0)
            throw EvalError("variable '" + n.name + "' is not bound");
        ins.a = idx;
        break;
    }
    case NodeKind::Neg:
        ins.a = emit(*n.lhs);
        break;
    case NodeKind::Pow:
        ins.a = emit(*n.lhs);
        ins.value = n.value;
        break;
    case NodeKind::Call:
        ins.a = emit(*n.lhs);
        ins.function = n.function;
        break;
    default:
        ins.a = emit(*n.lhs);
        ins.b = emit(*n.rhs);
        break;
    }
    return intern(ins);
}

void Program::evaluate(std::span<const double> point, int order, Workspace& ws,
                       std::vector<Jet>& outputs) const {
    if (point.size() != vars_.size())
        throw EvalError("point dimension does not match program variables");
    const int nv = static_cast<int>(vars_.size());
    auto& r = ws.registers;
    r.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& ins = code_[i];
        switch (ins.kind) {
        case NodeKind::Number: r[i] = Jet::constant(ins.value, nv, order); break;
        case NodeKind::Variable: r[i] = Jet::variable(ins.a, point[ins.a], nv, order); break;
        case NodeKind::Neg: r[i] = -r[ins.a]; break;
        case NodeKind::Add: r[i] = r[ins.a] + r[ins.b]; break;
        case NodeKind::Sub: r[i] = r[ins.a] - r[ins.b]; break;
        case NodeKind::Mul: r[i] = r[ins.a] * r[ins.b]; break;
        case NodeKind::Div: r[i] = r[ins.a] / r[ins.b]; break;
        case NodeKind::Pow: r[i] = pow(r[ins.a], ins.value); break;
        case NodeKind::Call:
            switch (ins.function) {
            case Function::Sin: r[i] = sin(r[ins.a]); break;
            case Function::Cos: r[i] = cos(r[ins.a]); break;
            case Function::Tan: r[i] = tan(r[ins.a]); break;
            case Function::Exp: r[i] = exp(r[ins.a]); break;
            case Function::Log: r[i] = log(r[ins.a]); break;
            case Function::Sqrt: r[i] = sqrt(r[ins.a]); break;
            }
            break;
        default: throw EvalError("corrupt program");
        }
    }
    outputs.resize(outputs_.size());
    for (std::size_t k = 0; k < outputs_.size(); ++k)
        outputs[k] = r[outputs_[k]];
}

} // namespace frontal
