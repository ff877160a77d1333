#pragma once

#include "frontal/expr.hpp"
#include "frontal/jet.hpp"

#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace frontal {

/**
 * A set of expressions over one variable list compiled into a single
 * instruction tape. Structurally identical subtrees are shared, so a chart
 * whose components all reuse tan(alpha) evaluates it once per point.
 */
class Program {
public:
    explicit Program(std::vector<std::string> vars);

    /// Compiles `e` and returns its output slot.
    int add(const Expression& e);

    struct Workspace {
        std::vector<Jet> registers;
    };

    /// Evaluates every output at `point` to the given jet order.
    void evaluate(std::span<const double> point, int order, Workspace& ws,
                  std::vector<Jet>& outputs) const;

    std::size_t instruction_count() const { return code_.size(); }
    std::size_t output_count() const { return outputs_.size(); }
    const std::vector<std::string>& variables() const { return vars_; }

private:
    struct Instr {
        NodeKind kind;
        Function function;
        double value;
        int a;
        int b;
    };

    int emit(const ExprNode& n);
    int intern(const Instr& ins);

    std::vector<std::string> vars_;
    std::vector<Instr> code_;
    std::vector<int> outputs_;
    std::map<std::tuple<int, int, double, int, int>, int> cache_;
};

} // namespace frontal
