#include "frontal/scene_file.hpp"

#include "frontal/catalog.hpp"
#include "frontal/errors.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace frontal {

namespace {

struct Piece {
    std::string text;
    std::size_t column = 0;  // 1-based
};

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return std::string(s.substr(a, b - a));
}

Piece trimmed(std::string_view s, std::size_t column) {
    std::size_t a = 0;
    while (a < s.size() && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    return {trim(s), column + a};
}

// split at `sep` outside parentheses
std::vector<Piece> split_top(const Piece& p, char sep, std::size_t line) {
    std::vector<Piece> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= p.text.size(); ++i) {
        const char c = i < p.text.size() ? p.text[i] : sep;
        if (c == '(')
            ++depth;
        else if (c == ')')
            --depth;
        if (depth < 0)
            throw SceneError("unbalanced ')'", line, p.column + i);
        if (c == sep && depth == 0) {
            out.push_back(trimmed(std::string_view(p.text).substr(start, i - start), p.column + start));
            start = i + 1;
        }
    }
    if (depth != 0)
        throw SceneError("unbalanced '('", line, p.column + p.text.size());
    return out;
}

// "(a, b, c)" -> pieces a, b, c
std::vector<Piece> tuple_items(const Piece& p, std::size_t line) {
    if (p.text.size() < 2 || p.text.front() != '(' || p.text.back() != ')')
        throw SceneError("expected a parenthesized tuple", line, p.column);
    const Piece inner = trimmed(std::string_view(p.text).substr(1, p.text.size() - 2), p.column + 1);
    if (inner.text.empty())
        throw SceneError("empty tuple", line, p.column);
    return split_top(inner, ',', line);
}

struct SourceExpr {
    Expression expr;
    std::size_t line = 0;
    std::size_t column = 0;
    std::string text;

    // column of the first whole-word occurrence of `name`
    std::size_t column_of(const std::string& name) const {
        auto word = [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; };
        for (auto at = text.find(name); at != std::string::npos; at = text.find(name, at + 1)) {
            const auto end = at + name.size();
            if ((at == 0 || !word(text[at - 1])) && (end == text.size() || !word(text[end])))
                return column + at;
        }
        return column;
    }
};

SourceExpr parse_expr(const Piece& p, std::size_t line) {
    if (p.text.empty())
        throw SceneError("missing expression", line, p.column);
    try {
        return {Expression::parse(p.text), line, p.column, p.text};
    } catch (const ParseError& e) {
        std::string msg = e.what();
        const auto at = msg.rfind(" at position ");
        if (at != std::string::npos)
            msg.resize(at);
        throw SceneError(msg, line, p.column + e.position());
    }
}

struct Binding {
    std::string name;
    SourceExpr value;
};

struct ChartBlock {
    std::string id;
    std::size_t line = 0;
    std::vector<std::string> vars;
    std::optional<std::vector<std::pair<SourceExpr, SourceExpr>>> box, core;
    std::vector<bool> periodic;
    std::vector<Binding> lets;
    std::optional<std::vector<SourceExpr>> f, tangent;
    std::optional<std::vector<std::vector<SourceExpr>>> frame;
};

double constant_value(const SourceExpr& e, const std::map<std::string, Expression>& params) {
    const Expression v = e.expr.substitute(params);
    const auto names = v.variables();
    if (!names.empty())
        throw SceneError("unknown identifier '" + names.front() + "' in a constant", e.line,
                         e.column_of(names.front()));
    try {
        const double zero[1] = {0.0};
        const std::string dummy[1] = {"_"};
        return v.eval(zero, dummy);
    } catch (const EvalError& err) {
        throw SceneError(err.what(), e.line, e.column);
    }
}

int parse_int(const Piece& p, std::size_t line) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(p.text, &used);
        if (used == p.text.size())
            return v;
    } catch (const std::exception&) {
    }
    throw SceneError("expected an integer, got '" + p.text + "'", line, p.column);
}

bool parse_bool(const Piece& p, std::size_t line) {
    if (p.text == "true" || p.text == "1")
        return true;
    if (p.text == "false" || p.text == "0")
        return false;
    throw SceneError("expected true or false, got '" + p.text + "'", line, p.column);
}

bool is_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::vector<std::pair<SourceExpr, SourceExpr>> parse_intervals(const Piece& v, std::size_t line) {
    std::vector<std::pair<SourceExpr, SourceExpr>> out;
    for (const auto& item : split_top(v, ',', line)) {
        const auto ends = tuple_items(item, line);
        if (ends.size() != 2)
            throw SceneError("an interval is written (lo, hi)", line, item.column);
        out.emplace_back(parse_expr(ends[0], line), parse_expr(ends[1], line));
    }
    return out;
}

std::vector<SourceExpr> parse_vector(const Piece& v, std::size_t line) {
    std::vector<SourceExpr> out;
    for (const auto& item : tuple_items(v, line))
        out.push_back(parse_expr(item, line));
    return out;
}

std::vector<std::vector<SourceExpr>> parse_frame(const Piece& v, std::size_t line) {
    std::vector<std::vector<SourceExpr>> out;
    for (const auto& item : split_top(v, ';', line))
        out.push_back(parse_vector(item, line));
    return out;
}

} // namespace

SceneSpec parse_scene(std::string_view text, const ParameterMap& overrides) {
    SceneSpec spec;
    std::vector<std::pair<std::string, SourceExpr>> params;
    std::vector<Binding> lets;
    std::optional<std::vector<SourceExpr>> f, tangent;
    std::optional<std::vector<std::vector<SourceExpr>>> frame;
    std::vector<ChartBlock> charts;
    bool have_dim = false, have_ambient = false, have_domain = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        if (!raw.empty() && raw.back() == '\r')
            raw.remove_suffix(1);
        const Piece line = trimmed(raw, 1);
        if (line.text.empty())
            continue;
        if (line.text.front() == '[') {
            if (line.text.back() != ']')
                throw SceneError("section header needs a closing ']'", line_no, line.column);
            const std::string name = trim(std::string_view(line.text).substr(1, line.text.size() - 2));
            if (name.rfind("chart.", 0) != 0 || name.size() == 6)
                throw SceneError("unknown section '" + name + "'", line_no, line.column);
            ChartBlock block;
            block.id = name.substr(6);
            block.line = line_no;
            for (const auto& c : charts)
                if (c.id == block.id)
                    throw SceneError("duplicate chart '" + block.id + "'", line_no, line.column);
            charts.push_back(std::move(block));
            continue;
        }
        const auto eq = line.text.find('=');
        if (eq == std::string::npos)
            throw SceneError("expected 'key = value'", line_no, line.column);
        const Piece key = trimmed(std::string_view(line.text).substr(0, eq), line.column);
        const Piece value = trimmed(std::string_view(line.text).substr(eq + 1), line.column + eq + 1);
        ChartBlock* chart = charts.empty() ? nullptr : &charts.back();

        std::string head = key.text, name;
        if (const auto sp = key.text.find_first_of(" \t"); sp != std::string::npos) {
            head = key.text.substr(0, sp);
            name = trim(std::string_view(key.text).substr(sp));
        }
        if (head == "let" || head == "param") {
            if (!is_identifier(name))
                throw SceneError("'" + head + "' needs a name", line_no, key.column);
            if (name == "pi")
                throw SceneError("'pi' cannot be rebound", line_no, key.column);
            SourceExpr e = parse_expr(value, line_no);
            if (head == "param") {
                if (chart)
                    throw SceneError("parameters belong before the first chart", line_no, key.column);
                for (const auto& p : params)
                    if (p.first == name)
                        throw SceneError("duplicate parameter '" + name + "'", line_no, key.column);
                params.emplace_back(name, e);
            } else {
                (chart ? chart->lets : lets).push_back({name, e});
            }
            continue;
        }
        if (!name.empty())
            throw SceneError("unexpected text after key '" + head + "'", line_no, key.column);

        if (chart) {
            if (key.text == "vars") {
                for (const auto& v : split_top(value, ',', line_no)) {
                    if (!is_identifier(v.text) || v.text == "pi")
                        throw SceneError("invalid variable name '" + v.text + "'", line_no, v.column);
                    chart->vars.push_back(v.text);
                }
            } else if (key.text == "box") {
                chart->box = parse_intervals(value, line_no);
            } else if (key.text == "core") {
                chart->core = parse_intervals(value, line_no);
            } else if (key.text == "periodic") {
                for (const auto& v : split_top(value, ',', line_no))
                    chart->periodic.push_back(parse_bool(v, line_no));
            } else if (key.text == "f") {
                chart->f = parse_vector(value, line_no);
            } else if (key.text == "normal_frame") {
                chart->frame = parse_frame(value, line_no);
            } else if (key.text == "tangent") {
                chart->tangent = parse_vector(value, line_no);
            } else {
                throw SceneError("unknown chart key '" + key.text + "'", line_no, key.column);
            }
            continue;
        }
        if (key.text == "id") {
            spec.id = value.text;
        } else if (key.text == "dim") {
            spec.dim = parse_int(value, line_no);
            if (spec.dim < 1 || spec.dim > 3)
                throw SceneError("dim must be 1, 2 or 3", line_no, value.column);
            have_dim = true;
        } else if (key.text == "ambient") {
            spec.ambient = parse_int(value, line_no);
            have_ambient = true;
        } else if (key.text == "domain") {
            try {
                spec.domain = parse_domain(value.text);
            } catch (const SceneError& e) {
                throw SceneError(e.what(), line_no, value.column);
            }
            have_domain = true;
        } else if (key.text == "betti") {
            for (const auto& v : split_top(value, ',', line_no))
                spec.betti.push_back(parse_int(v, line_no));
        } else if (key.text == "orientation_sign") {
            spec.orientation_sign = parse_int(value, line_no);
            if (spec.orientation_sign != 1 && spec.orientation_sign != -1)
                throw SceneError("orientation_sign must be 1 or -1", line_no, value.column);
        } else if (key.text == "f") {
            f = parse_vector(value, line_no);
        } else if (key.text == "normal_frame") {
            frame = parse_frame(value, line_no);
        } else if (key.text == "tangent") {
            tangent = parse_vector(value, line_no);
        } else {
            throw SceneError("unknown key '" + key.text + "'", line_no, key.column);
        }
    }

    if (!have_dim || !have_ambient || !have_domain)
        throw SceneError("scene needs dim, ambient and domain");
    if (charts.empty())
        throw SceneError("scene has no [chart.<id>] section");
    if (spec.id.empty())
        spec.id = "scene";

    for (const auto& [name, v] : overrides)
        if (std::none_of(params.begin(), params.end(), [&](const auto& p) { return p.first == name; }))
            throw SceneError("scene has no parameter '" + name + "'");
    std::map<std::string, Expression> param_bind;
    for (const auto& [name, e] : params) {
        const auto it = overrides.find(name);
        const double v = it != overrides.end() ? it->second : constant_value(e, param_bind);
        param_bind[name] = Expression::number(v);
        spec.parameters[name] = v;
    }

    for (auto& block : charts) {
        Chart c;
        c.id = block.id;
        c.vars = block.vars;
        const std::size_t n = static_cast<std::size_t>(spec.dim);
        if (c.vars.size() != n)
            throw SceneError("chart '" + c.id + "' needs " + std::to_string(n) + " variables", block.line, 1);
        if (!block.box)
            throw SceneError("chart '" + c.id + "' has no box", block.line, 1);
        auto intervals = [&](const std::vector<std::pair<SourceExpr, SourceExpr>>& src) {
            std::vector<Interval> out;
            for (const auto& [lo, hi] : src)
                out.push_back({constant_value(lo, param_bind), constant_value(hi, param_bind)});
            if (out.size() != n)
                throw SceneError("chart '" + c.id + "' needs one interval per variable",
                                 src.empty() ? block.line : src.front().first.line, 1);
            return out;
        };
        c.box = intervals(*block.box);
        c.core = block.core ? intervals(*block.core) : c.box;
        c.periodic = block.periodic.empty() ? std::vector<bool>(n, false) : block.periodic;
        if (c.periodic.size() != n)
            throw SceneError("chart '" + c.id + "' needs one periodic flag per variable", block.line, 1);

        std::vector<const Binding*> order;
        for (const auto& b : lets)
            order.push_back(&b);
        for (const auto& b : block.lets)
            order.push_back(&b);
        auto check_names = [&](const SourceExpr& e, const std::map<std::string, Expression>& bound) {
            for (const auto& v : e.expr.variables())
                if (!bound.count(v) && std::find(c.vars.begin(), c.vars.end(), v) == c.vars.end())
                    throw SceneError("unknown identifier '" + v + "' in chart '" + c.id + "'", e.line,
                                     e.column_of(v));
        };
        // global lets may name chart lets, so substitute until nothing bound remains
        std::map<std::string, Expression> raw;
        for (const auto* b : order)
            raw[b->name] = b->value.expr;
        auto resolve = [&](const SourceExpr& e) {
            Expression x = e.expr;
            for (std::size_t pass = 0; pass <= order.size() + 1; ++pass) {
                bool changed = false;
                for (const auto& v : x.variables())
                    if (raw.count(v) || param_bind.count(v))
                        changed = true;
                if (!changed)
                    return x;
                x = x.substitute(raw).substitute(param_bind);
            }
            throw SceneError("cyclic let bindings in chart '" + c.id + "'", e.line, e.column);
        };
        std::map<std::string, Expression> all_bound = raw;
        for (const auto& [name, e] : param_bind)
            all_bound[name] = e;
        for (const auto* b : order)
            check_names(b->value, all_bound);

        auto resolve_all = [&](const std::vector<SourceExpr>& src) {
            std::vector<Expression> out;
            for (const auto& e : src) {
                check_names(e, all_bound);
                out.push_back(resolve(e));
            }
            return out;
        };
        const auto& fsrc = block.f ? block.f : f;
        if (!fsrc)
            throw SceneError("chart '" + c.id + "' has no f", block.line, 1);
        c.f = resolve_all(*fsrc);
        const bool local_shape = block.frame || block.tangent;
        const auto& frame_src = local_shape ? block.frame : frame;
        const auto& tangent_src = local_shape ? block.tangent : tangent;
        if (frame_src)
            for (const auto& v : *frame_src)
                c.frame.push_back(resolve_all(v));
        if (tangent_src)
            c.tangent = resolve_all(*tangent_src);
        spec.charts.push_back(std::move(c));
    }
    return spec;
}

std::string describe_validation(const ValidationReport& r) {
    std::ostringstream os;
    os.precision(3);
    os << "validation failed: ";
    for (std::size_t i = 0; i < r.failures.size() && i < 3; ++i)
        os << (i ? "; " : "") << r.failures[i];
    if (r.failures.size() > 3)
        os << "; ...";
    os << " (max norm error " << r.max_norm_error << ", orthogonality " << r.max_orthogonality_error
       << ", tangency " << r.max_tangency_error << ", parallel " << r.max_parallel_error << ")";
    return os.str();
}

FrontalScene load_scene_text(std::string_view text, const ParameterMap& overrides, int validation_samples) {
    FrontalScene scene(parse_scene(text, overrides));
    const auto report = frontal_validate(scene, validation_samples);
    if (!report.passed())
        throw SceneError(describe_validation(report));
    return scene;
}

FrontalScene load_scene_file(const std::string& path, const ParameterMap& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SceneError("cannot open scene file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scene_text(ss.str(), overrides);
}

FrontalScene load_scene(const std::string& path_or_name, const ParameterMap& overrides) {
    if (is_catalog_name(path_or_name) && !std::filesystem::exists(path_or_name))
        return load_catalog_scene(path_or_name, overrides);
    return load_scene_file(path_or_name, overrides);
}

} // namespace frontal
