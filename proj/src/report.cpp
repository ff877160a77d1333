#include "frontal/report.hpp"

#include "frontal/catalog.hpp"
#include "frontal/errors.hpp"
#include "frontal/geometry.hpp"
#include "frontal/integrate.hpp"
#include "frontal/morse.hpp"
#include "frontal/parallel.hpp"
#include "frontal/singular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

namespace frontal {

using json = nlohmann::ordered_json;

namespace {

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (long i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

json vec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v)
        a.push_back(x);
    return a;
}

json point_json(const SingularPoint& p) {
    json j;
    j["chart"] = p.chart;
    j["coords"] = vec(p.coords);
    j["image"] = vec(p.image);
    j["kind"] = kind_name(p.kind);
    if (p.ak)
        j["ak"] = "A" + std::to_string(*p.ak + 1);
    else
        j["ak"] = nullptr;
    j["ak_inconclusive"] = p.ak_inconclusive;
    j["kind_ratio"] = p.kind_ratio;
    j["dlambda_eta"] = p.dlambda_eta;
    j["rank_ok"] = p.rank_ok;
    return j;
}

json scene_json(const FrontalScene& scene) {
    const auto& s = scene.spec();
    json j;
    j["id"] = s.id;
    j["dim"] = s.dim;
    j["ambient"] = s.ambient;
    j["domain"] = domain_name(s.domain);
    json charts = json::array();
    for (const auto& c : s.charts)
        charts.push_back(c.id);
    j["charts"] = charts;
    if (s.betti.empty())
        j["betti"] = nullptr;
    else
        j["betti"] = s.betti;
    j["orientation_sign"] = s.orientation_sign;
    json params = json::object();
    for (const auto& [k, v] : s.parameters)
        params[k] = v;
    j["parameters"] = params;
    j["catalog"] = is_catalog_name(s.id);
    return j;
}

json singular_json(const FrontalScene& scene, const SingularSet& set, const AdmissibilityReport& adm) {
    json j;
    j["admissibility"] = verdict_name(adm.verdict);
    j["all_nondegenerate"] = adm.all_nondegenerate;
    j["second_kind_discrete"] = adm.second_kind_discrete;
    j["notes"] = adm.notes;
    j["refined_grid"] = set.refined_grid;
    j["warnings"] = set.warnings;
    if (scene.n() == 2) {
        json curves = json::array();
        for (const auto& c : set.curves) {
            json cj;
            std::map<std::string, int> kinds, ak;
            for (const auto& v : c.vertices) {
                ++kinds[kind_name(v.kind)];
                ++ak[v.ak ? "A" + std::to_string(*v.ak + 1) : "none"];
            }
            cj["vertices"] = c.vertices.size();
            cj["closed"] = c.closed;
            cj["chord_length"] = c.arc_length.empty() ? 0.0 : c.arc_length.back();
            json kj = json::object();
            for (const auto& [k, n] : kinds)
                kj[k] = n;
            cj["kinds"] = kj;
            json aj = json::object();
            for (const auto& [k, n] : ak)
                aj[k] = n;
            cj["ak"] = aj;
            curves.push_back(cj);
        }
        j["curves"] = curves;
    } else {
        json pts = json::array();
        for (const auto& p : set.points)
            pts.push_back(point_json(p));
        j["points"] = pts;
    }
    json sk = json::array();
    for (const auto& p : set.second_kind) {
        json pj = point_json(p);
        pj["curve"] = p.curve;
        pj["segment"] = p.segment;
        sk.push_back(pj);
    }
    j["second_kind"] = sk;
    return j;
}

json tau_json(const CurvatureReport& r) {
    json j;
    j["tau"] = r.tau;
    j["regular_part"] = r.regular_part;
    j["regular_error"] = r.regular_error;
    j["singular_part"] = r.singular_part;
    j["singular_error"] = r.singular_error;
    j["chart_regular"] = vec(r.chart_regular);
    if (r.dim == 1) {
        j["singular_points"] = r.singular_point_count;
    } else {
        j["curve_singular"] = vec(r.curve_singular);
        j["curve_length"] = vec(r.curve_length);
    }
    j["second_kind_encountered"] = r.second_kind_encountered;
    j["extrapolation_used"] = r.extrapolation_used;
    j["evaluations"] = r.evaluations;
    return j;
}

json morse_json(const MorseEstimate& e) {
    json j;
    j["seed"] = e.seed;
    j["samples"] = e.samples;
    j["mean"] = e.mean;
    j["standard_error"] = e.standard_error;
    j["rejected"] = e.rejected;
    j["flagged"] = e.flagged;
    j["min_count"] = e.min_count;
    j["max_count"] = e.max_count;
    std::map<int, int> hist;
    for (int c : e.counts)
        ++hist[c];
    json h = json::object();
    for (const auto& [c, n] : hist)
        h[std::to_string(c)] = n;
    j["histogram"] = h;
    if (e.witness)
        j["witness"] = vec(*e.witness);
    else
        j["witness"] = nullptr;
    return j;
}

json verdict_json(const VerdictRecord& v) {
    json j;
    j["name"] = v.name;
    j["status"] = v.status;
    j["summary"] = v.summary;
    json vals = json::object();
    for (const auto& [k, x] : v.values)
        vals[k] = x;
    j["values"] = vals;
    return j;
}

json config_json(const std::string& command, const std::string& scene, const RunOptions& o) {
    json j;
    j["command"] = command;
    j["scene"] = scene;
    j["tol"] = o.tol;
    j["grid"] = o.grid;
    j["samples"] = o.samples;
    j["seed"] = o.seed;
    j["allow_second_kind"] = o.allow_second_kind;
    j["emit_csv"] = o.emit_csv.empty() ? json(nullptr) : json(o.emit_csv);
    json p = json::object();
    for (const auto& [k, v] : o.parameters)
        p[k] = v;
    j["parameters"] = p;
    return j;
}

VerdictRecord admissibility_verdict(const AdmissibilityReport& adm) {
    VerdictRecord v;
    v.name = "admissibility";
    v.status = adm.verdict == Verdict::Admissible      ? "pass"
               : adm.verdict == Verdict::NotAdmissible ? "fail"
                                                       : "inconclusive";
    v.summary = adm.all_nondegenerate ? "singular points are non-degenerate" : "degenerate singular point found";
    v.values = {{"second_kind_points", static_cast<double>(adm.second_kind.size())},
                {"second_kind_discrete", adm.second_kind_discrete ? 1.0 : 0.0}};
    return v;
}

VerdictRecord consistency_verdict(const CurvatureReport& r, const MorseEstimate& e) {
    VerdictRecord v;
    v.name = "monte_carlo_consistency";
    const double diff = std::abs(e.mean - r.tau);
    // all counts equal gives a zero standard error; the quadrature error sets the floor
    const double tol = std::max(3.0 * e.standard_error, r.regular_error + r.singular_error + 1e-6);
    v.status = diff <= tol ? "pass" : "fail";
    v.summary = "sampled mean critical-point count against the quadrature value";
    v.values = {{"mean", e.mean}, {"tau", r.tau}, {"difference", diff}, {"tolerance", tol}};
    return v;
}

VerdictRecord expected_verdict(const FrontalScene& scene, const CurvatureReport* r, const SingularSet& set,
                               const RunOptions& o) {
    VerdictRecord v;
    v.name = "catalog_expected";
    const auto expected = catalog_expected(scene.id(), o.parameters);
    if (expected.empty() || !r) {
        v.status = "inapplicable";
        v.summary = "no expected values";
        return v;
    }
    bool ok = true;
    for (const auto& e : expected) {
        std::optional<double> got;
        if (e.quantity == "tau")
            got = r->tau;
        else if (e.quantity == "regular_part")
            got = r->regular_part;
        else if (e.quantity == "singular_part")
            got = r->singular_part;
        else if (e.quantity == "singular_points")
            got = static_cast<double>(set.points.size());
        else if (e.quantity == "sigma_curves")
            got = static_cast<double>(set.curves.size());
        else if (e.quantity == "sigma_length") {
            double total = 0.0;
            for (double l : r->curve_length)
                total += l;
            got = total;
        }
        if (!got)
            continue;
        // the requested quadrature tolerance bounds what can be matched
        const double tol = e.tolerance == 0.0 ? 0.0 : std::max(e.tolerance, 2.0 * o.tol);
        const bool match = std::abs(*got - e.value) <= tol;
        ok = ok && match;
        v.values.emplace_back(e.quantity, *got);
        v.values.emplace_back(e.quantity + "_expected", e.value);
    }
    v.status = ok ? "pass" : "fail";
    v.summary = ok ? "matches the catalog within tolerance" : "differs from the catalog";
    return v;
}

void write_csv(const std::string& dir, const FrontalScene& scene, const SingularSet& set,
               const MorseEstimate* est) {
    std::filesystem::create_directories(dir);
    const std::string base = dir + "/" + scene.id();
    auto num = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    {
        std::ofstream out(base + "_sigma.csv");
        out << "curve,index,chart,kind";
        for (int i = 0; i < scene.n(); ++i)
            out << ",u" << i;
        for (int i = 0; i < scene.m(); ++i)
            out << ",x" << i;
        out << "\n";
        auto row = [&](int curve, std::size_t idx, const SingularPoint& p) {
            out << curve << "," << idx << "," << p.chart << "," << kind_name(p.kind);
            for (double c : p.coords)
                out << "," << num(c);
            for (long i = 0; i < p.image.size(); ++i)
                out << "," << num(p.image[i]);
            out << "\n";
        };
        for (std::size_t c = 0; c < set.curves.size(); ++c)
            for (std::size_t i = 0; i < set.curves[c].vertices.size(); ++i)
                row(static_cast<int>(c), i, set.curves[c].vertices[i]);
        for (std::size_t i = 0; i < set.points.size(); ++i)
            row(-1, i, set.points[i]);
    }
    {
        std::ofstream out(base + "_lambda.csv");
        out << "chart";
        for (int i = 0; i < scene.n(); ++i)
            out << ",u" << i;
        out << ",lambda\n";
        const int per_axis = scene.n() == 1 ? 512 : scene.n() == 2 ? 64 : 16;
        for (int ci = 0; ci < scene.chart_count(); ++ci) {
            const auto& core = scene.chart(ci).core;
            int total = 1;
            for (int i = 0; i < scene.n(); ++i)
                total *= per_axis + 1;
            std::vector<double> u(static_cast<std::size_t>(scene.n()));
            for (int lin = 0; lin < total; ++lin) {
                int rem = lin;
                for (int i = 0; i < scene.n(); ++i) {
                    u[static_cast<std::size_t>(i)] = core[i].lo + core[i].width() * (rem % (per_axis + 1)) / per_axis;
                    rem /= per_axis + 1;
                }
                const double lam = signed_volume_density(scene, scene.evaluate(ci, u, 1)).value;
                out << ci;
                for (double c : u)
                    out << "," << num(c);
                out << "," << num(lam) << "\n";
            }
        }
    }
    if (est) {
        std::ofstream out(base + "_morse.csv");
        out << "sample";
        for (int i = 0; i < scene.m(); ++i)
            out << ",w" << i;
        out << ",count\n";
        for (std::size_t i = 0; i < est->counts.size(); ++i) {
            out << i;
            for (long k = 0; k < est->directions[i].size(); ++k)
                out << "," << num(est->directions[i][k]);
            out << "," << est->counts[i] << "\n";
        }
    }
}

json error_json(const char* kind, const std::string& message) {
    json j;
    j["kind"] = kind;
    j["message"] = message;
    return j;
}

void dump(const json& j, std::string& out, int level) {
    const std::string pad(static_cast<std::size_t>(2 * (level + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * level), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            dump(it.value(), out, level + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        bool scalars = std::none_of(j.begin(), j.end(), [](const json& x) { return x.is_structured(); });
        if (scalars) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    out += ", ";
                dump(j[i], out, level + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i)
                out += ",\n";
            out += pad;
            dump(j[i], out, level + 1);
        }
        out += "\n" + close + "]";
        return;
    }
    case json::value_t::number_float: {
        const double x = j.get<double>();
        if (!std::isfinite(x)) {
            out += "null";
            return;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out += buf;
        return;
    }
    default:
        out += j.dump();
    }
}

} // namespace

bool is_subcommand(const std::string& c) {
    return c == "singular" || c == "tau" || c == "morse" || c == "verify" || c == "all" || c == "catalog";
}

std::string format_json(const json& doc) {
    std::string out;
    dump(doc, out, 0);
    out += "\n";
    return out;
}

json catalog_listing() {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["tool_version"] = kToolVersion;
    json list = json::array();
    for (const auto& e : catalog_entries()) {
        json j;
        j["name"] = e.name;
        j["description"] = e.description;
        json p = json::object();
        for (const auto& [k, v] : e.parameters)
            p[k] = v;
        j["parameters"] = p;
        json ex = json::array();
        for (const auto& x : catalog_expected(e.name)) {
            json xj;
            xj["quantity"] = x.quantity;
            xj["value"] = x.value;
            xj["tolerance"] = x.tolerance;
            xj["note"] = x.note;
            ex.push_back(xj);
        }
        j["expected"] = ex;
        list.push_back(j);
    }
    doc["catalog"] = list;
    return doc;
}

RunOutcome run(const std::string& command, const std::string& scene_name, const RunOptions& o) {
    RunOutcome out;
    if (command == "catalog") {
        out.report = catalog_listing();
        return out;
    }
    json& doc = out.report;
    doc["schema_version"] = kSchemaVersion;
    doc["tool_version"] = kToolVersion;
    doc["scene"] = nullptr;
    doc["singular"] = nullptr;
    doc["tau"] = nullptr;
    doc["morse"] = nullptr;
    doc["verdicts"] = json::array();
    doc["config"] = config_json(command, scene_name, o);
    if (!is_subcommand(command)) {
        doc["error"] = error_json("input", "unknown subcommand '" + command + "'");
        out.exit_code = kExitInput;
        return out;
    }
    const bool want_tau = command == "tau" || command == "verify" || command == "all";
    const bool want_morse = command == "morse" || command == "verify" || command == "all";
    const bool want_verdicts = command == "verify" || command == "all";
    std::vector<VerdictRecord> verdicts;
    try {
        const FrontalScene scene = load_scene(scene_name, o.parameters);
        doc["scene"] = scene_json(scene);
        DetectionOptions det;
        det.grid = o.grid;
        const SingularSet set = detect_singular_set(scene, det);
        const AdmissibilityReport adm = admissibility_check(scene, set);
        doc["singular"] = singular_json(scene, set, adm);
        verdicts.push_back(admissibility_verdict(adm));

        std::optional<CurvatureReport> tau;
        std::optional<MorseEstimate> est;
        if (scene.closed() && scene.n() <= 2) {
            if (want_tau) {
                IntegrationOptions io;
                io.tol = o.tol;
                io.allow_second_kind = o.allow_second_kind;
                tau = total_absolute_curvature(scene, set, io);
                doc["tau"] = tau_json(*tau);
            }
            if (want_morse) {
                est = tau_monte_carlo(scene, set, o.samples, o.seed);
                doc["morse"] = morse_json(*est);
            }
        }
        if (want_verdicts) {
            if (tau) {
                for (auto& v : verify_inequality(scene, *tau, est ? &*est : nullptr))
                    verdicts.push_back(std::move(v));
                const auto eq = equality_case_check(scene, set, tau->tau);
                verdicts.push_back(eq.span_verdict);
                verdicts.push_back(eq.verdict);
                if (est)
                    verdicts.push_back(consistency_verdict(*tau, *est));
            } else {
                VerdictRecord v;
                v.name = "inequalities";
                v.status = "inapplicable";
                v.summary = "germ window: no Betti numbers and no total absolute curvature";
                verdicts.push_back(v);
            }
            if (command == "all" && is_catalog_name(scene.id()))
                verdicts.push_back(expected_verdict(scene, tau ? &*tau : nullptr, set, o));
        }
        if (!o.emit_csv.empty())
            write_csv(o.emit_csv, scene, set, est ? &*est : nullptr);
    } catch (const SceneError& e) {
        doc["error"] = error_json("input", e.what());
        out.exit_code = kExitInput;
    } catch (const ParseError& e) {
        doc["error"] = error_json("input", e.what());
        out.exit_code = kExitInput;
    } catch (const AdmissibilityError& e) {
        doc["error"] = error_json("admissibility", e.what());
        out.exit_code = kExitInput;
    } catch (const AccuracyError& e) {
        json err = error_json("accuracy", e.what());
        err["estimate"] = e.estimate();
        err["error_estimate"] = e.error();
        doc["error"] = err;
        out.exit_code = kExitAccuracy;
    } catch (const ConditioningError& e) {
        doc["error"] = error_json("conditioning", e.what());
        out.exit_code = kExitAccuracy;
    } catch (const ResolutionError& e) {
        doc["error"] = error_json("resolution", e.what());
        out.exit_code = kExitAccuracy;
    } catch (const TracingError& e) {
        doc["error"] = error_json("tracing", e.what());
        out.exit_code = kExitAccuracy;
    } catch (const Error& e) {
        doc["error"] = error_json("input", e.what());
        out.exit_code = kExitInput;
    }
    json vj = json::array();
    for (const auto& v : verdicts) {
        vj.push_back(verdict_json(v));
        if (want_verdicts && v.status == "fail" && out.exit_code == kExitOk)
            out.exit_code = kExitVerdict;
    }
    doc["verdicts"] = vj;
    return out;
}

RunOutcome run_catalog(const std::string& command, const RunOptions& options) {
    RunOutcome out;
    out.report = json::array();
    for (const auto& e : catalog_entries()) {
        RunOptions o = options;
        o.parameters.clear();
        auto one = run(command, e.name, o);
        out.report.push_back(std::move(one.report));
        out.exit_code = std::max(out.exit_code, one.exit_code);
    }
    return out;
}

} // namespace frontal
