#include "bermudan/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "bermudan/dual_ab.hpp"
#include "bermudan/lower_bound.hpp"
#include "bermudan/rng.hpp"

namespace bermudan {

using nlohmann::json;

StageSeeds derive_seeds(std::uint64_t root) {
    return {stream_key(root, {1}), stream_key(root, {2}), stream_key(root, {3}), stream_key(root, {4}),
            stream_key(root, {5})};
}

std::string TmVariant::label() const {
    std::string s = basis == 4 ? "TM" : "TM_B" + std::to_string(basis);
    if (terms == MartingaleTerms::wiener_only) s += "_W";
    if (terms == MartingaleTerms::jump_only) s += "_P";
    return s;
}

std::vector<std::string> ExperimentConfig::errors() const {
    std::vector<std::string> out;
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        out.emplace_back(e.what());
    }
    if (!(euler_step > 0.0)) {
        out.emplace_back("euler_step must be positive");
    } else if (model.maturity > 0.0 && model.exercise_intervals >= 1) {
        try {
            build_time_grid(model.maturity, model.exercise_intervals, euler_step);
        } catch (const std::invalid_argument& e) {
            out.emplace_back(e.what());
        }
    }
    if (cells < 1) out.emplace_back("cells must be >= 1");
    if (policy_basis != 2 && policy_basis != 4) out.emplace_back("policy_basis must be 2 or 4");
    try {
        euro.validate();
    } catch (const std::invalid_argument& e) {
        out.emplace_back(e.what());
    }

    const auto need = [&](bool requested, std::size_t value, const char* name) {
        if (requested && value < 1) out.emplace_back(std::string("samples.") + name + " must be >= 1");
    };
    const bool fit = bounds.lb || bounds.tm || bounds.ab;
    need(fit, samples.fit_policy, "fit_policy");
    need(bounds.tm, samples.fit_integrands, "fit_integrands");
    need(bounds.tm, samples.tm, "tm");
    need(bounds.lb, samples.lb, "lb");
    need(bounds.ab, samples.ab_outer, "ab_outer");
    need(bounds.ab, samples.ab_inner, "ab_inner");
    if (!fit) out.emplace_back("no bound requested");

    if (bounds.tm) {
        if (tm_variants.empty()) out.emplace_back("tm_variants is empty");
        for (const auto& v : tm_variants)
            if (v.basis < 1 || v.basis > 4) out.emplace_back("tm basis variant must be in 1..4");
        for (std::size_t i = 0; i < tm_variants.size(); ++i)
            for (std::size_t k = 0; k < i; ++k)
                if (tm_variants[i] == tm_variants[k]) out.emplace_back("duplicate tm variant " + tm_variants[i].label());
    }
    const auto s = stage_seeds();
    if (s.policy == s.integrands || s.policy == s.tm || s.integrands == s.tm || s.lb == s.policy ||
        s.lb == s.integrands || s.lb == s.tm)
        out.emplace_back("stage seeds must be pairwise distinct");
    return out;
}

void ExperimentConfig::validate() const {
    const auto errs = errors();
    if (errs.empty()) return;
    std::string msg = "invalid experiment config:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
}

namespace {

// Reads `key` from `obj` into `out` when present; records type errors.
template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& path, std::vector<std::string>& errs) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->template get<T>();
    } catch (const json::exception&) {
        errs.push_back(path + key + ": unexpected value " + it->dump());
    }
}

void check_keys(const json& obj, std::initializer_list<const char*> known, const std::string& path,
                std::vector<std::string>& errs) {
    if (!obj.is_object()) {
        errs.push_back(path + ": expected an object");
        return;
    }
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; }))
            errs.push_back("unknown key " + path + k);
    }
}

template <typename Enum, typename Parse>
void read_enum(const json& obj, const char* key, Enum& out, Parse parse, const std::string& path,
               std::vector<std::string>& errs) {
    std::string name;
    const auto before = errs.size();
    read(obj, key, name, path, errs);
    if (errs.size() != before || !obj.contains(key)) return;
    try {
        out = parse(name);
    } catch (const std::invalid_argument& e) {
        errs.push_back(path + key + ": " + e.what());
    }
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
    ExperimentConfig cfg;
    std::vector<std::string> errs;
    check_keys(doc,
               {"model", "euler_step", "cells", "policy_on_exercise_grid", "samples", "policy_basis", "itm_only",
                "integrands", "tm_variants", "bounds", "seed", "seeds", "euro", "report_path"},
               "", errs);
    if (!doc.is_object()) throw std::invalid_argument("invalid experiment config:\n  - expected a JSON object");

    if (doc.contains("model")) {
        const auto& m = doc["model"];
        check_keys(m, {"r", "delta", "sigma", "lambda", "m", "theta", "x0", "strike", "maturity", "exercise_intervals"},
                   "model.", errs);
        auto& p = cfg.model;
        read(m, "r", p.r, "model.", errs);
        read(m, "delta", p.delta, "model.", errs);
        read(m, "sigma", p.sigma, "model.", errs);
        read(m, "lambda", p.lambda, "model.", errs);
        read(m, "m", p.m, "model.", errs);
        read(m, "theta", p.theta, "model.", errs);
        read(m, "x0", p.x0, "model.", errs);
        read(m, "strike", p.strike, "model.", errs);
        read(m, "maturity", p.maturity, "model.", errs);
        read(m, "exercise_intervals", p.exercise_intervals, "model.", errs);
    }
    read(doc, "euler_step", cfg.euler_step, "", errs);
    read(doc, "cells", cfg.cells, "", errs);
    read(doc, "policy_on_exercise_grid", cfg.policy_on_exercise_grid, "", errs);
    if (doc.contains("samples")) {
        const auto& s = doc["samples"];
        check_keys(s, {"fit_policy", "fit_integrands", "lb", "ab_outer", "ab_inner", "tm"}, "samples.", errs);
        read(s, "fit_policy", cfg.samples.fit_policy, "samples.", errs);
        read(s, "fit_integrands", cfg.samples.fit_integrands, "samples.", errs);
        read(s, "lb", cfg.samples.lb, "samples.", errs);
        read(s, "ab_outer", cfg.samples.ab_outer, "samples.", errs);
        read(s, "ab_inner", cfg.samples.ab_inner, "samples.", errs);
        read(s, "tm", cfg.samples.tm, "samples.", errs);
    }
    read(doc, "policy_basis", cfg.policy_basis, "", errs);
    read(doc, "itm_only", cfg.itm_only, "", errs);
    if (doc.contains("integrands")) {
        const auto& o = doc["integrands"];
        check_keys(o, {"schedule", "target"}, "integrands.", errs);
        read_enum(o, "schedule", cfg.integrands.schedule, regression_schedule_from_string, "integrands.", errs);
        read_enum(o, "target", cfg.integrands.target, integrand_target_from_string, "integrands.", errs);
    }
    if (doc.contains("tm_variants")) {
        cfg.tm_variants.clear();
        const auto& list = doc["tm_variants"];
        if (!list.is_array()) errs.emplace_back("tm_variants: expected an array");
        for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
            const std::string path = "tm_variants[" + std::to_string(i) + "].";
            check_keys(list[i], {"basis", "terms"}, path, errs);
            TmVariant v;
            if (list[i].is_object()) {
                read(list[i], "basis", v.basis, path, errs);
                read_enum(list[i], "terms", v.terms, martingale_terms_from_string, path, errs);
            }
            cfg.tm_variants.push_back(v);
        }
    }
    if (doc.contains("bounds")) {
        const auto& b = doc["bounds"];
        check_keys(b, {"lb", "tm", "ab"}, "bounds.", errs);
        read(b, "lb", cfg.bounds.lb, "bounds.", errs);
        read(b, "tm", cfg.bounds.tm, "bounds.", errs);
        read(b, "ab", cfg.bounds.ab, "bounds.", errs);
    }
    read(doc, "seed", cfg.seed, "", errs);
    if (doc.contains("seeds") && !doc["seeds"].is_null()) {
        const auto& s = doc["seeds"];
        check_keys(s, {"policy", "integrands", "tm", "lb", "ab"}, "seeds.", errs);
        StageSeeds seeds = derive_seeds(cfg.seed);
        read(s, "policy", seeds.policy, "seeds.", errs);
        read(s, "integrands", seeds.integrands, "seeds.", errs);
        read(s, "tm", seeds.tm, "seeds.", errs);
        read(s, "lb", seeds.lb, "seeds.", errs);
        read(s, "ab", seeds.ab, "seeds.", errs);
        cfg.seeds = seeds;
    }
    if (doc.contains("euro")) {
        const auto& e = doc["euro"];
        check_keys(e, {"quad_nodes", "series_cutoff", "tail_tol"}, "euro.", errs);
        read(e, "quad_nodes", cfg.euro.quad_nodes, "euro.", errs);
        read(e, "series_cutoff", cfg.euro.series_cutoff, "euro.", errs);
        read(e, "tail_tol", cfg.euro.tail_tol, "euro.", errs);
    }
    read(doc, "report_path", cfg.report_path, "", errs);

    for (auto& e : cfg.errors()) errs.push_back(std::move(e));
    if (!errs.empty()) {
        std::string msg = "invalid experiment config:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    const auto& p = cfg.model;
    json doc;
    doc["model"] = {{"r", p.r},           {"delta", p.delta},   {"sigma", p.sigma},
                    {"lambda", p.lambda}, {"m", p.m},           {"theta", p.theta},
                    {"x0", p.x0},         {"strike", p.strike}, {"maturity", p.maturity},
                    {"exercise_intervals", p.exercise_intervals}};
    doc["euler_step"] = cfg.euler_step;
    doc["cells"] = cfg.cells;
    doc["policy_on_exercise_grid"] = cfg.policy_on_exercise_grid;
    doc["samples"] = {{"fit_policy", cfg.samples.fit_policy}, {"fit_integrands", cfg.samples.fit_integrands},
                      {"lb", cfg.samples.lb},                 {"ab_outer", cfg.samples.ab_outer},
                      {"ab_inner", cfg.samples.ab_inner},     {"tm", cfg.samples.tm}};
    doc["policy_basis"] = cfg.policy_basis;
    doc["itm_only"] = cfg.itm_only;
    doc["integrands"] = {{"schedule", to_string(cfg.integrands.schedule)},
                         {"target", to_string(cfg.integrands.target)}};
    doc["tm_variants"] = json::array();
    for (const auto& v : cfg.tm_variants) doc["tm_variants"].push_back({{"basis", v.basis}, {"terms", to_string(v.terms)}});
    doc["bounds"] = {{"lb", cfg.bounds.lb}, {"tm", cfg.bounds.tm}, {"ab", cfg.bounds.ab}};
    doc["seed"] = cfg.seed;
    if (cfg.seeds) {
        const auto& s = *cfg.seeds;
        doc["seeds"] = {{"policy", s.policy}, {"integrands", s.integrands}, {"tm", s.tm}, {"lb", s.lb}, {"ab", s.ab}};
    }
    doc["euro"] = {{"quad_nodes", cfg.euro.quad_nodes},
                   {"series_cutoff", cfg.euro.series_cutoff},
                   {"tail_tol", cfg.euro.tail_tol}};
    if (!cfg.report_path.empty()) doc["report_path"] = cfg.report_path;
    return doc;
}

const BoundEstimate* ExperimentReport::find(const std::string& kind) const {
    for (const auto& e : estimates)
        if (e.kind == kind) return &e;
    return nullptr;
}

double ExperimentReport::tm_evaluation_time() const {
    const auto* tm = find(config.tm_variants.empty() ? "TM" : config.tm_variants.front().label());
    return timings.tm_simulation + (tm ? tm->wall_time_s : 0.0);
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    report.config = cfg;
    report.seeds = cfg.stage_seeds();
    const auto& params = cfg.model;
    const auto& seeds = report.seeds;

    const auto fine = make_grids(params, cfg.euler_step, cfg.cells);
    const auto coarse =
        cfg.policy_on_exercise_grid ? make_grids(params, params.maturity / params.exercise_intervals, cfg.cells) : fine;

    auto start = std::chrono::steady_clock::now();
    Policy policy;
    {
        const auto fit_paths = simulate_paths(params, coarse, cfg.samples.fit_policy, seeds.policy);
        policy = fit_policy(fit_paths, params, {BasisKind::ls_policy, cfg.policy_basis}, {cfg.itm_only}, cfg.euro);
    }
    report.timings.policy_fit = seconds_since(start);
    for (int j : policy.fallback_dates)
        report.diagnostics.push_back("policy regression at date " + std::to_string(j) + " used all paths");

    if (cfg.bounds.lb) {
        start = std::chrono::steady_clock::now();
        const auto paths = simulate_paths(params, coarse, cfg.samples.lb, seeds.lb);
        report.estimates.push_back(lower_bound(policy, paths, params));
        report.timings.lb = seconds_since(start);
        report.estimates.back().wall_time_s = report.timings.lb;
    }

    if (cfg.bounds.tm) {
        std::vector<MartingaleModel> models;
        start = std::chrono::steady_clock::now();
        {
            const auto fit_paths = simulate_paths(params, fine, cfg.samples.fit_integrands, seeds.integrands);
            std::vector<int> bases;
            for (const auto& v : cfg.tm_variants)
                if (std::find(bases.begin(), bases.end(), v.basis) == bases.end()) bases.push_back(v.basis);
            for (int b : bases) {
                models.push_back(fit_integrands(policy, fit_paths, params, {BasisKind::rho_w, b},
                                                {BasisKind::rho_p, b}, cfg.integrands, cfg.euro));
                for (const auto& d : models.back().diagnostics)
                    if (std::find(report.diagnostics.begin(), report.diagnostics.end(), d) == report.diagnostics.end())
                        report.diagnostics.push_back(d);
            }
        }
        report.timings.integrand_fit = seconds_since(start);

        start = std::chrono::steady_clock::now();
        const auto fresh = simulate_paths(params, fine, cfg.samples.tm, seeds.tm);
        report.timings.tm_simulation = seconds_since(start);
        for (const auto& v : cfg.tm_variants) {
            const auto it = std::find_if(models.begin(), models.end(),
                                         [&](const MartingaleModel& m) { return m.basis_w.variant == v.basis; });
            auto est = tm_upper_bound(*it, fresh, params, v.terms);
            est.kind = v.label();
            report.estimates.push_back(est);
        }
    }

    if (cfg.bounds.ab) {
        const NestedConfig nested{cfg.samples.ab_outer, cfg.samples.ab_inner};
        report.estimates.push_back(ab_upper_bound(policy, params, fine, nested, seeds.ab));
        report.timings.ab = report.estimates.back().wall_time_s;
    }
    return report;
}

std::string report_to_json(const ExperimentReport& report, bool timings) {
    json doc;
    doc["config"] = config_to_json(report.config);
    const auto& s = report.seeds;
    doc["seeds"] = {{"policy", s.policy}, {"integrands", s.integrands}, {"tm", s.tm}, {"lb", s.lb}, {"ab", s.ab}};
    doc["estimates"] = json::array();
    for (const auto& e : report.estimates) {
        json item = {{"kind", e.kind},        {"mean", e.mean},
                     {"stderr", e.stderr_},   {"ci95_halfwidth", e.ci95_halfwidth},
                     {"n_paths", e.n_paths},  {"seed", e.seed}};
        if (timings) item["wall_time_s"] = e.wall_time_s;
        doc["estimates"].push_back(item);
    }
    doc["diagnostics"] = report.diagnostics;
    if (timings) {
        const auto& t = report.timings;
        doc["timings"] = {{"policy_fit", t.policy_fit},
                          {"lb", t.lb},
                          {"integrand_fit", t.integrand_fit},
                          {"tm_simulation", t.tm_simulation},
                          {"tm_evaluation", report.tm_evaluation_time()},
                          {"ab", t.ab}};
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Published tables

namespace {

struct PaperEntry {
    const char* table;
    int n;
    double lambda;
    double x0;
    const char* column;
    double value;
    double ci95;   // negative when not published
};

constexpr PaperEntry kPaper[] = {
    {"5.1", 1, 1, 36, "LB", 5.842, 0.031},  {"5.1", 1, 1, 36, "TM", 5.970, 0.031},  {"5.1", 1, 1, 36, "AB", 5.899, 0.038},
    {"5.1", 1, 1, 40, "LB", 3.791, 0.028},  {"5.1", 1, 1, 40, "TM", 3.910, 0.033},  {"5.1", 1, 1, 40, "AB", 3.856, 0.036},
    {"5.1", 1, 1, 44, "LB", 2.383, 0.024},  {"5.1", 1, 1, 44, "TM", 2.443, 0.028},  {"5.1", 1, 1, 44, "AB", 2.417, 0.033},
    {"5.1", 1, 3, 36, "LB", 7.702, 0.043},  {"5.1", 1, 3, 36, "TM", 7.899, 0.030},  {"5.1", 1, 3, 36, "AB", 7.810, 0.053},
    {"5.1", 1, 3, 40, "LB", 5.817, 0.039},  {"5.1", 1, 3, 40, "TM", 5.996, 0.047},  {"5.1", 1, 3, 40, "AB", 5.894, 0.050},
    {"5.1", 1, 3, 44, "LB", 4.352, 0.036},  {"5.1", 1, 3, 44, "TM", 4.480, 0.044},  {"5.1", 1, 3, 44, "AB", 4.440, 0.040},
    {"5.1", 2, 1, 36, "LB", 8.133, 0.033},  {"5.1", 2, 1, 36, "TM", 8.308, 0.045},  {"5.1", 2, 1, 36, "AB", 8.243, 0.040},
    {"5.1", 2, 1, 40, "LB", 5.691, 0.034},  {"5.1", 2, 1, 40, "TM", 5.785, 0.040},  {"5.1", 2, 1, 40, "AB", 5.755, 0.043},
    {"5.1", 2, 1, 44, "LB", 3.765, 0.028},  {"5.1", 2, 1, 44, "TM", 3.842, 0.036},  {"5.1", 2, 1, 44, "AB", 3.804, 0.038},
    {"5.1", 2, 3, 36, "LB", 9.786, 0.045},  {"5.1", 2, 3, 36, "TM", 10.038, 0.061}, {"5.1", 2, 3, 36, "AB", 9.989, 0.057},
    {"5.1", 2, 3, 40, "LB", 7.680, 0.043},  {"5.1", 2, 3, 40, "TM", 7.900, 0.060},  {"5.1", 2, 3, 40, "AB", 7.845, 0.057},
    {"5.1", 2, 3, 44, "LB", 5.941, 0.040},  {"5.1", 2, 3, 44, "TM", 6.118, 0.058},  {"5.1", 2, 3, 44, "AB", 6.065, 0.058},

    {"5.2", 1, 1, 36, "TM_B1", 6.730, 0.069}, {"5.2", 1, 1, 36, "TM_B2", 6.283, 0.042},
    {"5.2", 1, 1, 36, "TM_B3", 6.228, 0.048}, {"5.2", 1, 1, 36, "TM", 5.970, 0.031},
    {"5.2", 1, 1, 40, "TM_B1", 4.789, 0.074}, {"5.2", 1, 1, 40, "TM_B2", 4.228, 0.039},
    {"5.2", 1, 1, 40, "TM_B3", 4.127, 0.047}, {"5.2", 1, 1, 40, "TM", 3.910, 0.033},
    {"5.2", 1, 1, 44, "TM_B1", 3.344, 0.073}, {"5.2", 1, 1, 44, "TM_B2", 2.734, 0.038},
    {"5.2", 1, 1, 44, "TM_B3", 2.665, 0.044}, {"5.2", 1, 1, 44, "TM", 2.443, 0.028},
    {"5.2", 1, 3, 36, "TM_B1", 8.829, 0.091}, {"5.2", 1, 3, 36, "TM_B2", 8.338, 0.059},
    {"5.2", 1, 3, 36, "TM_B3", 8.167, 0.062}, {"5.2", 1, 3, 36, "TM", 7.899, 0.030},
    {"5.2", 1, 3, 40, "TM_B1", 7.086, 0.101}, {"5.2", 1, 3, 40, "TM_B2", 6.377, 0.060},
    {"5.2", 1, 3, 40, "TM_B3", 6.277, 0.067}, {"5.2", 1, 3, 40, "TM", 5.996, 0.047},
    {"5.2", 1, 3, 44, "TM_B1", 5.681, 0.100}, {"5.2", 1, 3, 44, "TM_B2", 4.953, 0.057},
    {"5.2", 1, 3, 44, "TM_B3", 4.752, 0.061}, {"5.2", 1, 3, 44, "TM", 4.480, 0.044},

    {"5.4", 1, 1, 36, "TM_W", 6.863, 0.059},  {"5.4", 1, 1, 36, "TM_P", 7.930, 0.073},  {"5.4", 1, 1, 36, "TM", 5.970, 0.031},
    {"5.4", 1, 1, 40, "TM_W", 4.450, 0.056},  {"5.4", 1, 1, 40, "TM_P", 5.184, 0.072},  {"5.4", 1, 1, 40, "TM", 3.910, 0.033},
    {"5.4", 1, 1, 44, "TM_W", 2.750, 0.050},  {"5.4", 1, 1, 44, "TM_P", 3.125, 0.064},  {"5.4", 1, 1, 44, "TM", 2.443, 0.028},
    {"5.4", 1, 3, 36, "TM_W", 10.101, 0.099}, {"5.4", 1, 3, 36, "TM_P", 9.304, 0.070},  {"5.4", 1, 3, 36, "TM", 7.899, 0.030},
    {"5.4", 1, 3, 40, "TM_W", 7.776, 0.103},  {"5.4", 1, 3, 40, "TM_P", 7.047, 0.070},  {"5.4", 1, 3, 40, "TM", 5.996, 0.047},
    {"5.4", 1, 3, 44, "TM_W", 5.747, 0.098},  {"5.4", 1, 3, 44, "TM_P", 5.244, 0.066},  {"5.4", 1, 3, 44, "TM", 4.480, 0.044},
};

struct TableLayout {
    std::vector<std::string> columns;
    BoundSelection bounds;
    std::vector<TmVariant> variants;
};

TableLayout layout(const std::string& id) {
    if (id == "5.1") return {{"LB", "TM", "AB"}, {true, true, true}, {TmVariant{}}};
    if (id == "5.2")
        return {{"TM_B1", "TM_B2", "TM_B3", "TM"},
                {false, true, false},
                {{1, MartingaleTerms::both}, {2, MartingaleTerms::both}, {3, MartingaleTerms::both}, {4, MartingaleTerms::both}}};
    if (id == "5.4")
        return {{"TM_W", "TM_P", "TM"},
                {false, true, false},
                {{4, MartingaleTerms::wiener_only}, {4, MartingaleTerms::jump_only}, {4, MartingaleTerms::both}}};
    throw std::invalid_argument("unknown table id '" + id + "' (expected 5.1, 5.2 or 5.4)");
}

std::size_t scaled(std::size_t n, double scale) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(static_cast<double>(n) * scale)));
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

std::optional<PaperValue> paper_value(const std::string& table, int n, double lambda, double x0,
                                      const std::string& column) {
    for (const auto& e : kPaper)
        if (table == e.table && n == e.n && lambda == e.lambda && x0 == e.x0 && column == e.column)
            return PaperValue{e.value, e.ci95 >= 0.0 ? std::optional<double>(e.ci95) : std::nullopt};
    return std::nullopt;
}

const TableRow* TableResult::row(int n, double lambda, double x0) const {
    for (const auto& r : rows)
        if (r.n == n && r.lambda == lambda && r.x0 == x0) return &r;
    return nullptr;
}

const TableCell* TableResult::cell(int n, double lambda, double x0, const std::string& column) const {
    const auto* r = row(n, lambda, x0);
    if (!r) return nullptr;
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == column) return &r->cells[c];
    return nullptr;
}

std::string TableResult::csv() const {
    std::ostringstream os;
    os << "table,n,lambda,x0";
    for (const auto& c : columns)
        os << ',' << c << "_estimate," << c << "_stderr," << c << "_ci95," << c << "_paper," << c << "_paper_ci95,"
           << c << "_overlap";
    if (id == "5.1") os << ",tm_eval_s,ab_s,tm_ab_time_ratio";
    os << '\n';
    for (const auto& r : rows) {
        os << id << ',' << r.n << ',' << fmt(r.lambda) << ',' << fmt(r.x0);
        for (const auto& cell : r.cells) {
            os << ',' << fmt(cell.estimate.mean) << ',' << fmt(cell.estimate.stderr_) << ','
               << fmt(cell.estimate.ci95_halfwidth) << ',';
            if (cell.paper) os << fmt(cell.paper->value);
            os << ',';
            if (cell.paper && cell.paper->ci95) os << fmt(*cell.paper->ci95);
            os << ',';
            if (cell.overlap) os << (*cell.overlap ? "true" : "false");
        }
        if (id == "5.1")
            os << ',' << fmt(r.tm_evaluation_s) << ',' << fmt(r.ab_s) << ','
               << (r.ab_s > 0.0 ? fmt(r.tm_evaluation_s / r.ab_s) : "");
        os << '\n';
    }
    return os.str();
}

ExperimentConfig table_row_config(const std::string& id, int n, double lambda, double x0, const TableOptions& opts) {
    const auto lay = layout(id);
    if (!(opts.scale > 0.0 && opts.scale <= 1.0)) throw std::invalid_argument("table scale must lie in (0, 1]");
    ExperimentConfig cfg;
    cfg.model.lambda = lambda;
    cfg.model.x0.assign(static_cast<std::size_t>(n), x0);
    cfg.bounds = lay.bounds;
    cfg.tm_variants = lay.variants;
    auto& s = cfg.samples;
    s.fit_policy = scaled(s.fit_policy, opts.scale);
    s.fit_integrands = scaled(s.fit_integrands, opts.scale);
    s.lb = scaled(s.lb, opts.scale);
    s.ab_outer = scaled(s.ab_outer, opts.scale);
    s.ab_inner = scaled(s.ab_inner, opts.scale);
    s.tm = scaled(s.tm, opts.scale);
    cfg.seed = stream_key(opts.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(lambda * 1000.0),
                                      static_cast<std::uint64_t>(x0 * 1000.0)});
    return cfg;
}

TableResult reproduce_table(const std::string& id, const TableOptions& opts) {
    const auto lay = layout(id);
    if (!(opts.scale > 0.0 && opts.scale <= 1.0)) throw std::invalid_argument("table scale must lie in (0, 1]");
    TableResult result;
    result.id = id;
    result.columns = lay.columns;

    std::vector<int> dims{1};
    if (opts.with_n2 && id == "5.1") dims.push_back(2);
    for (int n : dims) {
        for (double lambda : {1.0, 3.0}) {
            for (double x0 : {36.0, 40.0, 44.0}) {
                const auto cfg = table_row_config(id, n, lambda, x0, opts);
                const auto report = run_experiment(cfg);
                TableRow row;
                row.n = n;
                row.lambda = lambda;
                row.x0 = x0;
                for (const auto& col : lay.columns) {
                    TableCell cell;
                    cell.estimate = *report.find(col);
                    cell.paper = paper_value(id, n, lambda, x0, col);
                    if (cell.paper && cell.paper->ci95) {
                        const double paper_se = *cell.paper->ci95 / 1.96;
                        const double joint = std::sqrt(paper_se * paper_se + cell.estimate.stderr_ * cell.estimate.stderr_);
                        cell.overlap = std::abs(cell.estimate.mean - cell.paper->value) <= 3.0 * joint;
                    }
                    row.cells.push_back(cell);
                }
                row.tm_evaluation_s = report.tm_evaluation_time();
                row.ab_s = report.timings.ab;
                result.rows.push_back(row);
            }
        }
    }
    return result;
}

}  // namespace bermudan
