#include <doctest.h>

#include <stdexcept>
#include <sstream>
#include <string>

#include "bermudan/harness.hpp"
#include "bermudan/parallel.hpp"

using namespace bermudan;
using nlohmann::json;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.model.x0 = {36.0};
    cfg.euler_step = 0.05;
    cfg.samples = {2000, 2000, 4000, 20, 10, 500};
    cfg.tm_variants = {TmVariant{}, TmVariant{2, MartingaleTerms::both}, TmVariant{4, MartingaleTerms::wiener_only}};
    return cfg;
}

std::string errors_of(const json& doc) {
    try {
        config_from_json(doc);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("variant labels") {
    CHECK(TmVariant{}.label() == "TM");
    CHECK(TmVariant{2, MartingaleTerms::both}.label() == "TM_B2");
    CHECK(TmVariant{4, MartingaleTerms::wiener_only}.label() == "TM_W");
    CHECK(TmVariant{4, MartingaleTerms::jump_only}.label() == "TM_P");
}

TEST_CASE("config survives a json round trip") {
    auto cfg = small_config();
    cfg.seeds = derive_seeds(99);
    cfg.integrands.target = IntegrandTarget::centered;
    cfg.report_path = "out.json";
    const auto doc = config_to_json(cfg);
    const auto back = config_from_json(doc);
    CHECK(config_to_json(back) == doc);
    CHECK(back.tm_variants == cfg.tm_variants);
    CHECK(back.stage_seeds().tm == derive_seeds(99).tm);
    // Defaults round trip too, and an empty document gives the defaults.
    CHECK(config_to_json(config_from_json(json::object())) == config_to_json(ExperimentConfig{}));
}

TEST_CASE("config errors are reported together") {
    json doc = {{"model", {{"sigma", -0.2}, {"x0", {40.0}}}},
                {"bogus", 1},
                {"samples", {{"ab_inner", 0}}},
                {"integrands", {{"schedule", "weekly"}}},
                {"cells", "ten"}};
    const auto msg = errors_of(doc);
    CHECK(msg.find("unknown key bogus") != std::string::npos);
    CHECK(msg.find("sigma") != std::string::npos);
    CHECK(msg.find("ab_inner") != std::string::npos);
    CHECK(msg.find("weekly") != std::string::npos);
    CHECK(msg.find("cells") != std::string::npos);
}

TEST_CASE("inner sample size only matters when the nested bound is requested") {
    json doc = {{"samples", {{"ab_inner", 0}}}};
    CHECK(errors_of(doc).find("ab_inner") != std::string::npos);
    doc["bounds"] = {{"ab", false}};
    CHECK(errors_of(doc).empty());
}

TEST_CASE("semantic checks") {
    auto cfg = small_config();
    cfg.euler_step = 0.03;
    cfg.tm_variants.push_back(TmVariant{});
    cfg.tm_variants.push_back(TmVariant{7, MartingaleTerms::both});
    const auto errs = cfg.errors();
    std::string all;
    for (const auto& e : errs) all += e + "\n";
    CHECK(all.find("euler") != std::string::npos);
    CHECK(all.find("duplicate tm variant TM") != std::string::npos);
    CHECK(all.find("1..4") != std::string::npos);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("stage seeds are distinct and derived from the root") {
    const auto s = derive_seeds(20240611);
    CHECK(s.policy == stream_key(20240611, {1}));
    CHECK(s.integrands == stream_key(20240611, {2}));
    CHECK(s.tm == stream_key(20240611, {3}));
    CHECK(s.lb == stream_key(20240611, {4}));
    CHECK(s.ab == stream_key(20240611, {5}));
    CHECK(derive_seeds(1).policy != derive_seeds(2).policy);
}

TEST_CASE("experiment produces every requested estimate") {
    const auto report = run_experiment(small_config());
    for (const char* kind : {"LB", "TM", "TM_B2", "TM_W", "AB"}) {
        const auto* e = report.find(kind);
        REQUIRE(e != nullptr);
        CHECK(std::isfinite(e->mean));
        CHECK(e->stderr_ > 0.0);
    }
    CHECK(report.find("TM_P") == nullptr);
    CHECK(report.find("LB")->n_paths == 4000);
    CHECK(report.find("AB")->n_paths == 20);
    CHECK(report.tm_evaluation_time() > 0.0);
    const auto doc = json::parse(report_to_json(report));
    CHECK(doc["estimates"].size() == 5);
    CHECK_FALSE(doc["estimates"][0].contains("wall_time_s"));
    CHECK(json::parse(report_to_json(report, true))["estimates"][0].contains("wall_time_s"));
}

TEST_CASE("reports are byte identical across thread counts") {
    auto cfg = small_config();
    set_thread_count(1);
    const auto a = report_to_json(run_experiment(cfg));
    set_thread_count(4);
    const auto b = report_to_json(run_experiment(cfg));
    set_thread_count(1);
    CHECK(a == b);
    cfg.seed += 1;
    CHECK(report_to_json(run_experiment(cfg)) != a);
}

TEST_CASE("a stage rerun with its seed reproduces its estimate") {
    auto cfg = small_config();
    const auto full = run_experiment(cfg);
    cfg.seeds = full.seeds;
    cfg.bounds = {false, true, false};
    const auto tm_only = run_experiment(cfg);
    CHECK(tm_only.find("TM")->mean == full.find("TM")->mean);
    CHECK(tm_only.find("LB") == nullptr);
    cfg.bounds = {true, false, false};
    CHECK(run_experiment(cfg).find("LB")->mean == full.find("LB")->mean);
    cfg.bounds = {false, false, true};
    CHECK(run_experiment(cfg).find("AB")->mean == full.find("AB")->mean);
}

TEST_CASE("published values") {
    const auto lb = paper_value("5.1", 1, 1.0, 40.0, "LB");
    REQUIRE(lb.has_value());
    CHECK(lb->ci95.has_value());
    CHECK(paper_value("5.1", 1, 1.0, 40.0, "TM")->value == doctest::Approx(3.910));
    CHECK(paper_value("5.1", 1, 3.0, 36.0, "AB")->value == doctest::Approx(7.810));
    CHECK(paper_value("5.4", 1, 1.0, 40.0, "TM_W")->value == doctest::Approx(4.450));
    CHECK(paper_value("5.4", 1, 1.0, 40.0, "TM_P")->value == doctest::Approx(5.184));
    CHECK(paper_value("5.2", 1, 1.0, 40.0, "TM_B1")->value == doctest::Approx(4.789));
    CHECK_FALSE(paper_value("5.1", 1, 2.0, 40.0, "LB").has_value());
    CHECK_FALSE(paper_value("9.9", 1, 1.0, 40.0, "LB").has_value());
}

TEST_CASE("table arguments are checked") {
    CHECK_THROWS_AS(reproduce_table("5.3"), std::invalid_argument);
    TableOptions opts;
    opts.scale = 0.0;
    CHECK_THROWS_AS(reproduce_table("5.1", opts), std::invalid_argument);
    opts.scale = 1.5;
    CHECK_THROWS_AS(reproduce_table("5.2", opts), std::invalid_argument);
}

TEST_CASE("row configs scale the sample sizes") {
    TableOptions opts;
    opts.scale = 0.01;
    const auto cfg = table_row_config("5.1", 1, 3.0, 44.0, opts);
    CHECK(cfg.model.lambda == 3.0);
    CHECK(cfg.model.x0 == std::vector<double>{44.0});
    CHECK(cfg.samples.fit_policy == 500);
    CHECK(cfg.samples.ab_inner == 5);
    CHECK(cfg.bounds.ab);
    const auto t52 = table_row_config("5.2", 1, 1.0, 40.0, opts);
    CHECK_FALSE(t52.bounds.ab);
    CHECK_FALSE(t52.bounds.lb);
    CHECK(t52.tm_variants.size() == 4);
    CHECK(table_row_config("5.1", 1, 1.0, 40.0, opts).seed != table_row_config("5.1", 1, 1.0, 36.0, opts).seed);
}

TEST_CASE("table csv layout") {
    TableOptions opts;
    opts.scale = 0.004;
    const auto t = reproduce_table("5.4", opts);
    CHECK(t.rows.size() == 6);
    const auto csv = t.csv();
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("table,n,lambda,x0,TM_W_estimate,TM_W_stderr,TM_W_ci95,TM_W_paper,TM_W_paper_ci95,TM_W_overlap", 0) == 0);
    CHECK(header.find("tm_eval_s") == std::string::npos);
    int lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 6);
    const auto* c = t.cell(1, 1.0, 40.0, "TM_P");
    REQUIRE(c != nullptr);
    CHECK(c->paper.has_value());
    CHECK(c->overlap.has_value());
}
