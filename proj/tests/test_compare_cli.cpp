#include <catch2/catch.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "nfx/compare.hpp"
#include "nfx/fcm.hpp"
#include "nfx/synth.hpp"
#include "test_helpers.hpp"

using namespace nfx;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

// Runs the built CLI binary with the given arguments.
RunResult run_cli(const std::string& args) {
    const std::string command = std::string(NFX_CLI_PATH) + " " + args + " 2>&1";
    RunResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 512> buffer{};
    while (fgets(buffer.data(), buffer.size(), pipe)) result.output += buffer.data();
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("compare trains its specs and keeps failures isolated", "[cli]") {
    const auto series = ts::synth_mackey_glass(400, 7);
    const auto data = ts::make_windows(series, WindowSpec{4, 1});
    const auto split = ts::split_chrono(data, 0.6, 0.2, 0.2);

    std::vector<ts::CompareSpec> specs(3);
    specs[0].model = "ols";
    specs[1].model = "anfis-hybrid";
    specs[1].iterations = 15;
    specs[2].model = "no-such-model";
    const auto rows = ts::compare(split.train, split.test, specs);
    REQUIRE(rows.size() == 3);

    REQUIRE(rows[0].rmse.has_value());
    REQUIRE(rows[1].rmse.has_value());
    CHECK(*rows[1].rmse < *rows[0].rmse);
    CHECK(rows[1].rules == 16);
    CHECK_FALSE(rows[2].rmse.has_value());
    CHECK_FALSE(rows[2].error.empty());

    const auto table = ts::render_compare_table(rows);
    std::istringstream lines(table);
    std::string header;
    std::getline(lines, header);
    std::istringstream cols(header);
    std::string c1, c2, c3, c4;
    cols >> c1 >> c2 >> c3 >> c4;
    CHECK(c1 == "MODEL");
    CHECK(c2 == "RULES");
    CHECK(c3 == "ITERATIONS");
    CHECK(c4 == "RMSE");
    CHECK(table.find("FAILED") != std::string::npos);
    CHECK(table.find("n/a") != std::string::npos);
}

TEST_CASE("synth runs are byte-identical", "[cli]") {
    const auto out1 = testutil::temp_path("synth1");
    const auto out2 = testutil::temp_path("synth2");
    REQUIRE(run_cli("synth --kind mackey-glass --n 300 --seed 7 --out " + out1).exit_code
            == 0);
    REQUIRE(run_cli("synth --kind mackey-glass --n 300 --seed 7 --out " + out2).exit_code
            == 0);
    CHECK(slurp(out1) == slurp(out2));
    std::remove(out1.c_str());
    std::remove(out2.c_str());
}

TEST_CASE("unknown flags exit with a usage error", "[cli]") {
    CHECK(run_cli("synth --frobnicate 2").exit_code == 1);
    CHECK(run_cli("no-such-subcommand").exit_code == 1);
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("missing data files exit with a validation error", "[cli]") {
    CHECK(run_cli("train-anfis --data missing.csv --out m.json").exit_code == 2);
}

TEST_CASE("train-anfis writes a model the evaluator can score", "[cli]") {
    const auto data_path = testutil::temp_path("series");
    const auto model_path = testutil::temp_path("model");
    const auto report_csv = testutil::temp_path("epochs");
    REQUIRE(run_cli("synth --kind mackey-glass --n 300 --seed 7 --out " + data_path)
                .exit_code == 0);
    const auto train = run_cli("train-anfis --data " + data_path
                               + " --trainer hybrid --epochs 10 --terms 2 --out "
                               + model_path + " --report-csv " + report_csv);
    REQUIRE(train.exit_code == 0);

    const auto eval = run_cli("evaluate --model " + model_path + " --data " + data_path);
    CHECK(eval.exit_code == 0);
    CHECK(eval.output.find("rmse") != std::string::npos);

    const auto table = csv::read_file(report_csv);
    CHECK(table.header == std::vector<std::string>{"epoch", "rmse"});
    CHECK(!table.rows.empty());

    std::remove(data_path.c_str());
    std::remove(model_path.c_str());
    std::remove(report_csv.c_str());
}

TEST_CASE("pipeline-run degrades on a bad events file but exits zero", "[cli]") {
    const auto data_path = testutil::temp_path("series");
    const auto map_path = testutil::temp_path("map");
    const auto config_path = testutil::temp_path("config");
    const auto events_path = testutil::temp_path("events");
    const auto report_path = testutil::temp_path("report");

    REQUIRE(run_cli("synth --kind mackey-glass --n 300 --seed 7 --out " + data_path)
                .exit_code == 0);
    dump(map_path, R"({
        "concepts": ["growth", "volatility", "sentiment", "price"],
        "weights": [[0,0,0,0.8],[0,0,0,-0.3],[0.5,0,0,0.4],[0,0,0,0]],
        "lambda": 1.0, "k_self": 1.0
    })");
    dump(config_path, std::string(R"({
        "adequacy_threshold": 0.5,
        "window": {"length": 4, "horizon": 1},
        "mlp": {"hidden": [8], "epochs": 120},
        "seed": 7,
        "fcm": {"map_path": ")") + map_path + R"(", "target": "price"}
    })");

    SECTION("healthy events") {
        dump(events_path, R"({"sentiment": 0.9, "volatility": 0.2})");
        const auto run = run_cli("pipeline-run --data " + data_path + " --events "
                                 + events_path + " --config " + config_path + " --out "
                                 + report_path);
        REQUIRE(run.exit_code == 0);
        const auto report = nlohmann::json::parse(slurp(report_path));
        CHECK(report.at("degraded") == false);
        CHECK(report.at("status").at("fcm") == "ok");
        std::remove(report_path.c_str());
    }

    SECTION("events referencing an unknown concept degrade the run") {
        dump(events_path, R"({"no-such-concept": 0.9})");
        const auto run = run_cli("pipeline-run --data " + data_path + " --events "
                                 + events_path + " --config " + config_path + " --out "
                                 + report_path);
        REQUIRE(run.exit_code == 0);
        const auto report = nlohmann::json::parse(slurp(report_path));
        CHECK(report.at("degraded") == true);
        CHECK(report.at("status").at("fcm") == "failed");
        CHECK(report.at("final") == report.at("quantitative"));
        std::remove(report_path.c_str());
    }

    SECTION("malformed events JSON also degrades rather than aborting") {
        dump(events_path, "{ this is not json");
        const auto run = run_cli("pipeline-run --data " + data_path + " --events "
                                 + events_path + " --config " + config_path + " --out "
                                 + report_path);
        REQUIRE(run.exit_code == 0);
        const auto report = nlohmann::json::parse(slurp(report_path));
        CHECK(report.at("degraded") == true);
        CHECK(report.at("status").at("fcm") == "failed");
        std::remove(report_path.c_str());
    }

    std::remove(data_path.c_str());
    std::remove(map_path.c_str());
    std::remove(config_path.c_str());
    std::remove(events_path.c_str());
}

TEST_CASE("train-mlp writes a model the evaluator can score", "[cli]") {
    const auto data_path = testutil::temp_path("series");
    const auto model_path = testutil::temp_path("mlpmodel");
    REQUIRE(run_cli("synth --kind sine --n 200 --noise 0 --seed 3 --out " + data_path)
                .exit_code == 0);
    const auto train = run_cli("train-mlp --data " + data_path
                               + " --hidden 6 --epochs 30 --seed 3 --out " + model_path);
    REQUIRE(train.exit_code == 0);
    const auto eval = run_cli("evaluate --model " + model_path + " --data " + data_path);
    CHECK(eval.exit_code == 0);
    CHECK(eval.output.find("rmse") != std::string::npos);
    std::remove(data_path.c_str());
    std::remove(model_path.c_str());
}

TEST_CASE("fcm-learn ingests transitions and writes a map", "[cli]") {
    const auto transitions_path = testutil::temp_path("transitions");
    const auto map_path = testutil::temp_path("learned");

    // A short noisy trajectory of a simple 3-concept system.
    fcm::ConceptMap map;
    map.concepts = {"a", "b", "c"};
    map.weights = linalg::Matrix(3, 3);
    map.weights(0, 1) = 0.7;
    map.weights(1, 2) = -0.5;
    map.steepness = 1.0;
    map.self_memory = 1.0;

    fcm::TransitionData data;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> act(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int s = 0; s < 40; ++s) {
        fcm::FcmState state{act(rng), act(rng), act(rng)};
        fcm::FcmState next = fcm::step(map, state);
        for (auto& a : next) a = std::clamp(a + noise(rng), 0.0, 1.0);
        data.sequences.push_back({std::move(state), std::move(next)});
    }
    fcm::save_transitions_csv(transitions_path, map.concepts, data);

    const auto run = run_cli("fcm-learn --transitions " + transitions_path
                             + " --generations 20 --population 20 --seed 3 --out "
                             + map_path);
    REQUIRE(run.exit_code == 0);
    const auto learned = fcm::map_from_json(nlohmann::json::parse(slurp(map_path)));
    CHECK(learned.concepts == map.concepts);

    std::remove(transitions_path.c_str());
    std::remove(map_path.c_str());
}
