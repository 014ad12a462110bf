// End-to-end checks of the command-line tool: spawns the real binary and
// inspects exit codes and emitted documents.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef EVTAIL_CLI_PATH
#error "EVTAIL_CLI_PATH must point at the built binary"
#endif

using nlohmann::json;

namespace {

const std::string kTmp = "/tmp/evtail_cli_test_";

int run_cli(const std::string& args) {
    const std::string command =
        std::string(EVTAIL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    REQUIRE(file.good());
    std::stringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << text;
}

} // namespace

TEST_CASE("loss subcommand reproduces the reference value") {
    const std::string out = kTmp + "loss.json";
    REQUIRE(run_cli("loss --true 196.6 --estimate 199.4 --out " + out) == 0);
    const json doc = json::parse(slurp(out));
    CHECK(doc["result"]["loss"].get<double>() == doctest::Approx(0.0834).epsilon(1e-10));
    CHECK(doc["meta"]["command"] == "loss");
    std::remove(out.c_str());
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli("loss --true 196.6") == 1);          // missing flag
    CHECK(run_cli("loss --true -1 --estimate 1") == 1); // domain violation
    CHECK(run_cli("no-such-command") == 1);
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("data errors exit with code 2") {
    CHECK(run_cli("challenge3 --data /tmp/evtail_nonexistent.csv") == 2);
    const std::string bad = kTmp + "bad.csv";
    spit(bad, "a,b,c\n1,2,oops\n");
    CHECK(run_cli("challenge3 --data " + bad) == 2);
    std::remove(bad.c_str());
}

TEST_CASE("numerical failures exit with code 3") {
    const std::string flat = kTmp + "flat.csv";
    std::string text = "y\n";
    for (int i = 0; i < 40; ++i) {
        text += "12.5\n";
    }
    spit(flat, text);
    CHECK(run_cli("fit-gpd --data " + flat + " --threshold 10 --method mle") == 3);
    std::remove(flat.c_str());
}

TEST_CASE("simulate, challenge3 and oracle agree end to end") {
    const std::string model = kTmp + "model.json";
    spit(model, R"({"alpha": 1.0,
                    "A": [[0.26, 0.50, 0.24, 0.00, 0.00],
                          [0.25, 0.45, 0.00, 0.30, 0.00],
                          [0.24, 0.00, 0.00, 0.00, 0.76]]})");
    const std::string data = kTmp + "sample.csv";
    REQUIRE(run_cli("simulate --model-json " + model +
                    " --n 21000 --seed 606 --out-csv " + data + " --out /dev/null") == 0);

    const std::string c3 = kTmp + "c3.json";
    REQUIRE(run_cli("challenge3 --data " + data + " --no-transform --k 500 --seed 1 --out " +
                    c3) == 0);
    const json c3_doc = json::parse(slurp(c3));
    const double p1 = c3_doc["result"]["point_estimates"]["p1"].get<double>();
    REQUIRE(p1 > 0.0);

    // identical rerun produces identical bytes
    const std::string c3_again = kTmp + "c3_again.json";
    REQUIRE(run_cli("challenge3 --data " + data + " --no-transform --k 500 --seed 1 --out " +
                    c3_again) == 0);
    CHECK(slurp(c3) == slurp(c3_again));

    const std::string region = kTmp + "region.json";
    {
        const double u = std::exp(6.0);
        json r{{"beta", {1, 2, 3}}, {"u", {u, u, u}}, {"l", nullptr}};
        spit(region, r.dump());
    }
    const std::string oracle = kTmp + "oracle.json";
    REQUIRE(run_cli("oracle --model-json " + model + " --region-json " + region +
                    " --n-sim 2000000 --seed 9 --out " + oracle) == 0);
    const json oracle_doc = json::parse(slurp(oracle));
    const double mc = oracle_doc["result"]["monte_carlo"]["p_hat"].get<double>();
    const double se = oracle_doc["result"]["monte_carlo"]["std_err"].get<double>();
    const double formula = oracle_doc["result"]["formula"]["value"].get<double>();
    // formula and its Monte Carlo check agree, and the pipeline estimate
    // lands in the same range
    CHECK(std::abs(formula - mc) < 3.0 * se + 0.02 * formula);
    CHECK(p1 > 0.5 * mc);
    CHECK(p1 < 2.0 * mc);

    for (const auto& path : {model, data, c3, c3_again, region, oracle}) {
        std::remove(path.c_str());
    }
}

TEST_CASE("cluster subcommand writes a partition csv") {
    const std::string model = kTmp + "pair_model.json";
    spit(model, R"({"alpha": 2.0,
                    "A": [[0.9, 0.0, 0.436, 0.0],
                          [0.9, 0.0, 0.0, 0.436],
                          [0.0, 1.0, 0.0, 0.0]]})");
    const std::string data = kTmp + "cluster.csv";
    REQUIRE(run_cli("simulate --model-json " + model + " --n 4000 --seed 3 --out-csv " +
                    data + " --out /dev/null") == 0);
    const std::string out = kTmp + "cluster.json";
    const std::string csv = kTmp + "partition.csv";
    REQUIRE(run_cli("cluster --data " + data + " --K 2 --silhouette-sweep 3 --out " + out +
                    " --out-csv " + csv) == 0);
    const json doc = json::parse(slurp(out));
    CHECK(doc["result"]["partition"]["labels"].size() == 3);
    // the comonotone pair lands together, the independent margin alone
    const auto labels = doc["result"]["partition"]["labels"];
    CHECK(labels[0] == labels[1]);
    CHECK(labels[0] != labels[2]);
    const std::string csv_text = slurp(csv);
    CHECK(csv_text.rfind("variable,cluster", 0) == 0);
    for (const auto& path : {model, data, out, csv}) {
        std::remove(path.c_str());
    }
}

TEST_CASE("sweep-k emits csv rows consistent with the json") {
    const std::string model = kTmp + "sweep_model.json";
    spit(model, R"({"alpha": 1.0,
                    "A": [[0.26, 0.50, 0.24, 0.00, 0.00],
                          [0.25, 0.45, 0.00, 0.30, 0.00],
                          [0.24, 0.00, 0.00, 0.00, 0.76]]})");
    const std::string data = kTmp + "sweep.csv";
    REQUIRE(run_cli("simulate --model-json " + model + " --n 6000 --seed 44 --out-csv " +
                    data + " --out /dev/null") == 0);
    const std::string out = kTmp + "sweep_out.json";
    const std::string csv = kTmp + "sweep_rows.csv";
    REQUIRE(run_cli("sweep-k --data " + data + " --no-transform --k-list 100,150,200 "
                    "--challenge 3 --out " + out + " --out-csv " + csv) == 0);
    const json doc = json::parse(slurp(out));
    REQUIRE(doc["result"]["rows"].size() == 3);
    CHECK(doc["result"]["rows"][0]["ok"].get<bool>());
    const std::string csv_text = slurp(csv);
    CHECK(csv_text.rfind("k,p1,p2", 0) == 0);
    CHECK(csv_text.find("\n100,") != std::string::npos);
    for (const auto& path : {model, data, out, csv}) {
        std::remove(path.c_str());
    }
}
