#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "rrl/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("rrl_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Result cli(const std::string& args) {
    fs::path dir = scratch("io");
    std::string cmd = std::string(RRL_CLI_PATH) + " " + args + " > " + (dir / "out").string() + " 2> " +
                      (dir / "err").string();
    int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "out"), slurp(dir / "err")};
}

std::string canonical() { return testutil::data("canonical_instance.json"); }

fs::path write_doc(const nlohmann::json& doc, const std::string& name) {
    fs::path p = scratch("docs_" + name) / "instance.json";
    std::ofstream(p) << doc.dump();
    return p;
}

std::vector<fs::path> files_with_suffix(const fs::path& dir, const std::string& suffix) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string n = e.path().filename().string();
        if (n.size() >= suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(e.path());
    }
    return out;
}

nlohmann::json summary_in(const fs::path& dir) {
    auto f = files_with_suffix(dir, "_summary.json");
    REQUIRE(f.size() == 1);
    return nlohmann::json::parse(slurp(f[0]));
}

}  // namespace

TEST_CASE("validate: canonical instance") {
    Result r = cli("validate --instance " + canonical());
    CHECK(r.code == 0);
    CHECK(r.out.rfind("OK, 6 sources, 7 links", 0) == 0);
    CHECK(r.out.find("feasibility: ok") != std::string::npos);
    CHECK(r.out.find("sources=[1,3,4,5,6]") != std::string::npos);
}

TEST_CASE("validate: rejected inputs") {
    nlohmann::json doc = testutil::canonical_doc();
    doc["links"][2]["capacity"] = -2.5;
    Result r = cli("validate --instance " + write_doc(doc, "neg").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("links[2].capacity") != std::string::npos);

    doc = testutil::canonical_doc();
    doc["routes"]["1"] = {"a", "e"};
    r = cli("validate --instance " + write_doc(doc, "gap").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("routes.1[1]") != std::string::npos);

    doc = testutil::canonical_doc();
    doc["links"][4]["capacity"] = 0.3;
    r = cli("validate --instance " + write_doc(doc, "tight").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("feasibility") != std::string::npos);

    CHECK(cli("validate --instance /nonexistent.json").code == 3);
    CHECK(cli("validate --instance " + canonical() + " --set gamma=2").code == 1);
    CHECK(cli("validate --instance " + canonical() + " --set gamma=abc").code == 1);
    CHECK(cli("validate --instance " + canonical() + " --set bogus=1").code == 1);
    CHECK(cli("run --instance " + canonical() + " --solver simplex").code == 1);
    CHECK(cli("bogus").code == 1);
}

TEST_CASE("run: oracle only writes a summary and no trace") {
    fs::path out = scratch("oracle_only");
    Result r = cli("run --instance " + canonical() + " --solver oracle --out " + out.string());
    CHECK(r.code == 0);
    CHECK(files_with_suffix(out, "_trace.csv").empty());
    CHECK(files_with_suffix(out, "_plot.csv").empty());
    nlohmann::json s = summary_in(out);
    CHECK(s["status"] == "optimal");
    CHECK(s["x"].size() == 6);
    CHECK_FALSE(s.contains("sdd"));
}

TEST_CASE("run: both solvers at 0.8 converge with a small gap") {
    fs::path out = scratch("both");
    Result r = cli("run --instance " + canonical() + " --set gamma=0.8 --set phi=0.8 --out " + out.string());
    CHECK(r.code == 0);
    nlohmann::json s = summary_in(out);
    CHECK(s["sdd"]["status"] == "converged");
    CHECK(s["duality_gap"].contains("relative"));
    CHECK(std::abs(s["duality_gap"]["relative"].get<double>()) <= 0.01);
    CHECK(std::abs(s["utility_vs_oracle_relative"].get<double>()) <= 0.01);
    CHECK(files_with_suffix(out, "_trace.csv").size() == 1);
    std::string plot = slurp(files_with_suffix(out, "_plot.csv")[0]);
    CHECK(plot.rfind("iteration,x_1,x_2,x_3,x_4,x_5,x_6,total_utility,avg_total_utility\n", 0) == 0);
    for (const char* k : {"x", "R", "T", "min_T", "total_utility"}) CHECK(s.contains(k));
}

TEST_CASE("run: 0.97 rates dominate 0.8 rates") {
    fs::path a = scratch("w97"), b = scratch("w80");
    CHECK(cli("run --instance " + canonical() + " --solver sdd --set gamma=0.97 --set phi=0.97 --out " + a.string())
              .code == 0);
    CHECK(cli("run --instance " + canonical() + " --solver sdd --out " + b.string()).code == 0);
    CHECK(rrl::rates_dominate(summary_in(a), summary_in(b)));
    CHECK_FALSE(rrl::rates_dominate(summary_in(b), summary_in(a)));
}

TEST_CASE("run: identical configs give identical artifacts") {
    fs::path a = scratch("rep_a"), b = scratch("rep_b");
    std::string args = "run --instance " + canonical() + " --solver sdd --max-iters 1500";
    CHECK(cli(args + " --out " + a.string()).code == 2);
    CHECK(cli(args + " --threads 3 --out " + b.string()).code == 2);
    auto ta = files_with_suffix(a, "_trace.csv"), tb = files_with_suffix(b, "_trace.csv");
    REQUIRE(ta.size() == 1);
    REQUIRE(tb.size() == 1);
    CHECK(ta[0].filename() == tb[0].filename());
    CHECK(slurp(ta[0]) == slurp(tb[0]));
    CHECK(slurp(files_with_suffix(a, "_summary.json")[0]) == slurp(files_with_suffix(b, "_summary.json")[0]));
    CHECK(summary_in(a)["status"] == "max_iterations");
}

TEST_CASE("run: unwritable output directory is an io error") {
    fs::path blocker = scratch("blocker") / "file";
    std::ofstream(blocker) << "x";
    CHECK(cli("run --instance " + canonical() + " --solver oracle --out " + (blocker / "sub").string()).code == 3);
}

TEST_CASE("sweep: degenerate range gives one row") {
    fs::path out = scratch("sweep_one");
    Result r = cli("sweep --instance " + canonical() + " --solver oracle --sweep phi --from 0.5 --to 0.5 --out " +
                   out.string());
    CHECK(r.code == 0);
    auto csv = files_with_suffix(out, "_sweep.csv");
    REQUIRE(csv.size() == 1);
    std::string text = slurp(csv[0]);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.rfind("phi,sum_rate_utility_unweighted,sum_reliability_utility_unweighted,network_lifetime_s,", 0) == 0);
    auto js = files_with_suffix(out, "_sweep_summary.json");
    REQUIRE(js.size() == 1);
    nlohmann::json s = nlohmann::json::parse(slurp(js[0]));
    CHECK(s["rate_utility_nondecreasing"] == true);
    CHECK(s["failures"].empty());
}

TEST_CASE("sweep: invalid ranges") {
    CHECK(cli("sweep --instance " + canonical() + " --sweep phi --from 0.8 --to 0.2").code == 1);
    CHECK(cli("sweep --instance " + canonical() + " --sweep phi --step 0").code == 1);
    CHECK(cli("sweep --instance " + canonical() + " --sweep alpha").code == 1);
    CHECK(cli("sweep --instance " + canonical() + " --sweep gamma --to 1.5").code == 1);
}

TEST_CASE("sweep points are exact multiples of the step") {
    rrl::SweepSpec s{"gamma", 0.1, 1.0, 0.1, 1.0};
    auto pts = rrl::sweep_points(s);
    REQUIRE(pts.size() == 10);
    CHECK(pts.back() == doctest::Approx(1.0).epsilon(1e-15));
    s.from = s.to = 0.3;
    CHECK(rrl::sweep_points(s).size() == 1);
}
