#include <filesystem>
#include <set>

#include "catch_amalgamated.hpp"
#include "leakload/corpus.hpp"

using namespace leakload;

namespace {

const std::filesystem::path kDir = std::filesystem::path(LEAKLOAD_SOURCE_DIR) / "corpus";

corpus::Manifest manifest() { return corpus::parse_manifest(text::read_file(kDir / "manifest")); }

}  // namespace

TEST_CASE("manifest lists every corpus netlist") {
    auto m = manifest();
    CHECK(m.cases.size() >= 10);
    CHECK(m.gate_mix == corpus::format_gate_mix());
    std::set<std::string> used;
    for (const auto& c : m.cases) {
        used.insert(c.netlist);
        CHECK(std::filesystem::exists(kDir / c.netlist));
        CHECK(std::filesystem::exists(corpus::golden_path(kDir, c)));
    }
    for (const auto& entry : std::filesystem::directory_iterator(kDir))
        if (entry.path().extension() == ".bench") CHECK(used.contains(entry.path().filename().string()));
}

TEST_CASE("generated netlists match the generator") {
    auto m = manifest();
    int generated = 0;
    for (const auto& c : m.cases) {
        if (!c.generated_seed) continue;
        ++generated;
        auto spec = m.random_dag;
        spec.seed = *c.generated_seed;
        CHECK(text::read_file(kDir / c.netlist) == random_bench(spec));
    }
    CHECK(generated >= 3);
}

TEST_CASE("every case reproduces its golden") {
    for (const auto& c : manifest().cases) {
        auto golden = nlohmann::ordered_json::parse(text::read_file(corpus::golden_path(kDir, c)));
        auto problems = corpus::check_golden(kDir, c, golden);
        INFO(c.name);
        for (const auto& p : problems) UNSCOPED_INFO(p);
        CHECK(problems.empty());
    }
}

TEST_CASE("golden computation is deterministic") {
    auto m = manifest();
    const auto& c = m.cases.front();
    CHECK(corpus::compute_golden(kDir, c).dump() == corpus::compute_golden(kDir, c).dump());
    auto g = corpus::compute_golden(kDir, c);
    for (const auto& run : g["runs"]) CHECK(run["oracle"]["max_residual"].get<double>() <= 1e-16);
}

TEST_CASE("a tampered golden is reported") {
    auto m = manifest();
    const auto& c = m.cases.front();
    auto golden = nlohmann::ordered_json::parse(text::read_file(corpus::golden_path(kDir, c)));
    double& v = golden["runs"][0]["oracle"]["total"]["isub"].get_ref<double&>();
    v *= 1.001;
    CHECK_FALSE(corpus::check_golden(kDir, c, golden).empty());
}

TEST_CASE("manifest errors") {
    CHECK_THROWS_AS(corpus::parse_manifest("[case a]\nnetlist = x\nvectors = 0\n[defaults]\npreset = D25-S\n"), ParseError);
    CHECK_THROWS_AS(corpus::parse_manifest("[case a]\nnetlist = x\nvectors = 0\n[case a]\nnetlist = y\n"), ParseError);
    CHECK_THROWS_AS(corpus::parse_manifest("[case a]\nvectors = 0\n"), InvalidInput);
    CHECK_THROWS_AS(corpus::parse_manifest("[case a]\nnetlist = x\nvectors = 0\ncolor = red\n"), ParseError);
    CHECK_THROWS_AS(corpus::parse_manifest("[case a]\nnetlist = x\nvectors = 0\npreset = nope\n"), InvalidInput);
}
