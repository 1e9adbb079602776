// Recomputes every golden report listed in a corpus manifest.
//
//   regenerate_goldens [MANIFEST] [--check]
//
// All cases are solved before anything is written; an oracle failure aborts
// with no files touched. --check compares instead of writing.

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "leakload/corpus.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Regenerate corpus golden reports"};
    std::string manifest_path = "corpus/manifest";
    bool check = false;
    app.add_option("manifest", manifest_path, "Corpus manifest")->capture_default_str();
    app.add_flag("--check", check, "Compare against the stored goldens instead of writing");
    CLI11_PARSE(app, argc, argv);

    using namespace leakload;
    try {
        auto dir = std::filesystem::path(manifest_path).parent_path();
        auto manifest = corpus::parse_manifest(text::read_file(manifest_path));
        if (check) {
            int failed = 0;
            for (const auto& gc : manifest.cases) {
                auto golden = nlohmann::ordered_json::parse(text::read_file(corpus::golden_path(dir, gc)));
                auto problems = corpus::check_golden(dir, gc, golden);
                for (const auto& p : problems) std::fprintf(stderr, "%s\n", p.c_str());
                std::printf("%-14s %s\n", gc.name.c_str(), problems.empty() ? "ok" : "FAILED");
                failed += problems.empty() ? 0 : 1;
            }
            return failed ? 4 : 0;
        }
        std::vector<std::pair<std::filesystem::path, std::string>> pending;
        for (const auto& gc : manifest.cases) {
            if (gc.generated_seed) {
                auto spec = manifest.random_dag;
                spec.seed = *gc.generated_seed;
                if (text::read_file(dir / gc.netlist) != random_bench(spec))
                    throw InvalidInput("case '" + gc.name + "': " + gc.netlist + " differs from the generator output");
            }
            pending.emplace_back(corpus::golden_path(dir, gc), corpus::compute_golden(dir, gc).dump(2) + "\n");
            std::printf("%-14s solved\n", gc.name.c_str());
        }
        std::filesystem::create_directories(dir / "goldens");
        for (const auto& [path, content] : pending) text::write_file_atomic(path, content);
        std::printf("wrote %zu goldens\n", pending.size());
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 3;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s (nothing written)\n", e.what());
        return 4;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 2;
    }
    return 0;
}
