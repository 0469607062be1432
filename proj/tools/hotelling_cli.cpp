#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hotelling/hotelling.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNotConverged = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential entry and location on the unit square"};
    std::string config_path;
    std::string out_dir = "out";
    std::optional<int> n_max;
    std::vector<double> market_sizes;
    bool sweep = false;
    bool figures = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;

    app.add_option("--config", config_path, "scenario file (TOML)")->required();
    app.add_option("--out-dir", out_dir, "directory for results.json, figures and tables");
    app.add_option("--n", n_max, "largest number of firms")->check(CLI::Range(1, 7));
    app.add_option("--market-size", market_sizes, "market sizes M, replacing the file's list")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    app.add_flag("--sweep", sweep, "locate the entry thresholds for n = 1..n_max");
    app.add_flag("--figures", figures, "write SVG figures");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    hot_overrides overrides;
    hot_overrides_default(&overrides);
    if (n_max) overrides.n_max = *n_max;
    overrides.market_sizes = market_sizes.data();
    overrides.market_size_count = market_sizes.size();
    if (sweep) overrides.thresholds = 1;
    if (figures) overrides.figures = 1;
    if (seed) {
        overrides.has_seed = 1;
        overrides.seed = *seed;
    }
    if (threads) overrides.threads = *threads;

    hot_run* run = nullptr;
    const hot_status status = hot_run_scenario(config_path.c_str(), out_dir.c_str(), &overrides, &run);
    if (status != HOT_OK) {
        std::fprintf(stderr, "error (%s): %s\n", hot_status_name(status), hot_last_error());
        return kExitInvalid;
    }
    const int exit_code = hot_run_exit_code(run);
    std::printf("%zu records written to %s in %.1f s\n", hot_run_record_count(run), out_dir.c_str(),
                hot_run_wall_seconds(run));
    if (exit_code == kExitNotConverged) {
        std::fprintf(stderr, "cases that did not converge:\n");
        for (std::size_t i = 0; i < hot_run_failure_count(run); ++i) {
            std::fprintf(stderr, "  %s\n", hot_run_failure(run, i));
        }
    }
    hot_run_destroy(run);
    return exit_code == 0 ? kExitOk : kExitNotConverged;
}
