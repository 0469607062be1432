#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hotelling/entry.hpp"
#include "hotelling/market.hpp"

namespace hotelling {

struct OutputFlags {
    bool json = true;
    bool svg = false;
    bool csv = false;
};

// One scenario file. Every key is optional; see README for the format.
struct ScenarioConfig {
    std::string id = "scenario";
    MarketParams params{};
    int n_max = 1;
    std::vector<double> market_sizes;  // explicit M values
    bool has_market_sweep = false;     // M values lo, ..., hi in `steps` equal steps
    double sweep_lo = 0.0;
    double sweep_hi = 0.0;
    int sweep_steps = 0;
    bool thresholds = false;  // threshold_sweep for n = 1..n_max
    double threshold_lo = 1.0;
    double threshold_hi = 1e5;
    bool social_optimum = false;
    int optimum_starts = 32;
    std::string demand_route = "rays";  // final pricing: "rays" or "grid"
    int consumer_resolution = 128;
    int location_resolution = 33;
    int leader_resolution = 0;  // 0: the location grid
    int last_resolution = 0;
    int entrant_resolution = 0;
    int climb_starts = 4;
    std::uint64_t seed = 1;
    int threads = 1;
    OutputFlags outputs{};

    // File name and line of each key as "section.key", for messages.
    std::string source;
    std::vector<std::pair<std::string, int>> key_lines;

    // Throws Error(config_error) naming the offending field (and its line).
    void validate() const;
    // Explicit values followed by the sweep values, ascending and unique.
    std::vector<double> market_size_list() const;
};

// Parses the TOML text. Errors carry "line N" and the offending key.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source_name = "config");
ScenarioConfig load_scenario(const std::string& path);

// Command-line overrides; unset fields keep the file's values.
struct ScenarioOverrides {
    std::optional<int> n_max;
    std::vector<double> market_sizes;  // replaces the file's M values when non-empty
    std::optional<bool> thresholds;
    std::optional<bool> figures;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void apply_overrides(ScenarioConfig& config, const ScenarioOverrides& overrides);

// One line of results.json. Everything here is deterministic for a given
// scenario; wall times and cache counters go to diagnostics.json instead.
struct ResultRecord {
    std::string scenario;
    std::string kind;  // equilibrium | threshold | social_optimum
    std::string status = "ok";
    std::string message;
    int n = 0;  // firms placed by backward induction (or sites, for an optimum)
    double market_size = 0.0;
    std::vector<Point> configuration;
    std::vector<double> prices;
    std::vector<double> demand;
    std::vector<double> profits;
    std::string regime;
    bool entrant_blocked = false;
    double best_entrant_profit = 0.0;
    std::optional<Point> best_entrant_location;
    double social_cost = 0.0;
    std::optional<double> m_enter;
    std::optional<double> m_max_deter;
    std::optional<bool> monotone;
    bool prices_converged = true;
    int price_iterations = 0;
    double price_spread = 0.0;
    double price_residual = 0.0;
    std::vector<Point> first_choice_ties;
    std::optional<double> local_optimum_spread;

    friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

ResultRecord make_record(const std::string& scenario, const std::string& kind, int n,
                         const EquilibriumResult& result);

std::string records_to_json(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> records_from_json(const std::string& text);

// SVG 1.1 drawing of a record: unit-square frame, equal-price cells, firms
// numbered in entry order, caption with n, M and regime.
std::string emit_figure(const ResultRecord& record);

// Semicolon-free CSV of firm-level rows for every record with firms.
std::string records_to_csv(const std::vector<ResultRecord>& records);

struct CaseDiagnostics {
    std::string label;
    double wall_seconds = 0.0;
};

struct ScenarioRun {
    std::vector<ResultRecord> records;
    std::vector<CaseDiagnostics> cases;
    SearchCounters counters;
    std::vector<std::string> failures;  // non-converged or failed cases
    int exit_code = 0;                  // 0 ok, 3 when any case failed to converge
};

// Runs every requested solve in a fixed order with one shared solver.
ScenarioRun run_scenario(const ScenarioConfig& config);

// run_scenario plus output files in out_dir: results.json, diagnostics.json,
// figures/fig_<n>_<regime>[_<k>].svg and results.csv as requested.
ScenarioRun run_scenario_to(const ScenarioConfig& config, const std::string& out_dir);

inline constexpr int kResultSchema = 1;

}  // namespace hotelling
