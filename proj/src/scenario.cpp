#include "hotelling/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "hotelling/error.hpp"
#include "hotelling/welfare.hpp"

namespace hotelling {
namespace {

constexpr int kMinResolution = 9;

[[noreturn]] void fail_at(const std::string& source, const toml::source_region& where, const std::string& what) {
    std::ostringstream msg;
    msg << source << ":" << where.begin.line << ": " << what;
    throw Error(ErrorCode::config_error, msg.str());
}

class Reader {
public:
    Reader(ScenarioConfig& config, std::string source) : config_(config), source_(std::move(source)) {}

    void read(const toml::table& root) {
        for (const auto& [key, node] : root) {
            const std::string k(key.str());
            if (const auto* table = node.as_table()) {
                read_section(k, *table);
            } else if (k == "id") {
                config_.id = string(node, k);
            } else if (k == "seed") {
                config_.seed = static_cast<std::uint64_t>(integer(node, k, 0));
            } else if (k == "threads") {
                config_.threads = static_cast<int>(integer(node, k, 1));
            } else {
                fail_at(source_, node.source(), "unknown key '" + k + "'");
            }
            mark("", k, node);
        }
    }

private:
    void read_section(const std::string& section, const toml::table& table) {
        for (const auto& [key, node] : table) {
            const std::string k(key.str());
            mark(section, k, node);
            if (section == "market") {
                auto& p = config_.params;
                if (k == "market_size") p.market_size = number(node, k);
                else if (k == "fixed_cost") p.fixed_cost = number(node, k);
                else if (k == "transport_cost") p.transport_cost = number(node, k);
                else if (k == "reservation") p.reservation = number(node, k);
                else if (k == "marginal_cost") p.marginal_cost = number(node, k);
                else unknown(section, k, node);
            } else if (section == "solve") {
                if (k == "n_max") {
                    config_.n_max = static_cast<int>(integer(node, k, 0));
                } else if (k == "market_sizes") {
                    config_.market_sizes = numbers(node, k);
                } else if (k == "market_sweep") {
                    const auto v = numbers(node, k);
                    if (v.size() != 3 || v[2] != std::floor(v[2])) {
                        fail_at(source_, node.source(), "market_sweep must be [lo, hi, steps]");
                    }
                    config_.has_market_sweep = true;
                    config_.sweep_lo = v[0];
                    config_.sweep_hi = v[1];
                    config_.sweep_steps = static_cast<int>(v[2]);
                } else if (k == "thresholds") {
                    config_.thresholds = boolean(node, k);
                } else if (k == "threshold_range") {
                    const auto v = numbers(node, k);
                    if (v.size() != 2) fail_at(source_, node.source(), "threshold_range must be [lo, hi]");
                    config_.threshold_lo = v[0];
                    config_.threshold_hi = v[1];
                } else if (k == "social_optimum") {
                    config_.social_optimum = boolean(node, k);
                } else if (k == "optimum_starts") {
                    config_.optimum_starts = static_cast<int>(integer(node, k, 0));
                } else {
                    unknown(section, k, node);
                }
            } else if (section == "grids") {
                if (k == "demand_route") config_.demand_route = string(node, k);
                else if (k == "consumer_resolution") config_.consumer_resolution = static_cast<int>(integer(node, k, 0));
                else if (k == "location_resolution") config_.location_resolution = static_cast<int>(integer(node, k, 0));
                else if (k == "leader_resolution") config_.leader_resolution = static_cast<int>(integer(node, k, 0));
                else if (k == "last_resolution") config_.last_resolution = static_cast<int>(integer(node, k, 0));
                else if (k == "entrant_resolution") config_.entrant_resolution = static_cast<int>(integer(node, k, 0));
                else if (k == "climb_starts") config_.climb_starts = static_cast<int>(integer(node, k, 0));
                else unknown(section, k, node);
            } else if (section == "outputs") {
                if (k == "json") config_.outputs.json = boolean(node, k);
                else if (k == "svg") config_.outputs.svg = boolean(node, k);
                else if (k == "csv") config_.outputs.csv = boolean(node, k);
                else unknown(section, k, node);
            } else {
                fail_at(source_, table.source(), "unknown section [" + section + "]");
            }
        }
    }

    void mark(const std::string& section, const std::string& key, const toml::node& node) {
        if (node.is_table()) return;
        config_.key_lines.emplace_back(section.empty() ? key : section + "." + key,
                                       static_cast<int>(node.source().begin.line));
    }

    [[noreturn]] void unknown(const std::string& section, const std::string& key, const toml::node& node) {
        fail_at(source_, node.source(), "unknown key '" + key + "' in [" + section + "]");
    }

    double number(const toml::node& node, const std::string& key) {
        if (const auto v = node.value<double>(); v && (node.is_integer() || node.is_floating_point())) return *v;
        fail_at(source_, node.source(), key + " must be a number");
    }

    std::int64_t integer(const toml::node& node, const std::string& key, std::int64_t min) {
        const auto v = node.value_exact<std::int64_t>();
        if (!v) fail_at(source_, node.source(), key + " must be an integer");
        if (*v < min) fail_at(source_, node.source(), key + " must be >= " + std::to_string(min));
        return *v;
    }

    bool boolean(const toml::node& node, const std::string& key) {
        const auto v = node.value_exact<bool>();
        if (!v) fail_at(source_, node.source(), key + " must be true or false");
        return *v;
    }

    std::string string(const toml::node& node, const std::string& key) {
        const auto v = node.value_exact<std::string>();
        if (!v) fail_at(source_, node.source(), key + " must be a string");
        return *v;
    }

    std::vector<double> numbers(const toml::node& node, const std::string& key) {
        const auto* arr = node.as_array();
        if (arr == nullptr) fail_at(source_, node.source(), key + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& item : *arr) out.push_back(number(item, key));
        return out;
    }

    ScenarioConfig& config_;
    std::string source_;
};

std::string field_prefix(const ScenarioConfig& config, const std::string& field) {
    for (const auto& [key, line] : config.key_lines) {
        if (key == field || key.ends_with("." + field)) {
            return (config.source.empty() ? "line " : config.source + ":") + std::to_string(line) + ": ";
        }
    }
    return "";
}

[[noreturn]] void invalid(const ScenarioConfig& config, const std::string& field, const std::string& what) {
    throw Error(ErrorCode::config_error, field_prefix(config, field) + field + " " + what);
}

std::string case_label(const std::string& kind, int n, std::optional<double> market_size = std::nullopt) {
    std::ostringstream s;
    s << kind << " n=" << n;
    if (market_size) s << " M=" << *market_size;
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source_name) {
    toml::table root;
    try {
        root = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
        fail_at(source_name, e.source(), std::string(e.description()));
    }
    ScenarioConfig config;
    config.source = source_name;
    Reader(config, source_name).read(root);
    return config;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::config_error, "cannot read config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), path);
}

void ScenarioConfig::validate() const {
    try {
        params.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::config_error, std::string("[market] ") + e.what());
    }
    if (n_max < 1 || n_max > 7) invalid(*this, "n_max", "must be in 1..7");
    for (double m : market_sizes) {
        if (!(m > 0.0) || !std::isfinite(m)) invalid(*this, "market_sizes", "must all be > 0");
    }
    if (has_market_sweep) {
        if (!(sweep_lo > 0.0) || !(sweep_hi > sweep_lo) || sweep_steps < 2) {
            invalid(*this, "market_sweep", "needs 0 < lo < hi and steps >= 2");
        }
    }
    if (!(threshold_lo > 0.0) || !(threshold_hi > threshold_lo)) {
        invalid(*this, "threshold_range", "needs 0 < lo < hi");
    }
    if (optimum_starts < 0) invalid(*this, "optimum_starts", "must be >= 0");
    if (demand_route != "rays" && demand_route != "grid") invalid(*this, "demand_route", "must be \"rays\" or \"grid\"");
    if (consumer_resolution < kMinResolution) invalid(*this, "consumer_resolution", "must be >= 9");
    if (location_resolution < kMinResolution || location_resolution > 129 || location_resolution % 2 == 0) {
        invalid(*this, "location_resolution", "must be odd and in [9, 129]");
    }
    const auto sub = [&](int r, const char* field) {
        if (r == 0) return;
        if (r < kMinResolution || r > location_resolution || (location_resolution - 1) % (r - 1) != 0) {
            invalid(*this, field, "must be 0 or >= 9 with (r - 1) dividing location_resolution - 1");
        }
    };
    sub(leader_resolution, "leader_resolution");
    sub(last_resolution, "last_resolution");
    sub(entrant_resolution, "entrant_resolution");
    if (climb_starts < 1) invalid(*this, "climb_starts", "must be >= 1");
    if (threads < 1) invalid(*this, "threads", "must be >= 1");
    if (market_size_list().empty() && !thresholds && !social_optimum) {
        throw Error(ErrorCode::config_error,
                    "nothing to do: set [solve] market_sizes, market_sweep, thresholds or social_optimum");
    }
}

std::vector<double> ScenarioConfig::market_size_list() const {
    std::vector<double> out = market_sizes;
    if (has_market_sweep) {
        for (int k = 0; k < sweep_steps; ++k) {
            out.push_back(sweep_lo + (sweep_hi - sweep_lo) * k / (sweep_steps - 1));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void apply_overrides(ScenarioConfig& config, const ScenarioOverrides& overrides) {
    if (overrides.n_max) config.n_max = *overrides.n_max;
    if (!overrides.market_sizes.empty()) {
        config.market_sizes = overrides.market_sizes;
        config.has_market_sweep = false;
    }
    if (overrides.thresholds) config.thresholds = *overrides.thresholds;
    if (overrides.figures) config.outputs.svg = *overrides.figures;
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.threads) config.threads = *overrides.threads;
    // Overridden values no longer come from a file line.
    const auto drop = [&](const std::string& key) {
        std::erase_if(config.key_lines, [&](const auto& kl) { return kl.first == key; });
    };
    if (overrides.n_max) drop("solve.n_max");
    if (!overrides.market_sizes.empty()) drop("solve.market_sizes");
    if (overrides.threads) drop("threads");
}

ResultRecord make_record(const std::string& scenario, const std::string& kind, int n,
                         const EquilibriumResult& result) {
    ResultRecord r;
    r.scenario = scenario;
    r.kind = kind;
    r.n = n;
    r.market_size = result.market_size;
    r.configuration = result.configuration.locations();
    r.prices = result.prices;
    r.demand = result.demand;
    r.profits = result.profits;
    r.regime = regime_name(result.regime);
    r.entrant_blocked = result.entrant_blocked;
    r.best_entrant_profit = result.best_entrant_profit;
    r.best_entrant_location = result.best_entrant_location;
    r.social_cost = result.social_cost;
    r.prices_converged = result.prices_converged;
    r.price_iterations = result.price_iterations;
    r.price_spread = result.price_spread;
    r.price_residual = result.price_residual;
    r.first_choice_ties = result.first_choice_ties;
    return r;
}

ScenarioRun run_scenario(const ScenarioConfig& config) {
    config.validate();
    LocationGrid grid;
    grid.resolution = config.location_resolution;
    SearchSettings settings;
    settings.leader_resolution = config.leader_resolution;
    settings.last_resolution = config.last_resolution;
    settings.entrant_resolution = config.entrant_resolution;
    settings.climb_starts = config.climb_starts;
    settings.threads = config.threads;
    settings.pricing.route = config.demand_route == "grid" ? DemandRoute::grid : DemandRoute::rays;
    settings.pricing.grid.resolution = config.consumer_resolution;
    settings.pricing.seed = config.seed;
    GameSolver solver(config.params, grid, settings);

    ScenarioRun run;
    const auto timed = [&](const std::string& label, const auto& body) {
        const auto start = std::chrono::steady_clock::now();
        body();
        run.cases.push_back(
            {label, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
    };
    const auto failed_record = [&](const std::string& kind, int n, double m, const Error& e) {
        ResultRecord r;
        r.scenario = config.id;
        r.kind = kind;
        r.n = n;
        r.market_size = m;
        r.status = error_code_name(e.code());
        r.message = e.what();
        return r;
    };

    std::vector<std::optional<std::pair<double, double>>> regime_bounds(static_cast<std::size_t>(config.n_max) + 1);
    if (config.thresholds) {
        for (int n = 1; n <= config.n_max; ++n) {
            const auto label = case_label("threshold", n);
            timed(label, [&] {
                try {
                    const auto sweep = solver.threshold_sweep(n, config.threshold_lo, config.threshold_hi);
                    for (const auto* eq : {&sweep.just_entered, &sweep.deterrence}) {
                        auto r = make_record(config.id, "threshold", n, *eq);
                        r.m_enter = sweep.m_enter;
                        r.m_max_deter = sweep.m_max_deter;
                        r.monotone = sweep.monotone;
                        run.records.push_back(std::move(r));
                    }
                    regime_bounds[static_cast<std::size_t>(n)] = std::make_pair(sweep.m_enter, sweep.m_max_deter);
                    if (!sweep.monotone) run.failures.push_back(label + ": entry indicator not monotone in M");
                } catch (const Error& e) {
                    run.records.push_back(failed_record("threshold", n, 0.0, e));
                    run.failures.push_back(label + ": " + e.what());
                }
            });
        }
    }

    for (int n = 1; n <= config.n_max; ++n) {
        for (double m : config.market_size_list()) {
            const auto label = case_label("equilibrium", n, m);
            timed(label, [&] {
                try {
                    auto r = make_record(config.id, "equilibrium", n, solver.sequential_equilibrium(n, m));
                    const auto& bounds = regime_bounds[static_cast<std::size_t>(n)];
                    if (bounds && r.entrant_blocked && m > bounds->first && m < bounds->second) {
                        r.regime = regime_name(Regime::interior);
                    }
                    run.records.push_back(std::move(r));
                } catch (const Error& e) {
                    run.records.push_back(failed_record("equilibrium", n, m, e));
                    if (e.code() != ErrorCode::infeasible_n) run.failures.push_back(label + ": " + e.what());
                }
            });
        }
    }

    if (config.social_optimum) {
        for (int n = 1; n <= config.n_max; ++n) {
            timed(case_label("social_optimum", n), [&] {
                SocialOptimumOptions options;
                options.random_starts = config.optimum_starts;
                options.seed = config.seed;
                for (const auto& r : run.records) {
                    if (r.status == "ok" && static_cast<int>(r.configuration.size()) == n) {
                        options.warm_starts.push_back(Configuration::create(r.configuration));
                    }
                }
                if (options.random_starts == 0 && options.warm_starts.empty()) options.random_starts = 1;
                const auto opt = social_optimum(n, config.params, options);
                ResultRecord r;
                r.scenario = config.id;
                r.kind = "social_optimum";
                r.n = n;
                r.market_size = config.params.market_size;
                r.configuration = opt.configuration.locations();
                r.social_cost = opt.cost.cost;
                r.local_optimum_spread = opt.worst_local_cost - opt.best_cost;
                run.records.push_back(std::move(r));
            });
        }
    }

    for (const auto& r : run.records) {
        if (r.status == "ok" && !r.prices_converged) {
            run.failures.push_back(case_label(r.kind, r.n, r.market_size) + ": final prices did not converge");
        }
    }
    run.counters = solver.counters();
    run.exit_code = run.failures.empty() ? 0 : 3;
    return run;
}

ScenarioRun run_scenario_to(const ScenarioConfig& config, const std::string& out_dir) {
    auto run = run_scenario(config);
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());

    if (config.outputs.json) write_file(dir / "results.json", records_to_json(run.records));
    {
        std::ostringstream diag;
        diag << "{\n  \"schema\": " << kResultSchema << ",\n  \"cases\": [";
        for (std::size_t i = 0; i < run.cases.size(); ++i) {
            diag << (i ? ",\n" : "\n") << "    {\"case\": \"" << run.cases[i].label
                 << "\", \"wall_seconds\": " << run.cases[i].wall_seconds << "}";
        }
        const auto& c = run.counters;
        diag << "\n  ],\n  \"search\": {\"price_solves\": " << c.price_solves
             << ", \"verifications\": " << c.verifications << ", \"revenue_lookups\": " << c.revenue_lookups
             << ", \"cache_hits\": " << (c.revenue_lookups - c.price_solves)
             << ", \"skipped_candidates\": " << c.skipped_candidates
             << ", \"entrant_searches\": " << c.entrant_searches << ", \"subgames\": " << c.subgames
             << ", \"bound_violations\": " << c.bound_violations << "},\n  \"failures\": [";
        for (std::size_t i = 0; i < run.failures.size(); ++i) {
            diag << (i ? ", " : "") << "\"" << run.failures[i] << "\"";
        }
        diag << "]\n}\n";
        write_file(dir / "diagnostics.json", diag.str());
    }
    if (config.outputs.svg) {
        fs::create_directories(dir / "figures", ec);
        if (ec) throw Error(ErrorCode::io_error, "cannot create figures directory: " + ec.message());
        std::vector<std::string> used;
        for (const auto& r : run.records) {
            if (r.status != "ok") continue;
            const std::string regime = r.kind == "social_optimum" ? "social_optimum" : r.regime;
            const std::string stem = "fig_" + std::to_string(r.n) + "_" + regime;
            std::string name = stem;
            for (int k = 2; std::find(used.begin(), used.end(), name) != used.end(); ++k) {
                name = stem + "_" + std::to_string(k);
            }
            used.push_back(name);
            write_file(dir / "figures" / (name + ".svg"), emit_figure(r));
        }
    }
    if (config.outputs.csv) write_file(dir / "results.csv", records_to_csv(run.records));
    return run;
}

}  // namespace hotelling
