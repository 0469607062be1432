#include "hotelling/hotelling.h"

#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "hotelling/entry.hpp"
#include "hotelling/error.hpp"
#include "hotelling/pricing.hpp"
#include "hotelling/scenario.hpp"
#include "hotelling/welfare.hpp"

struct hot_solver {
    std::unique_ptr<hotelling::GameSolver> solver;
};

struct hot_result {
    hotelling::EquilibriumResult result;
};

struct hot_run {
    hotelling::ScenarioRun run;
    double wall_seconds = 0.0;
};

namespace {

using namespace hotelling;

thread_local std::string last_error;

hot_status fail(hot_status status, const std::string& what) {
    last_error = what;
    return status;
}

// Runs body and maps exceptions to status codes.
template <class F>
hot_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return HOT_OK;
    } catch (const Error& e) {
        return fail(static_cast<hot_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(HOT_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(HOT_INTERNAL, e.what());
    } catch (...) {
        return fail(HOT_INTERNAL, "unknown error");
    }
}

void require(bool condition, const char* what) {
    if (!condition) throw Error(ErrorCode::invalid_argument, what);
}

MarketParams to_params(const hot_params* p) {
    require(p != nullptr, "params is null");
    MarketParams out;
    out.market_size = p->market_size;
    out.fixed_cost = p->fixed_cost;
    out.transport_cost = p->transport_cost;
    out.reservation = p->reservation;
    out.marginal_cost = p->marginal_cost;
    out.validate();
    return out;
}

Configuration to_config(const hot_point* sites, std::size_t n) {
    require(n == 0 || sites != nullptr, "sites is null");
    std::vector<Point> points;
    for (std::size_t i = 0; i < n; ++i) points.push_back({sites[i].x1, sites[i].x2});
    return n == 0 ? Configuration{} : Configuration::create(std::move(points));
}

}  // namespace

extern "C" {

const char* hot_version(void) { return "1.0.0"; }

const char* hot_status_name(hot_status status) {
    return error_code_name(static_cast<ErrorCode>(status));
}

const char* hot_last_error(void) { return last_error.c_str(); }

void hot_params_default(hot_params* params) {
    if (params == nullptr) return;
    const MarketParams d;
    *params = {d.market_size, d.fixed_cost, d.transport_cost, d.reservation, d.marginal_cost};
}

void hot_search_default(hot_search* search) {
    if (search == nullptr) return;
    const LocationGrid grid;
    const SearchSettings s;
    *search = {grid.resolution, s.leader_resolution, s.last_resolution, s.entrant_resolution,
               s.climb_starts, s.threads, 0, s.pricing.grid.resolution, s.pricing.seed};
}

void hot_overrides_default(hot_overrides* overrides) {
    if (overrides == nullptr) return;
    *overrides = {0, nullptr, 0, -1, -1, 0, 0, 0};
}

hot_status hot_price_equilibrium(const hot_point* sites, size_t n, const hot_params* params,
                                 double* prices_out, int* converged_out) {
    return guarded([&] {
        require(prices_out != nullptr, "prices_out is null");
        const auto report = price_equilibrium(to_config(sites, n), to_params(params));
        for (std::size_t i = 0; i < n; ++i) prices_out[i] = report.prices[i];
        if (converged_out != nullptr) *converged_out = report.converged ? 1 : 0;
    });
}

hot_status hot_social_cost(const hot_point* sites, size_t n, const hot_params* params, double* cost_out) {
    return guarded([&] {
        require(cost_out != nullptr, "cost_out is null");
        *cost_out = social_cost(to_config(sites, n), to_params(params)).cost;
    });
}

hot_status hot_social_optimum(int n, const hot_params* params, int starts, uint64_t seed,
                              hot_point* sites_out, double* cost_out) {
    return guarded([&] {
        require(sites_out != nullptr, "sites_out is null");
        SocialOptimumOptions options;
        options.random_starts = starts;
        options.seed = seed;
        const auto opt = social_optimum(n, to_params(params), options);
        for (std::size_t i = 0; i < opt.configuration.size(); ++i) {
            sites_out[i] = {opt.configuration[i].x1, opt.configuration[i].x2};
        }
        if (cost_out != nullptr) *cost_out = opt.cost.cost;
    });
}

hot_status hot_solver_create(const hot_params* params, const hot_search* search, hot_solver** out) {
    return guarded([&] {
        require(out != nullptr, "out is null");
        *out = nullptr;
        hot_search s;
        hot_search_default(&s);
        if (search != nullptr) s = *search;
        LocationGrid grid;
        grid.resolution = s.location_resolution;
        SearchSettings settings;
        settings.leader_resolution = s.leader_resolution;
        settings.last_resolution = s.last_resolution;
        settings.entrant_resolution = s.entrant_resolution;
        settings.climb_starts = s.climb_starts;
        settings.threads = s.threads;
        settings.pricing.route = s.grid_route ? DemandRoute::grid : DemandRoute::rays;
        settings.pricing.grid.resolution = s.consumer_resolution;
        settings.pricing.seed = s.seed;
        auto handle = std::make_unique<hot_solver>();
        handle->solver = std::make_unique<GameSolver>(to_params(params), grid, settings);
        *out = handle.release();
    });
}

void hot_solver_destroy(hot_solver* solver) { delete solver; }

hot_status hot_entrant_best_response(hot_solver* solver, const hot_point* incumbents, size_t n,
                                     double market_size, hot_point* location_out, double* profit_out) {
    return guarded([&] {
        require(solver != nullptr, "solver is null");
        const auto r = solver->solver->entrant_best_response(to_config(incumbents, n), market_size);
        if (!r.found) throw Error(ErrorCode::not_converged, "no entrant location has converged prices");
        if (location_out != nullptr) *location_out = {r.location.x1, r.location.x2};
        if (profit_out != nullptr) *profit_out = r.profit;
    });
}

hot_status hot_sequential_equilibrium(hot_solver* solver, int n, double market_size, hot_result** out) {
    return guarded([&] {
        require(solver != nullptr && out != nullptr, "solver or out is null");
        *out = nullptr;
        *out = new hot_result{solver->solver->sequential_equilibrium(n, market_size)};
    });
}

hot_status hot_deterrence_solve(hot_solver* solver, int n, double market_size, hot_result** out) {
    return guarded([&] {
        require(solver != nullptr && out != nullptr, "solver or out is null");
        *out = nullptr;
        *out = new hot_result{solver->solver->deterrence_solve(n, market_size)};
    });
}

hot_status hot_threshold_sweep(hot_solver* solver, int n, double lo, double hi, double* m_enter_out,
                               double* m_max_deter_out, hot_result** just_entered_out,
                               hot_result** deterrence_out) {
    return guarded([&] {
        require(solver != nullptr, "solver is null");
        auto sweep = solver->solver->threshold_sweep(n, lo, hi);
        if (m_enter_out != nullptr) *m_enter_out = sweep.m_enter;
        if (m_max_deter_out != nullptr) *m_max_deter_out = sweep.m_max_deter;
        auto just = std::make_unique<hot_result>(hot_result{std::move(sweep.just_entered)});
        auto deter = std::make_unique<hot_result>(hot_result{std::move(sweep.deterrence)});
        if (just_entered_out != nullptr) *just_entered_out = just.release();
        if (deterrence_out != nullptr) *deterrence_out = deter.release();
    });
}

void hot_result_destroy(hot_result* result) { delete result; }

size_t hot_result_size(const hot_result* result) {
    return result == nullptr ? 0 : result->result.configuration.size();
}

double hot_result_market_size(const hot_result* result) {
    return result == nullptr ? 0.0 : result->result.market_size;
}

hot_status hot_result_firm(const hot_result* result, size_t i, hot_point* location_out, double* price_out,
                           double* demand_out, double* profit_out) {
    return guarded([&] {
        require(result != nullptr, "result is null");
        const auto& r = result->result;
        if (i >= r.configuration.size()) throw Error(ErrorCode::invalid_argument, "firm index out of range");
        if (location_out != nullptr) *location_out = {r.configuration[i].x1, r.configuration[i].x2};
        if (price_out != nullptr) *price_out = r.prices[i];
        if (demand_out != nullptr) *demand_out = r.demand[i];
        if (profit_out != nullptr) *profit_out = r.profits[i];
    });
}

const char* hot_result_regime(const hot_result* result) {
    return result == nullptr ? "" : regime_name(result->result.regime);
}

int hot_result_entrant_blocked(const hot_result* result) {
    return result != nullptr && result->result.entrant_blocked ? 1 : 0;
}

double hot_result_best_entrant_profit(const hot_result* result) {
    return result == nullptr ? 0.0 : result->result.best_entrant_profit;
}

double hot_result_social_cost(const hot_result* result) {
    return result == nullptr ? 0.0 : result->result.social_cost;
}

int hot_result_prices_converged(const hot_result* result) {
    return result != nullptr && result->result.prices_converged ? 1 : 0;
}

hot_status hot_run_scenario(const char* config_path, const char* out_dir, const hot_overrides* overrides,
                            hot_run** out) {
    return guarded([&] {
        require(config_path != nullptr && out_dir != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        auto config = load_scenario(config_path);
        if (overrides != nullptr) {
            ScenarioOverrides o;
            if (overrides->n_max != 0) o.n_max = overrides->n_max;
            require(overrides->market_size_count == 0 || overrides->market_sizes != nullptr,
                    "market_sizes is null");
            o.market_sizes.assign(overrides->market_sizes,
                                  overrides->market_sizes + overrides->market_size_count);
            if (overrides->thresholds >= 0) o.thresholds = overrides->thresholds != 0;
            if (overrides->figures >= 0) o.figures = overrides->figures != 0;
            if (overrides->has_seed) o.seed = overrides->seed;
            if (overrides->threads != 0) o.threads = overrides->threads;
            apply_overrides(config, o);
        }
        config.validate();
        auto handle = std::make_unique<hot_run>();
        handle->run = run_scenario_to(config, out_dir);
        for (const auto& c : handle->run.cases) handle->wall_seconds += c.wall_seconds;
        *out = handle.release();
    });
}

void hot_run_destroy(hot_run* run) { delete run; }

int hot_run_exit_code(const hot_run* run) { return run == nullptr ? 0 : run->run.exit_code; }

size_t hot_run_record_count(const hot_run* run) { return run == nullptr ? 0 : run->run.records.size(); }

size_t hot_run_failure_count(const hot_run* run) { return run == nullptr ? 0 : run->run.failures.size(); }

const char* hot_run_failure(const hot_run* run, size_t i) {
    if (run == nullptr || i >= run->run.failures.size()) return "";
    return run->run.failures[i].c_str();
}

double hot_run_wall_seconds(const hot_run* run) { return run == nullptr ? 0.0 : run->wall_seconds; }

}  // extern "C"
