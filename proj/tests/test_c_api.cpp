#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "hotelling/hotelling.h"

namespace {

std::filesystem::path write_config(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("defaults and status names") {
    hot_params p;
    hot_params_default(&p);
    CHECK(p.market_size == 100.0);
    CHECK(p.fixed_cost == 25.0);
    CHECK(p.transport_cost == 1.0);
    hot_search s;
    hot_search_default(&s);
    CHECK(s.location_resolution == 33);
    CHECK(s.threads == 1);
    CHECK(std::strcmp(hot_status_name(HOT_INFEASIBLE_N), "InfeasibleN") == 0);
    CHECK(std::strlen(hot_version()) > 0);
}

TEST_CASE("prices and social cost through the C interface") {
    hot_params p;
    hot_params_default(&p);
    const hot_point pair[] = {{1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}};
    double prices[2] = {0.0, 0.0};
    int converged = 0;
    REQUIRE(hot_price_equilibrium(pair, 2, &p, prices, &converged) == HOT_OK);
    CHECK(converged == 1);
    CHECK(std::abs(prices[0] - prices[1]) <= 1e-6);

    double cost = 0.0;
    const hot_point center[] = {{0.5, 0.5}};
    REQUIRE(hot_social_cost(center, 1, &p, &cost) == HOT_OK);
    CHECK(cost == doctest::Approx(100.0 * (std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 6.0).epsilon(1e-9));

    hot_point best[1];
    REQUIRE(hot_social_optimum(1, &p, 2, 1, best, &cost) == HOT_OK);
    CHECK(std::abs(best[0].x1 - 0.5) <= 1.0 / 256.0);
}

TEST_CASE("errors carry codes and messages") {
    hot_params p;
    hot_params_default(&p);
    const hot_point twins[] = {{0.2, 0.2}, {0.2, 0.2}};
    double prices[2];
    CHECK(hot_price_equilibrium(twins, 2, &p, prices, nullptr) == HOT_DUPLICATE_SITES);
    CHECK(std::strlen(hot_last_error()) > 0);
    const hot_point outside[] = {{1.5, 0.2}};
    CHECK(hot_price_equilibrium(outside, 1, &p, prices, nullptr) == HOT_OUT_OF_DOMAIN);
    CHECK(hot_price_equilibrium(outside, 1, nullptr, prices, nullptr) == HOT_INVALID_ARGUMENT);
    p.fixed_cost = -1.0;
    hot_solver* solver = nullptr;
    CHECK(hot_solver_create(&p, nullptr, &solver) == HOT_INVALID_ARGUMENT);
    CHECK(solver == nullptr);
    hot_params_default(&p);
    hot_search s;
    hot_search_default(&s);
    s.location_resolution = 4;
    CHECK(hot_solver_create(&p, &s, &solver) == HOT_INVALID_ARGUMENT);
}

TEST_CASE("solver handle: entrant, equilibrium, deterrence and thresholds") {
    hot_params p;
    hot_params_default(&p);
    hot_search s;
    hot_search_default(&s);
    s.location_resolution = 9;
    hot_solver* solver = nullptr;
    REQUIRE(hot_solver_create(&p, &s, &solver) == HOT_OK);

    hot_point location;
    double profit = 0.0;
    const hot_point center[] = {{0.5, 0.5}};
    REQUIRE(hot_entrant_best_response(solver, center, 1, 100.0, &location, &profit) == HOT_OK);
    CHECK(profit < 0.0);

    hot_result* result = nullptr;
    REQUIRE(hot_sequential_equilibrium(solver, 1, 100.0, &result) == HOT_OK);
    CHECK(hot_result_size(result) == 1);
    CHECK(hot_result_market_size(result) == 100.0);
    CHECK(std::strcmp(hot_result_regime(result), "deterrence") == 0);
    CHECK(hot_result_entrant_blocked(result) == 1);
    CHECK(hot_result_best_entrant_profit(result) < 0.0);
    CHECK(hot_result_social_cost(result) > 0.0);
    CHECK(hot_result_prices_converged(result) == 1);
    double price = 0.0;
    double demand = 0.0;
    REQUIRE(hot_result_firm(result, 0, &location, &price, &demand, &profit) == HOT_OK);
    CHECK(location.x1 == 0.5);
    CHECK(location.x2 == 0.5);
    CHECK(profit == doctest::Approx(price * demand - 25.0));
    CHECK(hot_result_firm(result, 1, &location, nullptr, nullptr, nullptr) == HOT_INVALID_ARGUMENT);
    hot_result_destroy(result);

    result = nullptr;
    CHECK(hot_deterrence_solve(solver, 1, 1000.0, &result) == HOT_DETERRENCE_IMPOSSIBLE);
    CHECK(result == nullptr);
    CHECK(hot_sequential_equilibrium(solver, 2, 5.0, &result) == HOT_INFEASIBLE_N);

    double m_enter = 0.0;
    double m_max_deter = 0.0;
    hot_result* deter = nullptr;
    REQUIRE(hot_threshold_sweep(solver, 1, 1.0, 1e4, &m_enter, &m_max_deter, nullptr, &deter) == HOT_OK);
    CHECK(m_enter < m_max_deter);
    CHECK(hot_result_size(deter) == 1);
    CHECK(hot_threshold_sweep(solver, 1, 200.0, 300.0, nullptr, nullptr, nullptr, nullptr) ==
          HOT_BRACKETING_FAILURE);
    hot_result_destroy(deter);
    hot_solver_destroy(solver);
}

TEST_CASE("scenarios run through the C interface") {
    const auto config = write_config("hotelling_c_api.toml", R"(id = "c_api"
[solve]
n_max = 1
market_sizes = [100]
[grids]
location_resolution = 9
)");
    const auto out = std::filesystem::temp_directory_path() / "hotelling_c_api_out";
    std::filesystem::remove_all(out);

    hot_overrides o;
    hot_overrides_default(&o);
    const double sizes[] = {50.0, 150.0};
    o.market_sizes = sizes;
    o.market_size_count = 2;
    o.figures = 1;
    hot_run* run = nullptr;
    REQUIRE(hot_run_scenario(config.c_str(), out.c_str(), &o, &run) == HOT_OK);
    CHECK(hot_run_exit_code(run) == 0);
    CHECK(hot_run_record_count(run) == 2);
    CHECK(hot_run_failure_count(run) == 0);
    CHECK(std::strcmp(hot_run_failure(run, 0), "") == 0);
    CHECK(std::filesystem::exists(out / "results.json"));
    CHECK(std::filesystem::exists(out / "figures"));
    hot_run_destroy(run);

    o.n_max = 9;
    run = nullptr;
    CHECK(hot_run_scenario(config.c_str(), out.c_str(), &o, &run) == HOT_CONFIG_ERROR);
    CHECK(std::string(hot_last_error()).find("n_max") != std::string::npos);
    CHECK(run == nullptr);
    CHECK(hot_run_scenario("/nonexistent.toml", out.c_str(), nullptr, &run) == HOT_CONFIG_ERROR);

    std::filesystem::remove_all(out);
    std::filesystem::remove(config);
}
