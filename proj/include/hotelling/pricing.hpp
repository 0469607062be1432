#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hotelling/market.hpp"

namespace hotelling {

struct PriceSolverOptions {
    DemandRoute route = DemandRoute::rays;
    ConsumerGrid grid{};  // used when route == grid
    RaySettings rays{};
    double damping = 0.5;
    double tolerance = 1e-6;  // on the largest per-firm update
    int max_iterations = 500;
    int scan_samples = 64;
    double refine_tolerance = 1e-7;
    std::uint64_t seed = 1;  // for the random start

    void validate() const;
};

struct PriceSolveReport {
    PriceVector prices;
    int iterations = 0;
    double max_update = 0.0;
    bool converged = false;
    double multistart_spread = 0.0;  // max pairwise max-norm distance across starts
    double residual = 0.0;           // max_i |BR_i(p) - p_i| at the reported prices
    int starts_converged = 0;
};

// Demand of firm i at the given prices through the selected route.
double firm_demand(const Configuration& config, std::span<const double> prices,
                   const MarketParams& params, std::size_t firm,
                   const PriceSolverOptions& options = {});

// Highest price at which firm i can still sell: min(a, p_j + t * d_ij over
// rivals j). Above it a rival undercuts the firm everywhere.
double price_ceiling(const Configuration& config, std::span<const double> prices,
                     const MarketParams& params, std::size_t firm);

// Profit-maximizing price of firm i with rivals' prices fixed: a coarse scan
// of [c, ceiling] then golden-section refinement of the best bracket. Returns
// c when the firm sells nothing at any price.
double best_response_price(std::size_t firm, const Configuration& config,
                           std::span<const double> prices, const MarketParams& params,
                           const PriceSolverOptions& options = {});

// Damped simultaneous best response from three starts (all c, all a/2, seeded
// random). The reported prices come from the first converged start.
PriceSolveReport price_equilibrium(const Configuration& config, const MarketParams& params,
                                   const PriceSolverOptions& options = {});

// Quick solve used inside location search: damped markup iteration on the
// first-order conditions p_i = c + D_i / (-dD_i/dp_i) using ray demand, then a
// global scan of every firm's own profit to confirm the point is an
// equilibrium. When either step fails it falls back to price_equilibrium, or,
// with `fallback` off, returns the last iterate flagged as not converged
// (close rivals that can undercut each other typically have no pure
// equilibrium, and the full solver would only confirm that slowly).
PriceSolveReport fast_price_equilibrium(const Configuration& config, const MarketParams& params,
                                        const PriceSolverOptions& options = {},
                                        bool fallback = true);

// The two halves of fast_price_equilibrium: the markup iteration alone
// (converged means a first-order fixed point was reached) and the global
// check that no firm gains by any scanned price change.
PriceSolveReport markup_price_equilibrium(const Configuration& config, const MarketParams& params,
                                          const PriceSolverOptions& options = {});
bool is_price_equilibrium(const Configuration& config, std::span<const double> prices,
                          const MarketParams& params, const PriceSolverOptions& options = {});

}  // namespace hotelling
