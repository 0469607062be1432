#pragma once

#include <cstdint>
#include <vector>

#include "hotelling/market.hpp"

namespace hotelling {

// Total transport cost of serving every consumer from its nearest firm:
// M * t * sum_i integral over cell i of ||x_i - x|| dA.
struct SocialCostResult {
    double cost = 0.0;
    std::vector<double> per_firm;
    bool optimal_flag = false;  // produced by social_optimum
};

SocialCostResult social_cost(const Configuration& config, const MarketParams& params);

struct SocialOptimumOptions {
    int random_starts = 32;
    std::uint64_t seed = 1;
    double initial_step = 1.0 / 8.0;
    double final_step = 1.0 / 512.0;
    std::vector<Configuration> warm_starts;  // must have n firms each

    void validate() const;
};

struct SocialOptimumResult {
    Configuration configuration;
    SocialCostResult cost;
    double best_cost = 0.0;
    double worst_local_cost = 0.0;  // spread of local optima = worst - best
    int starts = 0;
    int evaluations = 0;
};

// Multistart coordinate pattern search over all 2n coordinates.
SocialOptimumResult social_optimum(int n, const MarketParams& params,
                                   const SocialOptimumOptions& options = {});

}  // namespace hotelling
