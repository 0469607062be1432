#include "hotelling/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hotelling/error.hpp"
#include "hotelling/geometry.hpp"

namespace hotelling {
namespace {

double raw_cost(std::span<const Point> sites) {
    const auto cells = voronoi_cells(sites);
    double total = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) total += distance_integral(cells[i], sites[i]);
    return total;
}

bool has_near_duplicate(std::span<const Point> sites, std::size_t moved) {
    for (std::size_t j = 0; j < sites.size(); ++j) {
        if (j != moved && distance(sites[j], sites[moved]) <= kDuplicateTolerance) return true;
    }
    return false;
}

struct LocalOptimum {
    std::vector<Point> sites;
    double cost = 0.0;
    int evaluations = 0;
};

LocalOptimum pattern_search(std::vector<Point> sites, const SocialOptimumOptions& options) {
    LocalOptimum out;
    double best = raw_cost(sites);
    out.evaluations = 1;
    for (double h = options.initial_step; h >= options.final_step * (1.0 - 1e-12); h *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t i = 0; i < sites.size(); ++i) {
                for (int axis = 0; axis < 2; ++axis) {
                    for (double dir : {-1.0, 1.0}) {
                        const Point saved = sites[i];
                        double& coord = axis == 0 ? sites[i].x1 : sites[i].x2;
                        const double moved = std::clamp(coord + dir * h, 0.0, 1.0);
                        if (moved == coord) continue;
                        coord = moved;
                        if (has_near_duplicate(sites, i)) {
                            sites[i] = saved;
                            continue;
                        }
                        const double c = raw_cost(sites);
                        ++out.evaluations;
                        if (c < best - 1e-15) {
                            best = c;
                            improved = true;
                        } else {
                            sites[i] = saved;
                        }
                    }
                }
            }
        }
    }
    out.sites = std::move(sites);
    out.cost = best;
    return out;
}

}  // namespace

SocialCostResult social_cost(const Configuration& config, const MarketParams& params) {
    if (config.empty()) throw Error(ErrorCode::invalid_argument, "social_cost: empty configuration");
    const auto cells = voronoi_cells(config.locations());
    SocialCostResult result;
    const double scale = params.market_size * params.transport_cost;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        result.per_firm.push_back(scale * distance_integral(cells[i], config[i]));
        result.cost += result.per_firm.back();
    }
    return result;
}

void SocialOptimumOptions::validate() const {
    if (random_starts < 0) throw Error(ErrorCode::invalid_argument, "random_starts must be >= 0");
    if (!(final_step > 0.0) || !(initial_step >= final_step)) {
        throw Error(ErrorCode::invalid_argument, "pattern steps must satisfy 0 < final <= initial");
    }
}

SocialOptimumResult social_optimum(int n, const MarketParams& params,
                                   const SocialOptimumOptions& options) {
    if (n < 1 || n > 7) throw Error(ErrorCode::infeasible_n, "social_optimum: n must be in 1..7");
    params.validate();
    options.validate();
    std::vector<std::vector<Point>> starts;
    for (const auto& warm : options.warm_starts) {
        if (static_cast<int>(warm.size()) != n) {
            throw Error(ErrorCode::dimension_mismatch, "social_optimum: warm start has the wrong firm count");
        }
        starts.push_back(warm.locations());
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < options.random_starts; ++s) {
        std::vector<Point> sites;
        while (static_cast<int>(sites.size()) < n) {
            const Point p{u(rng), u(rng)};
            sites.push_back(p);
            if (has_near_duplicate(sites, sites.size() - 1)) sites.pop_back();
        }
        starts.push_back(std::move(sites));
    }
    if (starts.empty()) throw Error(ErrorCode::invalid_argument, "social_optimum: no starts");

    SocialOptimumResult result;
    std::vector<Point> best_sites;
    double best = 0.0;
    double worst = 0.0;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        const auto local = pattern_search(starts[s], options);
        result.evaluations += local.evaluations;
        if (s == 0 || local.cost < best) {
            best = local.cost;
            best_sites = local.sites;
        }
        worst = s == 0 ? local.cost : std::max(worst, local.cost);
    }
    const double scale = params.market_size * params.transport_cost;
    result.starts = static_cast<int>(starts.size());
    result.configuration = Configuration::create(best_sites);
    result.cost = social_cost(result.configuration, params);
    result.cost.optimal_flag = true;
    result.best_cost = scale * best;
    result.worst_local_cost = scale * worst;
    return result;
}

}  // namespace hotelling
