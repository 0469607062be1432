#include "hotelling/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hotelling/error.hpp"

namespace hotelling {
namespace {

constexpr double kInvGolden = 0.6180339887498949;
// Damped iterations halve their step when they start to oscillate, down to this.
constexpr double kMinDamping = 1.0 / 64.0;

struct DampedRun {
    PriceVector prices;
    int iterations = 0;
    double max_update = 0.0;
    bool converged = false;
};

DampedRun damped_best_response(const Configuration& config, const MarketParams& params,
                               const PriceSolverOptions& options, PriceVector start) {
    DampedRun run;
    run.prices = std::move(start);
    const std::size_t n = config.size();
    if (n == 1) {
        // Nothing to iterate on: a monopolist's best response ignores its own
        // current price.
        run.prices[0] = best_response_price(0, config, run.prices, params, options);
        run.iterations = 1;
        run.converged = true;
        return run;
    }
    PriceVector br(n);
    PriceVector last_step(n, 0.0);
    double damping = options.damping;
    double last_residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < options.max_iterations; ++it) {
        double residual = 0.0;
        bool reversed = false;
        for (std::size_t i = 0; i < n; ++i) {
            br[i] = best_response_price(i, config, run.prices, params, options);
            const double step = br[i] - run.prices[i];
            residual = std::max(residual, std::abs(step));
            reversed = reversed || step * last_step[i] < 0.0;
            last_step[i] = step;
        }
        // Updates are measured at the nominal damping so the tolerance keeps
        // its meaning (residual <= tolerance / damping) after any backoff.
        run.iterations = it + 1;
        run.max_update = options.damping * residual;
        if (run.max_update <= options.tolerance) {
            run.converged = true;
            break;
        }
        if (reversed && residual > 0.9 * last_residual) {
            damping = std::max(damping * 0.5, kMinDamping);
        }
        last_residual = residual;
        for (std::size_t i = 0; i < n; ++i) {
            run.prices[i] += damping * (br[i] - run.prices[i]);
        }
    }
    return run;
}

double max_norm_distance(const PriceVector& a, const PriceVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double fixed_point_residual(const Configuration& config, const MarketParams& params,
                            const PriceSolverOptions& options, const PriceVector& prices) {
    double r = 0.0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        r = std::max(r, std::abs(best_response_price(i, config, prices, params, options) - prices[i]));
    }
    return r;
}

// True when no scanned price beats firm i's current profit.
bool is_global_best_response(const Configuration& config, const PriceVector& prices,
                             const MarketParams& params, const PriceSolverOptions& options,
                             std::size_t firm) {
    const double c = params.marginal_cost;
    const double current = (prices[firm] - c) * firm_demand(config, prices, params, firm, options);
    const double slack = 1e-9 * std::max(1.0, std::abs(current));
    const double hi = price_ceiling(config, prices, params, firm);
    PriceVector trial = prices;
    const int samples = options.scan_samples;
    for (int k = 0; k < samples; ++k) {
        trial[firm] = c + (hi - c) * k / (samples - 1);
        const double v = (trial[firm] - c) * firm_demand(config, trial, params, firm, options);
        if (v > current + slack) return false;
    }
    for (double h : {-1e-4, 1e-4}) {
        trial[firm] = prices[firm] + h;
        if (trial[firm] < c) continue;
        const double v = (trial[firm] - c) * firm_demand(config, trial, params, firm, options);
        if (v > current + slack) return false;
    }
    return true;
}

}  // namespace

void PriceSolverOptions::validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "damping must be in (0, 1]");
    }
    if (!(tolerance > 0.0) || !(refine_tolerance > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "price tolerances must be positive");
    }
    if (max_iterations < 1) {
        throw Error(ErrorCode::invalid_argument, "max_iterations must be at least 1");
    }
    if (scan_samples < 3) {
        throw Error(ErrorCode::invalid_argument, "scan_samples must be at least 3");
    }
    if (route == DemandRoute::grid) grid.validate();
    rays.validate();
}

double firm_demand(const Configuration& config, std::span<const double> prices,
                   const MarketParams& params, std::size_t firm,
                   const PriceSolverOptions& options) {
    if (options.route == DemandRoute::grid) {
        const PriceVector p(prices.begin(), prices.end());
        return demand_grid(config, p, params, options.grid).demand[firm];
    }
    return firm_demand_rays(config, prices, params, firm, options.rays);
}

double price_ceiling(const Configuration& config, std::span<const double> prices,
                     const MarketParams& params, std::size_t firm) {
    double hi = params.reservation;
    for (std::size_t j = 0; j < config.size(); ++j) {
        if (j == firm) continue;
        hi = std::min(hi, prices[j] + params.transport_cost * distance(config[firm], config[j]));
    }
    return std::max(hi, params.marginal_cost);
}

double best_response_price(std::size_t firm, const Configuration& config,
                           std::span<const double> prices, const MarketParams& params,
                           const PriceSolverOptions& options) {
    if (firm >= config.size() || prices.size() != config.size()) {
        throw Error(ErrorCode::dimension_mismatch, "best_response_price: bad firm index or price count");
    }
    const double c = params.marginal_cost;
    const double hi = price_ceiling(config, prices, params, firm);
    if (hi <= c) return c;
    PriceVector trial(prices.begin(), prices.end());
    double max_demand = 0.0;
    const auto value = [&](double p) {
        trial[firm] = p;
        const double d = firm_demand(config, trial, params, firm, options);
        max_demand = std::max(max_demand, d);
        return (p - c) * d;
    };

    const int samples = options.scan_samples;
    const double step = (hi - c) / (samples - 1);
    int best_k = 0;
    double best_v = -1.0;
    for (int k = 0; k < samples; ++k) {
        const double v = value(c + step * k);
        if (v > best_v) {
            best_v = v;
            best_k = k;
        }
    }
    if (max_demand <= 0.0) return c;

    double lo = c + step * std::max(best_k - 1, 0);
    double up = c + step * std::min(best_k + 1, samples - 1);
    double x1 = up - kInvGolden * (up - lo);
    double x2 = lo + kInvGolden * (up - lo);
    double f1 = value(x1);
    double f2 = value(x2);
    while (up - lo > options.refine_tolerance) {
        if (f1 >= f2) {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - kInvGolden * (up - lo);
            f1 = value(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvGolden * (up - lo);
            f2 = value(x2);
        }
    }
    const double refined = 0.5 * (lo + up);
    return value(refined) >= best_v ? refined : c + step * best_k;
}

PriceSolveReport price_equilibrium(const Configuration& config, const MarketParams& params,
                                   const PriceSolverOptions& options) {
    if (config.empty()) throw Error(ErrorCode::invalid_argument, "price_equilibrium: empty configuration");
    params.validate();
    options.validate();
    const std::size_t n = config.size();
    const double c = params.marginal_cost;
    const double a = params.reservation;

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> uniform(c, a);
    PriceVector random_start(n);
    for (auto& p : random_start) p = uniform(rng);

    const std::vector<PriceVector> starts{PriceVector(n, c), PriceVector(n, 0.5 * a), random_start};
    std::vector<DampedRun> runs;
    for (const auto& s : starts) runs.push_back(damped_best_response(config, params, options, s));

    PriceSolveReport report;
    const DampedRun* chosen = nullptr;
    for (const auto& r : runs) {
        if (r.converged) {
            ++report.starts_converged;
            if (chosen == nullptr) chosen = &r;
        }
    }
    const bool any_converged = chosen != nullptr;
    if (!any_converged) chosen = &runs.front();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (any_converged && !(runs[i].converged && runs[j].converged)) continue;
            report.multistart_spread =
                std::max(report.multistart_spread, max_norm_distance(runs[i].prices, runs[j].prices));
        }
    }
    report.prices = chosen->prices;
    report.iterations = chosen->iterations;
    report.max_update = chosen->max_update;
    report.converged = chosen->converged;
    report.residual = fixed_point_residual(config, params, options, report.prices);
    return report;
}

PriceSolveReport markup_price_equilibrium(const Configuration& config, const MarketParams& params,
                                          const PriceSolverOptions& options) {
    if (config.empty()) throw Error(ErrorCode::invalid_argument, "markup_price_equilibrium: empty configuration");
    const std::size_t n = config.size();
    const double c = params.marginal_cost;
    PriceSolveReport report;
    if (n == 1) {
        report.prices = {best_response_price(0, config, PriceVector{c}, params, options)};
        report.iterations = 1;
        report.converged = true;
        report.starts_converged = 1;
        return report;
    }

    // Start from the equal-price boundary markup of a Hotelling line: half the
    // distance to the nearest rival.
    PriceVector p(n);
    for (std::size_t i = 0; i < n; ++i) {
        double nearest = 2.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) nearest = std::min(nearest, distance(config[i], config[j]));
        }
        p[i] = c + 0.5 * params.transport_cost * nearest;
    }
    PriceVector target(n);
    PriceVector last_step(n, 0.0);
    constexpr int kMaxMarkupIterations = 400;
    constexpr double kMarkupTolerance = 1e-10;
    double damping = 0.5;
    double last_residual = std::numeric_limits<double>::infinity();
    double max_update = 0.0;
    int it = 0;
    for (; it < kMaxMarkupIterations; ++it) {
        double residual = 0.0;
        bool reversed = false;
        for (std::size_t i = 0; i < n; ++i) {
            double slope = 0.0;
            const double d = firm_demand_rays(config, p, params, i, options.rays, &slope);
            target[i] = (d > 0.0 && slope < 0.0) ? c + d / -slope : c;
            target[i] = std::min(target[i], params.reservation);
            const double step = target[i] - p[i];
            residual = std::max(residual, std::abs(step));
            reversed = reversed || step * last_step[i] < 0.0;
            last_step[i] = step;
        }
        max_update = 0.5 * residual;
        if (max_update <= kMarkupTolerance) break;
        if (reversed && residual > 0.9 * last_residual) {
            damping = std::max(damping * 0.5, kMinDamping);
        }
        last_residual = residual;
        for (std::size_t i = 0; i < n; ++i) p[i] += damping * (target[i] - p[i]);
    }
    report.prices = std::move(p);
    report.iterations = std::min(it + 1, kMaxMarkupIterations);
    report.max_update = max_update;
    report.converged = max_update <= kMarkupTolerance;
    report.starts_converged = report.converged ? 1 : 0;
    return report;
}

bool is_price_equilibrium(const Configuration& config, std::span<const double> prices,
                          const MarketParams& params, const PriceSolverOptions& options) {
    if (prices.size() != config.size()) {
        throw Error(ErrorCode::dimension_mismatch, "is_price_equilibrium: price count mismatch");
    }
    PriceSolverOptions ray_options = options;
    ray_options.route = DemandRoute::rays;
    const PriceVector p(prices.begin(), prices.end());
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (!is_global_best_response(config, p, params, ray_options, i)) return false;
    }
    return true;
}

PriceSolveReport fast_price_equilibrium(const Configuration& config, const MarketParams& params,
                                        const PriceSolverOptions& options, bool fallback) {
    if (config.empty()) throw Error(ErrorCode::invalid_argument, "fast_price_equilibrium: empty configuration");
    auto report = markup_price_equilibrium(config, params, options);
    if (config.size() == 1) return report;
    const bool ok = report.converged && is_price_equilibrium(config, report.prices, params, options);
    if (!ok && fallback) {
        PriceSolverOptions ray_options = options;
        ray_options.route = DemandRoute::rays;
        return price_equilibrium(config, params, ray_options);
    }
    report.converged = ok;
    report.starts_converged = ok ? 1 : 0;
    return report;
}

}  // namespace hotelling
