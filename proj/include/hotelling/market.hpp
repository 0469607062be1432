#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hotelling/geometry.hpp"

namespace hotelling {

// Scalar model parameters. Utility of buying from firm i at consumer x is
// a - t * ||x_i - x|| - p_i; firm profit is (p_i - c) * demand_i - F.
struct MarketParams {
    double market_size = 100.0;     // M, consumers per unit area
    double fixed_cost = 25.0;       // F
    double transport_cost = 1.0;    // t
    double reservation = 10.0;      // a
    double marginal_cost = 0.0;     // c

    void validate() const;  // throws Error(invalid_argument)
};

inline constexpr std::size_t kMaxFirms = 16;

// Entry-ordered firm locations (index 0 entered first). The default-constructed
// configuration is the empty sentinel; every solver entry point requires
// create()'d, non-empty configurations.
class Configuration {
public:
    Configuration() = default;

    // Validates 1 <= n <= 16, locations inside the square and pairwise distinct.
    static Configuration create(std::vector<Point> locations);

    std::size_t size() const noexcept { return locations_.size(); }
    bool empty() const noexcept { return locations_.empty(); }
    const std::vector<Point>& locations() const noexcept { return locations_; }
    Point operator[](std::size_t i) const { return locations_[i]; }

    // Configuration with `p` appended as the next entrant (validated).
    Configuration with_entrant(Point p) const;

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    explicit Configuration(std::vector<Point> locations) : locations_(std::move(locations)) {}
    std::vector<Point> locations_;
};

using PriceVector = std::vector<double>;

// Lattice of consumer cells with centers ((j + 0.5) / res, (k + 0.5) / res).
struct ConsumerGrid {
    int resolution = 128;

    void validate() const;  // resolution >= 16
    double cell_weight(const MarketParams& params) const noexcept {
        return params.market_size / (static_cast<double>(resolution) * resolution);
    }
    Point center(int j, int k) const noexcept {
        return {(j + 0.5) / resolution, (k + 0.5) / resolution};
    }
};

struct MarketOutcome {
    std::vector<double> demand;  // consumer mass per firm
    std::vector<double> profit;
    double coverage = 0.0;       // fraction of the consumer mass served
};

inline constexpr double kUtilityTieTolerance = 1e-9;

double utility(Point consumer, Point firm, double price, const MarketParams& params) noexcept;

// Each cell's mass goes to the firm of highest utility when that utility is
// non-negative; ties within 1e-9 split the cell equally. Profit is left empty.
MarketOutcome demand_grid(const Configuration& config, const PriceVector& prices,
                          const MarketParams& params, const ConsumerGrid& grid);

// Equal-price demand: Voronoi cell area times M.
std::vector<double> demand_exact_equal_prices(const Configuration& config,
                                              const MarketParams& params);

std::vector<double> profit(const Configuration& config, const PriceVector& prices,
                           std::span<const double> demand, const MarketParams& params);

// --- Ray-integrated demand -------------------------------------------------
//
// A firm's market area under arbitrary prices (bounded by hyperbolic arcs,
// the square and the reservation circle) is star-shaped about the firm's own
// site, so its area is the angular integral of half the squared reach along
// rays from the site. Switch angles between binding boundaries are bracketed
// by `probe_rays` equally spaced probes and solved in closed form; each piece
// then integrates exactly. Demand is continuous and piecewise smooth in the
// prices, which the price solvers rely on.
struct RaySettings {
    int probe_rays = 64;  // multiple of 8 keeps the probes square-symmetric

    void validate() const;
};

struct RayDemand {
    std::vector<double> demand;     // consumer mass per firm
    std::vector<double> own_slope;  // d demand_i / d p_i (<= 0)
    double coverage = 0.0;
};

// Demand of firm i alone; `own_slope` (optional) receives d demand_i / d p_i.
double firm_demand_rays(const Configuration& config, std::span<const double> prices,
                        const MarketParams& params, std::size_t firm,
                        const RaySettings& rays = {}, double* own_slope = nullptr);

RayDemand demand_rays(const Configuration& config, std::span<const double> prices,
                      const MarketParams& params, const RaySettings& rays = {});

// Which demand evaluation the price solvers use.
enum class DemandRoute { rays, grid };

}  // namespace hotelling
