#include "hotelling/market.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "hotelling/error.hpp"

namespace hotelling {

void MarketParams::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, what); };
    if (!(market_size > 0.0) || !std::isfinite(market_size)) fail("market size M must be > 0");
    if (!(fixed_cost >= 0.0) || !std::isfinite(fixed_cost)) fail("fixed cost F must be >= 0");
    if (!(transport_cost > 0.0) || !std::isfinite(transport_cost)) fail("transport cost t must be > 0");
    if (!(reservation > 0.0) || !std::isfinite(reservation)) fail("reservation value a must be > 0");
    if (!(marginal_cost >= 0.0) || !std::isfinite(marginal_cost)) fail("marginal cost c must be >= 0");
    if (marginal_cost >= reservation) fail("marginal cost c must be below the reservation value a");
}

Configuration Configuration::create(std::vector<Point> locations) {
    if (locations.empty() || locations.size() > kMaxFirms) {
        throw Error(ErrorCode::invalid_argument,
                    "configuration needs between 1 and 16 firms, got " +
                        std::to_string(locations.size()));
    }
    for (std::size_t i = 0; i < locations.size(); ++i) {
        const Point p = locations[i];
        if (!std::isfinite(p.x1) || !std::isfinite(p.x2) || !in_unit_square(p)) {
            throw Error(ErrorCode::out_of_domain,
                        "firm " + std::to_string(i) + " lies outside the unit square");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (distance(p, locations[j]) <= kDuplicateTolerance) {
                throw Error(ErrorCode::duplicate_sites, "firms " + std::to_string(j) + " and " +
                                                            std::to_string(i) + " coincide");
            }
        }
    }
    return Configuration(std::move(locations));
}

Configuration Configuration::with_entrant(Point p) const {
    auto next = locations_;
    next.push_back(p);
    return create(std::move(next));
}

void ConsumerGrid::validate() const {
    if (resolution < 16 || resolution > 8192) {
        throw Error(ErrorCode::invalid_argument,
                    "consumer grid resolution must be in [16, 8192], got " +
                        std::to_string(resolution));
    }
}

void RaySettings::validate() const {
    if (probe_rays < 8 || probe_rays % 8 != 0 || probe_rays > 4096) {
        throw Error(ErrorCode::invalid_argument, "probe_rays must be a multiple of 8 in [8, 4096]");
    }
}

double utility(Point consumer, Point firm, double price, const MarketParams& params) noexcept {
    return params.reservation - params.transport_cost * distance(consumer, firm) - price;
}

namespace {

void check_lengths(const Configuration& config, std::size_t prices, const char* what) {
    if (config.empty()) {
        throw Error(ErrorCode::invalid_argument, std::string(what) + ": empty configuration");
    }
    if (prices != config.size()) {
        throw Error(ErrorCode::dimension_mismatch,
                    std::string(what) + ": " + std::to_string(prices) + " prices for " +
                        std::to_string(config.size()) + " firms");
    }
}

}  // namespace

MarketOutcome demand_grid(const Configuration& config, const PriceVector& prices,
                          const MarketParams& params, const ConsumerGrid& grid) {
    check_lengths(config, prices.size(), "demand_grid");
    grid.validate();
    const std::size_t n = config.size();
    const int res = grid.resolution;
    const double weight = grid.cell_weight(params);
    std::vector<double> counts(n, 0.0);
    std::vector<double> row(n);
    std::vector<double> u(n);
    std::vector<std::size_t> tied;
    tied.reserve(n);
    double served = 0.0;
    for (int k = 0; k < res; ++k) {
        std::fill(row.begin(), row.end(), 0.0);
        double row_served = 0.0;
        for (int j = 0; j < res; ++j) {
            const Point x = grid.center(j, k);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = utility(x, config[i], prices[i], params);
                best = std::max(best, u[i]);
            }
            if (best < 0.0) continue;
            tied.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (u[i] >= best - kUtilityTieTolerance) tied.push_back(i);
            }
            const double share = 1.0 / static_cast<double>(tied.size());
            for (std::size_t i : tied) row[i] += share;
            row_served += 1.0;
        }
        for (std::size_t i = 0; i < n; ++i) counts[i] += row[i];
        served += row_served;
    }
    MarketOutcome out;
    out.demand.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.demand[i] = counts[i] * weight;
    out.coverage = served / (static_cast<double>(res) * res);
    return out;
}

std::vector<double> demand_exact_equal_prices(const Configuration& config,
                                              const MarketParams& params) {
    if (config.empty()) {
        throw Error(ErrorCode::invalid_argument, "demand_exact_equal_prices: empty configuration");
    }
    const auto cells = voronoi_cells(config.locations());
    std::vector<double> demand(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        demand[i] = polygon_area(cells[i]) * params.market_size;
    }
    return demand;
}

std::vector<double> profit(const Configuration& config, const PriceVector& prices,
                           std::span<const double> demand, const MarketParams& params) {
    check_lengths(config, prices.size(), "profit");
    if (demand.size() != config.size()) {
        throw Error(ErrorCode::dimension_mismatch, "profit: demand length differs from firm count");
    }
    std::vector<double> out(config.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (prices[i] - params.marginal_cost) * demand[i] - params.fixed_cost;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ray-integrated demand
//
// Along the unit direction u from the firm's site every boundary has an
// inverse reach (1 / distance to the boundary) that is affine in u:
//   square side with outward normal n at offset d:   n.u / d
//   reservation circle of radius R:                  1 / R
//   rival at offset v with c = (p_own - p_rival)/t:  2 (c + v.u) / (|v|^2 - c^2)
// The binding boundary is the one with the largest inverse reach, so switch
// angles solve w.u = s in closed form and each piece integrates exactly.

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHuge = 1e300;

constexpr int kSideCount = 4;    // x1 = 0, x1 = 1, x2 = 0, x2 = 1 (positive offset)
constexpr int kOutside = 4;      // a side through the site: zero reach
constexpr int kReservation = 5;
constexpr int kFirstRival = 6;
constexpr int kMaxIds = kFirstRival + static_cast<int>(kMaxFirms);

constexpr std::array<double, kSideCount> kNormalX{-1.0, 1.0, 0.0, 0.0};
constexpr std::array<double, kSideCount> kNormalY{0.0, 0.0, -1.0, 1.0};
constexpr std::array<double, kSideCount> kNormalAngle{
    std::numbers::pi, 0.0, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi};

struct Rival {
    double vx = 0.0;  // rival site minus own site
    double vy = 0.0;
    double c = 0.0;   // (p_own - p_rival) / t, |c| < |v|
    double num = 0.0; // |v|^2 - c^2
};

struct RayProblem {
    // kappa_id(u) = max(0, wx * ux + wy * uy + s) for sides and rivals
    std::array<double, kMaxIds> wx{};
    std::array<double, kMaxIds> wy{};
    std::array<double, kMaxIds> s{};
    std::array<double, kSideCount> offset{};
    std::array<bool, kSideCount> through{};  // side passes through the site
    bool has_outside = false;
    double reservation_reach = kHuge;
    double inv_t = 1.0;
    int rival_count = 0;
    std::array<Rival, kMaxFirms> rivals{};

    double kappa(int id, double ux, double uy) const noexcept {
        if (id == kOutside) {
            for (int k = 0; k < kSideCount; ++k) {
                if (through[k] && ux * kNormalX[k] + uy * kNormalY[k] > 0.0) return kHuge;
            }
            return 0.0;
        }
        if (id < kSideCount && through[id]) return 0.0;
        return std::max(0.0, wx[id] * ux + wy[id] * uy + s[id]);
    }

    int binding(double ux, double uy) const noexcept {
        if (has_outside && kappa(kOutside, ux, uy) > 0.0) return kOutside;
        int best = kReservation;
        double best_kappa = s[kReservation];
        for (int k = 0; k < kSideCount; ++k) {
            if (through[k]) continue;
            const double v = wx[k] * ux + wy[k] * uy;
            if (v > best_kappa) {
                best_kappa = v;
                best = k;
            }
        }
        for (int r = 0; r < rival_count; ++r) {
            const int id = kFirstRival + r;
            const double v = wx[id] * ux + wy[id] * uy + s[id];
            if (v > best_kappa) {
                best_kappa = v;
                best = id;
            }
        }
        return best;
    }

    int binding_at(double phi) const noexcept { return binding(std::cos(phi), std::sin(phi)); }
};

struct Switch {
    double angle;
    int id;  // constraint binding from `angle` onwards
};

struct ProbeTable {
    int count = 0;
    std::vector<double> angle;
    std::vector<double> ux;
    std::vector<double> uy;
};

const ProbeTable& probe_table(int count) {
    thread_local std::vector<std::unique_ptr<ProbeTable>> tables;
    for (const auto& t : tables) {
        if (t->count == count) return *t;
    }
    auto t = std::make_unique<ProbeTable>();
    t->count = count;
    for (int k = 0; k < count; ++k) {
        const double phi = (k + 0.5) * kTwoPi / count;
        t->angle.push_back(phi);
        t->ux.push_back(std::cos(phi));
        t->uy.push_back(std::sin(phi));
    }
    tables.push_back(std::move(t));
    return *tables.back();
}

double bisect_switch(const RayProblem& rp, double lo, int a, double hi) {
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++iter) {
        const double m = 0.5 * (lo + hi);
        if (rp.binding_at(m) == a) {
            lo = m;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

// Angle in [lo, hi] at which the binding constraint changes from a to b.
double locate_switch(const RayProblem& rp, double lo, int a, double hi, int b) {
    if (a == kOutside || b == kOutside) return bisect_switch(rp, lo, a, hi);
    const double wx = rp.wx[a] - rp.wx[b];
    const double wy = rp.wy[a] - rp.wy[b];
    const double target = rp.s[b] - rp.s[a];
    const double norm = std::hypot(wx, wy);
    if (norm > 0.0) {
        const double ratio = target / norm;
        if (ratio >= -1.0 && ratio <= 1.0) {
            const double base = std::atan2(wy, wx);
            const double half = std::acos(ratio);
            for (double cand : {base + half, base - half}) {
                // shift into [lo, lo + 2 pi)
                double phi = lo + std::fmod(std::fmod(cand - lo, kTwoPi) + kTwoPi, kTwoPi);
                if (phi > hi && phi - kTwoPi >= lo - 1e-12) phi -= kTwoPi;
                if (phi < lo - 1e-12 || phi > hi + 1e-12) continue;
                // a -> b requires (w_a - w_b).u' < 0 at the crossing
                if (-wx * std::sin(phi) + wy * std::cos(phi) < 0.0) {
                    return std::clamp(phi, lo, hi);
                }
            }
        }
    }
    return bisect_switch(rp, lo, a, hi);
}

void collect_switches(const RayProblem& rp, double lo, int a, double hi, int b,
                      std::vector<Switch>& out, int depth = 0) {
    if (a == b) return;
    const double phi = locate_switch(rp, lo, a, hi, b);
    if (depth < 12) {
        // another constraint may bind between the probes
        const double eps = 1e-9 * (hi - lo);
        const int left = phi - eps > lo ? rp.binding_at(phi - eps) : a;
        const int right = phi + eps < hi ? rp.binding_at(phi + eps) : b;
        if (left != a) {
            const double mid = 0.5 * (lo + phi);
            const int c = rp.binding_at(mid);
            collect_switches(rp, lo, a, mid, c, out, depth + 1);
            collect_switches(rp, mid, c, hi, b, out, depth + 1);
            return;
        }
        if (right != b) {
            collect_switches(rp, lo, a, phi + eps, right, out, depth + 1);
            collect_switches(rp, phi + eps, right, hi, b, out, depth + 1);
            return;
        }
    }
    out.push_back({phi, b});
}

// Antiderivatives of (c + b cos x)^-k for b > |c|, k = 1, 2, 3.
struct CosinePowers {
    double j1;
    double j2;
    double j3;
};

CosinePowers cosine_powers(double c, double b, double x) {
    const double cx = std::cos(x);
    const double sx = std::sin(x);
    const double k = std::sqrt((b - c) * (b + c));
    const double den = c + b * cx;
    const double j1 = std::log((b + c * cx + k * sx) / den) / k;
    const double d = (c - b) * (c + b);  // c^2 - b^2 < 0
    const double j2 = -b * sx / (d * den) + c / d * j1;
    const double j3 = -b * sx / (2.0 * d * den * den) + 1.5 * c / d * j2 - 0.5 / d * j1;
    return {j1, j2, j3};
}

// Integral over [lo, hi] of rho^2 / 2 (area) and rho * d rho / d p_own (slope).
void integrate_piece(const RayProblem& rp, int id, double lo, double hi, double& area,
                     double& slope) {
    const double width = hi - lo;
    if (width <= 0.0 || id == kOutside) return;
    if (id == kReservation) {
        const double r = rp.reservation_reach;
        area += 0.5 * r * r * width;
        slope -= r * rp.inv_t * width;
        return;
    }
    if (id < kSideCount) {
        const double d = rp.offset[id];
        const double t1 = std::tan(std::remainder(hi - kNormalAngle[id], kTwoPi));
        const double t0 = std::tan(std::remainder(lo - kNormalAngle[id], kTwoPi));
        area += 0.5 * d * d * (t1 - t0);
        return;
    }
    const Rival& r = rp.rivals[id - kFirstRival];
    const double b = std::hypot(r.vx, r.vy);
    const double phase = std::atan2(r.vy, r.vx);
    const CosinePowers f1 = cosine_powers(r.c, b, std::remainder(hi - phase, kTwoPi));
    const CosinePowers f0 = cosine_powers(r.c, b, std::remainder(lo - phase, kTwoPi));
    const double j2 = f1.j2 - f0.j2;
    const double j3 = f1.j3 - f0.j3;
    // rho = num / (2 den), d rho / d c = -(num + 2 c den) / (2 den^2)
    area += r.num * r.num / 8.0 * j2;
    slope += rp.inv_t * (-r.num * r.num / 4.0 * j3 - r.c * r.num / 2.0 * j2);
}

// Market area of one firm (unit-square measure) and its own-price slope.
void firm_area(const Configuration& config, std::span<const double> prices,
               const MarketParams& params, std::size_t firm, const RaySettings& rays,
               double& area, double& slope) {
    area = 0.0;
    slope = 0.0;
    const double t = params.transport_cost;
    const Point site = config[firm];
    const double p = prices[firm];
    if (p >= params.reservation) return;

    RayProblem rp;
    rp.inv_t = 1.0 / t;
    rp.offset = {site.x1, 1.0 - site.x1, site.x2, 1.0 - site.x2};
    for (int k = 0; k < kSideCount; ++k) {
        rp.through[k] = rp.offset[k] <= 0.0;
        rp.has_outside = rp.has_outside || rp.through[k];
        if (!rp.through[k]) {
            rp.wx[k] = kNormalX[k] / rp.offset[k];
            rp.wy[k] = kNormalY[k] / rp.offset[k];
        }
    }
    rp.reservation_reach = (params.reservation - p) / t;
    rp.s[kReservation] = 1.0 / rp.reservation_reach;
    for (std::size_t j = 0; j < config.size(); ++j) {
        if (j == firm) continue;
        Rival r;
        r.vx = config[j].x1 - site.x1;
        r.vy = config[j].x2 - site.x2;
        r.c = (p - prices[j]) / t;
        const double b2 = r.vx * r.vx + r.vy * r.vy;
        if (r.c * r.c >= b2) {
            if (r.c > 0.0) return;  // undercut everywhere
            continue;               // this rival never wins a consumer from us
        }
        r.num = b2 - r.c * r.c;
        const int id = kFirstRival + rp.rival_count;
        rp.wx[id] = 2.0 * r.vx / r.num;
        rp.wy[id] = 2.0 * r.vy / r.num;
        rp.s[id] = 2.0 * r.c / r.num;
        rp.rivals[rp.rival_count++] = r;
    }

    const ProbeTable& probes = probe_table(rays.probe_rays);
    thread_local std::vector<Switch> switches;
    switches.clear();
    const int first = rp.binding(probes.ux[0], probes.uy[0]);
    switches.push_back({probes.angle[0], first});
    int prev = first;
    for (int k = 1; k <= probes.count; ++k) {
        const int idx = k % probes.count;
        const double lo = probes.angle[k - 1];
        const double hi = k < probes.count ? probes.angle[k] : probes.angle[0] + kTwoPi;
        const int cur = rp.binding(probes.ux[idx], probes.uy[idx]);
        if (cur != prev) collect_switches(rp, lo, prev, hi, cur, switches);
        prev = cur;
    }
    const double end = probes.angle[0] + kTwoPi;
    for (std::size_t i = 0; i < switches.size(); ++i) {
        const double lo = switches[i].angle;
        const double hi = i + 1 < switches.size() ? switches[i + 1].angle : end;
        integrate_piece(rp, switches[i].id, lo, hi, area, slope);
    }
}

}  // namespace

double firm_demand_rays(const Configuration& config, std::span<const double> prices,
                        const MarketParams& params, std::size_t firm,
                        const RaySettings& rays, double* own_slope) {
    check_lengths(config, prices.size(), "firm_demand_rays");
    if (firm >= config.size()) {
        throw Error(ErrorCode::invalid_argument, "firm_demand_rays: firm index out of range");
    }
    double area = 0.0;
    double slope = 0.0;
    firm_area(config, prices, params, firm, rays, area, slope);
    if (own_slope) *own_slope = slope * params.market_size;
    return area * params.market_size;
}

RayDemand demand_rays(const Configuration& config, std::span<const double> prices,
                      const MarketParams& params, const RaySettings& rays) {
    check_lengths(config, prices.size(), "demand_rays");
    RayDemand out;
    out.demand.resize(config.size());
    out.own_slope.resize(config.size());
    double total = 0.0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        double area = 0.0;
        double slope = 0.0;
        firm_area(config, prices, params, i, rays, area, slope);
        out.demand[i] = area * params.market_size;
        out.own_slope[i] = slope * params.market_size;
        total += area;
    }
    out.coverage = std::clamp(total, 0.0, 1.0);
    return out;
}

}  // namespace hotelling
