#include "hotelling/entry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "hotelling/error.hpp"
#include "hotelling/welfare.hpp"

namespace hotelling {
namespace {

// Lattice points are packed as i * resolution + j, so ascending cells are in
// lexicographic (x1, x2) order. Sorted cell strings key the caches.
using Cell = char16_t;
using CellKey = std::u16string;

constexpr double kTieTolerance = 1e-12;
constexpr double kLatticeTolerance = 1e-9;
constexpr double kBisectionTolerance = 1e-3;
constexpr int kInverse[kSquareSymmetries] = {0, 1, 2, 3, 4, 6, 5, 7};

thread_local bool t_in_parallel = false;

// body(i) for i in [0, count) on up to `threads` threads. Nested calls run
// serially on the calling worker.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count < 2 || t_in_parallel) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        t_in_parallel = true;
        for (int i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
        t_in_parallel = false;
    };
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < std::min(threads, count); ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);
}

struct Frame {
    int resolution = 33;

    int ix(Cell c) const noexcept { return c / resolution; }
    int iy(Cell c) const noexcept { return c % resolution; }
    Cell cell(int i, int j) const noexcept { return static_cast<Cell>(i * resolution + j); }

    Point point(Cell c) const noexcept {
        const double m = resolution - 1;
        return {ix(c) / m, iy(c) / m};
    }

    Cell apply(int s, Cell c) const noexcept {
        const int i = ix(c);
        const int j = iy(c);
        const int m = resolution - 1;
        switch (s) {
            case 0: return cell(i, j);
            case 1: return cell(m - i, j);
            case 2: return cell(i, m - j);
            case 3: return cell(m - i, m - j);
            case 4: return cell(j, i);
            case 5: return cell(m - j, i);
            case 6: return cell(j, m - i);
            default: return cell(m - j, m - i);
        }
    }

    CellKey image(int s, const CellKey& cells) const {
        CellKey out;
        out.reserve(cells.size());
        for (Cell c : cells) out.push_back(apply(s, c));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::optional<Cell> snap(Point p) const {
        const double m = resolution - 1;
        const long i = std::lround(p.x1 * m);
        const long j = std::lround(p.x2 * m);
        if (std::abs(i / m - p.x1) > kLatticeTolerance || std::abs(j / m - p.x2) > kLatticeTolerance) {
            return std::nullopt;
        }
        return cell(static_cast<int>(i), static_cast<int>(j));
    }
};

struct Canonical {
    CellKey key;       // sorted image of the cells under `symmetry`
    int symmetry = 0;  // maps the caller's frame into the key's frame
};

Canonical canonicalize(const Frame& frame, CellKey cells, bool reduce) {
    std::sort(cells.begin(), cells.end());
    Canonical best{cells, 0};
    if (!reduce) return best;
    for (int s = 1; s < kSquareSymmetries; ++s) {
        CellKey img = frame.image(s, cells);
        if (img < best.key) best = {std::move(img), s};
    }
    return best;
}

std::vector<int> stabilizer(const Frame& frame, const CellKey& sorted, bool reduce) {
    std::vector<int> out{0};
    if (!reduce) return out;
    for (int s = 1; s < kSquareSymmetries; ++s) {
        if (frame.image(s, sorted) == sorted) out.push_back(s);
    }
    return out;
}

CellKey with(const CellKey& cells, Cell extra) {
    CellKey out = cells;
    out.push_back(extra);
    return out;
}

std::vector<Cell> sublattice(const Frame& frame, int resolution) {
    const int step = (frame.resolution - 1) / (resolution - 1);
    std::vector<Cell> out;
    for (int i = 0; i < frame.resolution; i += step) {
        for (int j = 0; j < frame.resolution; j += step) out.push_back(frame.cell(i, j));
    }
    return out;
}

bool lex_less(const std::vector<Point>& a, const std::vector<Point>& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i].x1 != b[i].x1) return a[i].x1 < b[i].x1;
        if (a[i].x2 != b[i].x2) return a[i].x2 < b[i].x2;
    }
    return a.size() < b.size();
}

int canonical_symmetry(const std::vector<Point>& points) {
    int best = 0;
    std::vector<Point> best_image = points;
    for (int s = 1; s < kSquareSymmetries; ++s) {
        std::vector<Point> img;
        for (const auto& p : points) img.push_back(apply_symmetry(s, p));
        if (lex_less(img, best_image)) {
            best = s;
            best_image = std::move(img);
        }
    }
    return best;
}

// Revenues at the markup fixed point. Whether that point is a price
// equilibrium is checked separately and only when a comparison needs it.
struct RevenueEntry {
    bool stationary = false;
    std::vector<double> prices;
    std::vector<double> revenue;  // per unit market size, in key order
};

struct EntrantEntry {
    bool found = false;
    Cell location = 0;  // in the frame of the incumbents' key
    double revenue = 0.0;
    int candidates = 0;
    int skipped = 0;
};

// Result of the subgame that starts with a given incumbent set, in that set's
// frame: the successors' cells in entry order and the entrant's decision.
struct Outcome {
    bool valid = false;
    std::vector<Cell> added;
    bool has_entrant = false;
    bool entered = false;
    Cell entrant = 0;
    double entrant_revenue = 0.0;
};

template <class V>
class ConcurrentCache {
public:
    std::optional<V> find(const CellKey& key) const {
        std::shared_lock lock(mutex_);
        const auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    V insert(const CellKey& key, V value) {
        std::unique_lock lock(mutex_);
        return map_.try_emplace(key, std::move(value)).first->second;
    }

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<CellKey, V> map_;
};

// The per-(n, M) subgame memo.
struct Context {
    double market_size = 0.0;
    int n = 0;
    ConcurrentCache<Outcome> memo;
};

bool better(double value, Cell cell, double best_value, Cell best_cell, bool have_best) {
    if (!have_best) return true;
    if (value > best_value + kTieTolerance) return true;
    return value >= best_value - kTieTolerance && cell < best_cell;
}

}  // namespace

const char* regime_name(Regime regime) noexcept {
    switch (regime) {
        case Regime::just_entered: return "just_entered";
        case Regime::deterrence: return "deterrence";
        case Regime::interior: return "interior";
    }
    return "unknown";
}

void LocationGrid::validate() const {
    if (resolution < 3 || resolution > 129 || resolution % 2 == 0) {
        throw Error(ErrorCode::invalid_argument, "location grid resolution must be odd and in [3, 129]");
    }
}

void SearchSettings::validate(const LocationGrid& grid) const {
    const auto check = [&](int r, const char* what) {
        if (r == 0) return;
        if (r < 2 || r > grid.resolution || (grid.resolution - 1) % (r - 1) != 0) {
            throw Error(ErrorCode::invalid_argument,
                        std::string(what) + " must be a sublattice of the location grid");
        }
    };
    check(leader_resolution, "leader_resolution");
    check(last_resolution, "last_resolution");
    check(entrant_resolution, "entrant_resolution");
    if (climb_starts < 1) throw Error(ErrorCode::invalid_argument, "climb_starts must be >= 1");
    if (threads < 1) throw Error(ErrorCode::invalid_argument, "threads must be >= 1");
    if (monotone_samples < 0) throw Error(ErrorCode::invalid_argument, "monotone_samples must be >= 0");
    pricing.validate();
}

struct GameSolver::Impl {
    MarketParams params;
    MarketParams unit;  // M = 1, so revenues are per unit market size
    LocationGrid grid;
    SearchSettings settings;
    Frame frame;
    std::vector<Cell> leader_cells;
    std::vector<Cell> last_cells;
    std::vector<Cell> entrant_cells;

    ConcurrentCache<RevenueEntry> revenues;
    ConcurrentCache<bool> verified;
    ConcurrentCache<EntrantEntry> entrants;
    std::map<std::tuple<int, double, double>, EntryBoundary> boundaries;

    std::atomic<std::int64_t> price_solves{0};
    std::atomic<std::int64_t> verifications{0};
    std::atomic<std::int64_t> revenue_lookups{0};
    std::atomic<std::int64_t> skipped_candidates{0};
    std::atomic<std::int64_t> entrant_searches{0};
    std::atomic<std::int64_t> subgames{0};
    std::atomic<std::int64_t> bound_violations{0};

    Impl(const MarketParams& p, const LocationGrid& g, const SearchSettings& s)
        : params(p), unit(p), grid(g), settings(s), frame{g.resolution} {
        params.validate();
        grid.validate();
        settings.validate(grid);
        unit.market_size = 1.0;
        unit.fixed_cost = 0.0;
        const auto pick = [&](int r) { return r == 0 ? grid.resolution : r; };
        leader_cells = sublattice(frame, pick(settings.leader_resolution));
        last_cells = sublattice(frame, pick(settings.last_resolution));
        entrant_cells = sublattice(frame, pick(settings.entrant_resolution));
    }

    bool reduce() const noexcept { return grid.symmetry_reduction; }

    bool enters(double market_size, double revenue) const noexcept {
        return market_size * revenue - params.fixed_cost >= 0.0;
    }

    static Configuration configuration_of(const Frame& frame, const CellKey& key) {
        std::vector<Point> points;
        for (Cell c : key) points.push_back(frame.point(c));
        return Configuration::create(points);
    }

    RevenueEntry revenue(const CellKey& key) {
        ++revenue_lookups;
        if (auto hit = revenues.find(key)) return *hit;
        ++price_solves;
        const auto config = configuration_of(frame, key);
        const auto report = markup_price_equilibrium(config, unit, settings.pricing);
        RevenueEntry entry;
        entry.stationary = report.converged;
        if (entry.stationary) {
            entry.prices = report.prices;
            const auto demand = demand_rays(config, report.prices, unit, settings.pricing.rays).demand;
            for (std::size_t i = 0; i < key.size(); ++i) {
                entry.revenue.push_back((report.prices[i] - unit.marginal_cost) * demand[i]);
            }
        }
        return revenues.insert(key, std::move(entry));
    }

    bool is_equilibrium(const CellKey& key) {
        if (auto hit = verified.find(key)) return *hit;
        const auto entry = revenue(key);
        bool ok = entry.stationary;
        if (ok && key.size() > 1) {
            ++verifications;
            ok = is_price_equilibrium(configuration_of(frame, key), entry.prices, unit, settings.pricing);
        }
        return verified.insert(key, ok);
    }

    // Revenue of `who` in the market formed by `cells` (any frame), at the
    // markup fixed point; with `checked`, only when it is a price equilibrium.
    std::optional<double> revenue_of(const CellKey& cells, Cell who, bool checked = true) {
        const auto canon = canonicalize(frame, cells, reduce());
        const auto entry = revenue(canon.key);
        if (!entry.stationary || (checked && !is_equilibrium(canon.key))) return std::nullopt;
        const Cell mapped = frame.apply(canon.symmetry, who);
        const auto pos = std::lower_bound(canon.key.begin(), canon.key.end(), mapped) - canon.key.begin();
        return entry.revenue[static_cast<std::size_t>(pos)];
    }

    bool is_equilibrium_with(const CellKey& cells) {
        return is_equilibrium(canonicalize(frame, cells, reduce()).key);
    }

    // Lattice cells not in `sorted`, one per orbit of its stabilizer.
    std::vector<Cell> candidates(const CellKey& sorted, const std::vector<Cell>& lattice) const {
        const auto stab = stabilizer(frame, sorted, reduce());
        std::vector<Cell> out;
        for (Cell c : lattice) {
            if (std::binary_search(sorted.begin(), sorted.end(), c)) continue;
            bool representative = true;
            for (int s : stab) representative = representative && frame.apply(s, c) >= c;
            if (representative) out.push_back(c);
        }
        return out;
    }

    EntrantEntry entrant(const CellKey& key) {
        if (auto hit = entrants.find(key)) return *hit;
        ++entrant_searches;
        const auto cands = candidates(key, entrant_cells);
        std::vector<std::optional<double>> value(cands.size());
        parallel_for(static_cast<int>(cands.size()), settings.threads,
                     [&](int i) { value[i] = revenue_of(with(key, cands[i]), cands[i], false); });
        EntrantEntry entry;
        entry.candidates = static_cast<int>(cands.size());
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (value[i]) {
                order.push_back(i);
            } else {
                ++entry.skipped;
            }
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (*value[a] != *value[b]) return *value[a] > *value[b];
            return cands[a] < cands[b];
        });
        // Climb from the best few coarse points that are true equilibria.
        std::vector<std::size_t> starts;
        for (std::size_t idx : order) {
            if (static_cast<int>(starts.size()) == settings.climb_starts) break;
            if (is_equilibrium_with(with(key, cands[idx]))) {
                starts.push_back(idx);
            } else {
                ++entry.skipped;
            }
        }
        for (std::size_t idx : starts) {
            Cell cur = cands[idx];
            double v = *value[idx];
            for (;;) {
                std::vector<std::pair<double, Cell>> up;
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const int i = frame.ix(cur) + di;
                        const int j = frame.iy(cur) + dj;
                        if ((di == 0 && dj == 0) || i < 0 || j < 0 || i >= frame.resolution ||
                            j >= frame.resolution) {
                            continue;
                        }
                        const Cell nb = frame.cell(i, j);
                        if (std::binary_search(key.begin(), key.end(), nb)) continue;
                        const auto r = revenue_of(with(key, nb), nb, false);
                        if (r && *r > v + kTieTolerance) up.emplace_back(*r, nb);
                    }
                }
                std::sort(up.begin(), up.end(), [](const auto& a, const auto& b) {
                    if (a.first != b.first) return a.first > b.first;
                    return a.second < b.second;
                });
                bool moved = false;
                for (const auto& [r, nb] : up) {
                    if (is_equilibrium_with(with(key, nb))) {
                        cur = nb;
                        v = r;
                        moved = true;
                        break;
                    }
                }
                if (!moved) break;
            }
            if (better(v, cur, entry.revenue, entry.location, entry.found)) {
                entry.found = true;
                entry.location = cur;
                entry.revenue = v;
            }
        }
        skipped_candidates += entry.skipped;
        return entrants.insert(key, entry);
    }

    Outcome solve(Context& ctx, const CellKey& key) {
        if (auto hit = ctx.memo.find(key)) return *hit;
        ++subgames;
        Outcome out;
        const int k = static_cast<int>(key.size());
        if (k == ctx.n) {
            const auto e = entrant(key);
            out.valid = true;
            out.has_entrant = e.found;
            out.entrant = e.location;
            out.entrant_revenue = e.revenue;
            out.entered = e.found && enters(ctx.market_size, e.revenue);
        } else if (k == ctx.n - 1) {
            out = last_incumbent(ctx, key, nullptr);
        } else {
            out = leader(ctx, key, nullptr);
        }
        return ctx.memo.insert(key, std::move(out));
    }

    // The subgame after `x` joins `key`, mapped back into the frame of `key`,
    // with x's revenue in the final market.
    std::optional<std::pair<double, Outcome>> continue_with(Context& ctx, const CellKey& key, Cell x) {
        const auto canon = canonicalize(frame, with(key, x), reduce());
        const Outcome sub = solve(ctx, canon.key);
        if (!sub.valid) return std::nullopt;
        CellKey final_cells = canon.key;
        for (Cell c : sub.added) final_cells.push_back(c);
        if (sub.entered) final_cells.push_back(sub.entrant);
        const auto r = revenue_of(final_cells, frame.apply(canon.symmetry, x));
        if (!r) return std::nullopt;
        const int inv = kInverse[canon.symmetry];
        Outcome mapped = sub;
        mapped.added = {x};
        for (Cell c : sub.added) mapped.added.push_back(frame.apply(inv, c));
        mapped.entrant = frame.apply(inv, sub.entrant);
        return std::make_pair(*r, std::move(mapped));
    }

    Outcome leader(Context& ctx, const CellKey& key, std::vector<Cell>* ties) {
        const auto cands = candidates(key, leader_cells);
        std::vector<std::optional<std::pair<double, Outcome>>> results(cands.size());
        parallel_for(static_cast<int>(cands.size()), settings.threads,
                     [&](int i) { results[i] = continue_with(ctx, key, cands[i]); });
        Outcome best;
        double best_value = 0.0;
        Cell best_cell = 0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (!results[i]) {
                ++skipped_candidates;
                continue;
            }
            if (better(results[i]->first, cands[i], best_value, best_cell, best.valid)) {
                best = results[i]->second;
                best.valid = true;
                best_value = results[i]->first;
                best_cell = cands[i];
            }
        }
        if (ties != nullptr) {
            for (std::size_t i = 0; i < cands.size(); ++i) {
                if (results[i] && std::abs(results[i]->first - best_value) <= kTieTolerance) {
                    ties->push_back(cands[i]);
                }
            }
        }
        return best;
    }

    // The last incumbent's choice by branch and bound: its revenue with no
    // entrant bounds its revenue after entry, so candidates are visited in
    // decreasing bound and the scan stops once the bound falls below the best
    // payoff found.
    Outcome last_incumbent(Context& ctx, const CellKey& key, std::vector<Cell>* ties) {
        const auto cands = candidates(key, last_cells);
        std::vector<double> bound(cands.size(), 0.0);
        std::vector<char> ok(cands.size(), 0);
        parallel_for(static_cast<int>(cands.size()), settings.threads, [&](int i) {
            if (const auto r = revenue_of(with(key, cands[i]), cands[i], false)) {
                bound[i] = *r;
                ok[i] = 1;
            }
        });
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (ok[i]) {
                order.push_back(i);
            } else {
                ++skipped_candidates;
            }
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (bound[a] != bound[b]) return bound[a] > bound[b];
            return cands[a] < cands[b];
        });

        Outcome best;
        double best_value = 0.0;
        Cell best_cell = 0;
        std::vector<std::pair<Cell, double>> visited;
        const std::size_t batch = static_cast<std::size_t>(std::max(settings.threads, 1));
        for (std::size_t start = 0; start < order.size(); start += batch) {
            if (settings.bound_pruning && best.valid && bound[order[start]] < best_value - kTieTolerance) break;
            const std::size_t stop = std::min(order.size(), start + batch);
            std::vector<Canonical> canon(stop - start);
            parallel_for(static_cast<int>(stop - start), settings.threads, [&](int b) {
                canon[b] = canonicalize(frame, with(key, cands[order[start + b]]), reduce());
                if (is_equilibrium(canon[b].key)) entrant(canon[b].key);
            });
            for (std::size_t b = 0; b < stop - start; ++b) {
                const std::size_t idx = order[start + b];
                if (settings.bound_pruning && best.valid && bound[idx] < best_value - kTieTolerance) break;
                const Cell x = cands[idx];
                if (!is_equilibrium(canon[b].key)) {
                    ++skipped_candidates;
                    continue;
                }
                const auto e = entrant(canon[b].key);
                Outcome o;
                o.valid = true;
                o.added = {x};
                o.has_entrant = e.found;
                o.entrant = frame.apply(kInverse[canon[b].symmetry], e.location);
                o.entrant_revenue = e.revenue;
                o.entered = e.found && enters(ctx.market_size, e.revenue);
                double value = bound[idx];
                if (o.entered) {
                    const auto r = revenue_of(with(with(key, x), o.entrant), x);
                    if (!r) {
                        ++skipped_candidates;
                        continue;
                    }
                    if (*r > value + 1e-9) ++bound_violations;
                    value = *r;
                }
                visited.emplace_back(x, value);
                if (better(value, x, best_value, best_cell, best.valid)) {
                    best = std::move(o);
                    best_value = value;
                    best_cell = x;
                }
            }
        }
        if (ties != nullptr) {
            for (const auto& [cell, value] : visited) {
                if (std::abs(value - best_value) <= kTieTolerance) ties->push_back(cell);
            }
            std::sort(ties->begin(), ties->end());
        }
        return best;
    }

    // Whole game with `n` firms placed by induction at this market size.
    Outcome play(double market_size, int n, std::vector<Cell>* ties) {
        Context ctx;
        ctx.market_size = market_size;
        ctx.n = n;
        const CellKey empty;
        if (n == 0) return solve(ctx, empty);
        Outcome out = n == 1 ? last_incumbent(ctx, empty, ties) : leader(ctx, empty, ties);
        if (!out.valid) {
            throw Error(ErrorCode::not_converged, "no candidate location admits a price equilibrium");
        }
        return out;
    }

    EquilibriumResult build(double market_size, const Outcome& out,
                            const std::vector<Cell>& ties) {
        std::vector<Point> points;
        for (Cell c : out.added) points.push_back(frame.point(c));
        if (out.entered) points.push_back(frame.point(out.entrant));
        const int g = canonical_symmetry(points);
        for (auto& p : points) p = apply_symmetry(g, p);

        EquilibriumResult result;
        result.n = static_cast<int>(points.size());
        result.market_size = market_size;
        result.configuration = Configuration::create(points);
        MarketParams p = params;
        p.market_size = market_size;
        const auto report = price_equilibrium(result.configuration, p, settings.pricing);
        result.prices = report.prices;
        result.prices_converged = report.converged;
        result.price_iterations = report.iterations;
        result.price_spread = report.multistart_spread;
        result.price_residual = report.residual;
        result.demand = demand_rays(result.configuration, result.prices, p, settings.pricing.rays).demand;
        for (std::size_t i = 0; i < points.size(); ++i) {
            result.profits.push_back((result.prices[i] - p.marginal_cost) * result.demand[i] - p.fixed_cost);
        }
        result.entrant_blocked = !out.entered;
        result.regime = out.entered ? Regime::just_entered : Regime::deterrence;
        if (out.has_entrant) {
            result.best_entrant_profit = market_size * out.entrant_revenue - p.fixed_cost;
            result.best_entrant_location = apply_symmetry(g, frame.point(out.entrant));
        } else {
            // No candidate could be priced: the entrant has no market.
            result.best_entrant_profit = -p.fixed_cost;
        }
        for (Cell c : ties) result.first_choice_ties.push_back(apply_symmetry(g, frame.point(c)));
        std::sort(result.first_choice_ties.begin(), result.first_choice_ties.end(),
                  [](Point a, Point b) { return lex_less({a}, {b}); });
        result.social_cost = social_cost(result.configuration, p).cost;
        return result;
    }

    EquilibriumResult equilibrium(int n, double market_size) {
        std::vector<Cell> ties;
        const Outcome out = play(market_size, n, &ties);
        return build(market_size, out, ties);
    }

    EntrantResponse direct_entrant(const Configuration& incumbents, double market_size) {
        EntrantResponse response;
        double best = 0.0;
        for (Cell c : sublattice(frame, grid.resolution)) {
            const Point y = frame.point(c);
            bool clash = false;
            for (const auto& q : incumbents.locations()) clash = clash || distance(q, y) <= kLatticeTolerance;
            if (clash) continue;
            ++response.candidates;
            const auto config = incumbents.with_entrant(y);
            const auto report = fast_price_equilibrium(config, unit, settings.pricing, false);
            ++price_solves;
            ++verifications;
            if (!report.converged) {
                ++response.skipped;
                continue;
            }
            const double r = (report.prices.back() - unit.marginal_cost) *
                             firm_demand_rays(config, report.prices, unit, config.size() - 1,
                                              settings.pricing.rays);
            if (!response.found || r > best + kTieTolerance) {
                response.found = true;
                response.location = y;
                best = r;
            }
        }
        skipped_candidates += response.skipped;
        response.profit = market_size * best - params.fixed_cost;
        return response;
    }

    bool entered_at(int incumbents, double market_size) {
        return play(market_size, incumbents, nullptr).entered;
    }

    EntryBoundary boundary(int incumbents, double lo, double hi) {
        const auto id = std::make_tuple(incumbents, lo, hi);
        if (const auto it = boundaries.find(id); it != boundaries.end()) return it->second;
        if (!(lo > 0.0) || !(hi > lo)) {
            throw Error(ErrorCode::invalid_argument, "market size range must satisfy 0 < lo < hi");
        }
        EntryBoundary b;
        b.incumbents = incumbents;
        std::vector<ThresholdSample> samples;
        const auto probe = [&](double m) {
            const bool e = entered_at(incumbents, m);
            samples.push_back({m, e});
            return e;
        };
        const bool at_lo = probe(lo);
        const bool at_hi = probe(hi);
        if (at_lo || !at_hi) {
            std::ostringstream msg;
            msg << "entry against " << incumbents << " incumbents is not bracketed by [" << lo << ", "
                << hi << "]: best entrant profit is " << (at_lo ? ">= 0" : "< 0") << " at the lower end and "
                << (at_hi ? ">= 0" : "< 0") << " at the upper end";
            throw Error(ErrorCode::bracketing_failure, msg.str());
        }
        for (int s = 1; s <= settings.monotone_samples; ++s) {
            probe(lo * std::pow(hi / lo, static_cast<double>(s) / (settings.monotone_samples + 1)));
        }
        const auto sorted = [&] {
            auto v = samples;
            std::sort(v.begin(), v.end(),
                      [](const ThresholdSample& a, const ThresholdSample& b) { return a.market_size < b.market_size; });
            return v;
        };
        // Bisect between the first sampled entry and the sample just below it.
        auto ordered = sorted();
        std::size_t first = 0;
        while (!ordered[first].entered) ++first;
        double below = ordered[first - 1].market_size;
        double above = ordered[first].market_size;
        while (above / below - 1.0 > kBisectionTolerance) {
            const double mid = std::sqrt(below * above);
            (probe(mid) ? above : below) = mid;
        }
        b.samples = sorted();
        b.below = below;
        b.above = above;
        for (std::size_t i = 1; i < b.samples.size(); ++i) {
            if (b.samples[i - 1].entered && !b.samples[i].entered) b.monotone = false;
        }
        boundaries.emplace(id, b);
        return b;
    }
};

GameSolver::GameSolver(const MarketParams& params, const LocationGrid& grid, const SearchSettings& settings)
    : impl_(std::make_unique<Impl>(params, grid, settings)) {}

GameSolver::~GameSolver() = default;

const MarketParams& GameSolver::params() const noexcept { return impl_->params; }
const LocationGrid& GameSolver::grid() const noexcept { return impl_->grid; }

SearchCounters GameSolver::counters() const {
    SearchCounters c;
    c.price_solves = impl_->price_solves;
    c.verifications = impl_->verifications;
    c.revenue_lookups = impl_->revenue_lookups;
    c.skipped_candidates = impl_->skipped_candidates;
    c.entrant_searches = impl_->entrant_searches;
    c.subgames = impl_->subgames;
    c.bound_violations = impl_->bound_violations;
    return c;
}

EntrantResponse GameSolver::entrant_best_response(const Configuration& incumbents, double market_size) {
    if (!(market_size > 0.0)) throw Error(ErrorCode::invalid_argument, "market size must be > 0");
    auto& im = *impl_;
    CellKey cells;
    for (const auto& p : incumbents.locations()) {
        const auto c = im.frame.snap(p);
        if (!c) return im.direct_entrant(incumbents, market_size);
        cells.push_back(*c);
    }
    const auto canon = canonicalize(im.frame, cells, im.reduce());
    const auto e = im.entrant(canon.key);
    EntrantResponse response;
    response.found = e.found;
    response.candidates = e.candidates;
    response.skipped = e.skipped;
    response.profit = e.found ? market_size * e.revenue - im.params.fixed_cost : -im.params.fixed_cost;
    if (e.found) {
        // Least image among the symmetries that fix the incumbents.
        Cell y = im.frame.apply(kInverse[canon.symmetry], e.location);
        std::sort(cells.begin(), cells.end());
        for (int s : stabilizer(im.frame, cells, im.reduce())) y = std::min(y, im.frame.apply(s, y));
        response.location = im.frame.point(y);
    }
    return response;
}

EquilibriumResult GameSolver::sequential_equilibrium(int n, double market_size) {
    if (n < 1 || n > 7) throw Error(ErrorCode::infeasible_n, "sequential_equilibrium: n must be in 1..7");
    if (!(market_size > 0.0)) throw Error(ErrorCode::invalid_argument, "market size must be > 0");
    auto& im = *impl_;
    std::vector<Cell> ties;
    const Outcome out = im.play(market_size, n, &ties);
    CellKey final_cells(out.added.begin(), out.added.end());
    if (out.entered) final_cells.push_back(out.entrant);
    const auto r = im.revenue_of(final_cells, out.added.back());
    if (!r || !im.enters(market_size, *r)) {
        std::ostringstream msg;
        msg << "firm " << n << " cannot cover its fixed cost at M = " << market_size;
        throw Error(ErrorCode::infeasible_n, msg.str());
    }
    return im.build(market_size, out, ties);
}

EquilibriumResult GameSolver::deterrence_solve(int n, double market_size) {
    auto result = sequential_equilibrium(n, market_size);
    if (!result.entrant_blocked) {
        std::ostringstream msg;
        msg << n << " firms cannot block entry at M = " << market_size;
        throw Error(ErrorCode::deterrence_impossible, msg.str());
    }
    return result;
}

EntryBoundary GameSolver::entry_boundary(int incumbents, double lo, double hi) {
    if (incumbents < 0 || incumbents > 7) throw Error(ErrorCode::infeasible_n, "incumbents must be in 0..7");
    return impl_->boundary(incumbents, lo, hi);
}

ThresholdSweep GameSolver::threshold_sweep(int n, double lo, double hi) {
    if (n < 1 || n > 7) throw Error(ErrorCode::infeasible_n, "threshold_sweep: n must be in 1..7");
    const auto enter = entry_boundary(n - 1, lo, hi);
    const auto deter = entry_boundary(n, lo, hi);
    ThresholdSweep sweep;
    sweep.n = n;
    sweep.m_enter = enter.above;
    sweep.m_max_deter = deter.below;
    sweep.monotone = enter.monotone && deter.monotone;
    sweep.just_entered = impl_->equilibrium(n - 1, sweep.m_enter);
    sweep.deterrence = impl_->equilibrium(n, sweep.m_max_deter);
    return sweep;
}

EntrantResponse entrant_best_response(const Configuration& incumbents, const MarketParams& params,
                                      const LocationGrid& grid, const SearchSettings& settings) {
    GameSolver solver(params, grid, settings);
    return solver.entrant_best_response(incumbents, params.market_size);
}

EquilibriumResult sequential_equilibrium(int n, const MarketParams& params, const LocationGrid& grid,
                                         const SearchSettings& settings) {
    GameSolver solver(params, grid, settings);
    return solver.sequential_equilibrium(n, params.market_size);
}

EquilibriumResult deterrence_solve(int n, const MarketParams& params, const LocationGrid& grid,
                                   const SearchSettings& settings) {
    GameSolver solver(params, grid, settings);
    return solver.deterrence_solve(n, params.market_size);
}

ThresholdSweep threshold_sweep(int n, const MarketParams& params, double lo, double hi,
                               const LocationGrid& grid, const SearchSettings& settings) {
    GameSolver solver(params, grid, settings);
    return solver.threshold_sweep(n, lo, hi);
}

Configuration canonical_configuration(const Configuration& config) {
    auto points = config.locations();
    const int g = canonical_symmetry(points);
    for (auto& p : points) p = apply_symmetry(g, p);
    return Configuration::create(points);
}

}  // namespace hotelling
