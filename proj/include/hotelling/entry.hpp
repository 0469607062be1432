#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hotelling/market.hpp"
#include "hotelling/pricing.hpp"

namespace hotelling {

// Candidate locations {0, 1/(r-1), ..., 1} per axis. An odd resolution keeps
// 1/2 on the lattice.
struct LocationGrid {
    int resolution = 33;
    bool symmetry_reduction = true;

    void validate() const;
    double coordinate(int k) const noexcept { return static_cast<double>(k) / (resolution - 1); }
};

// Search effort. Each stage may use a coarser sublattice of the location grid
// (0 selects the full grid): firms before the last incumbent, the last
// incumbent, and the entrant's first scan. The entrant's best coarse points
// are then refined by hill climbing on the full grid, so the entrant always
// ends on a local maximum of the full lattice. With every resolution equal to
// the grid's, the search is exhaustive.
struct SearchSettings {
    int leader_resolution = 0;
    int last_resolution = 0;
    int entrant_resolution = 0;
    int climb_starts = 4;
    int threads = 1;
    int monotone_samples = 4;  // interior probes of the entry indicator per bracket
    // The last incumbent's candidates are scanned in order of their revenue
    // before entry, stopping once that falls below the best value found. Entry
    // usually lowers revenue, so this is a heuristic bound; see
    // SearchCounters::bound_violations. false scans every candidate.
    bool bound_pruning = true;
    PriceSolverOptions pricing{};

    void validate(const LocationGrid& grid) const;
};

enum class Regime { just_entered, deterrence, interior };
const char* regime_name(Regime regime) noexcept;

struct EntrantResponse {
    bool found = false;  // false when every candidate failed to price
    Point location{};
    double profit = 0.0;
    int candidates = 0;
    int skipped = 0;  // candidates whose price equilibrium did not converge
};

struct EquilibriumResult {
    int n = 0;                    // firms in the final market
    double market_size = 0.0;
    Configuration configuration;  // final market in entry order, entrant last when it came in
    PriceVector prices;
    std::vector<double> profits;
    std::vector<double> demand;
    Regime regime = Regime::deterrence;
    bool entrant_blocked = true;
    double best_entrant_profit = 0.0;
    std::optional<Point> best_entrant_location;
    double social_cost = 0.0;
    // Canonical first-firm locations that tie with the chosen one.
    std::vector<Point> first_choice_ties;
    // Final price solve.
    bool prices_converged = false;
    int price_iterations = 0;
    double price_spread = 0.0;
    double price_residual = 0.0;
};

struct ThresholdSample {
    double market_size = 0.0;
    bool entered = false;
};

// Market sizes bracketing the change in the (k+1)-th firm's entry decision
// against k optimally placed incumbents: entry is blocked at `below` and
// happens at `above`, with above / below - 1 <= 1e-3.
struct EntryBoundary {
    int incumbents = 0;
    double below = 0.0;
    double above = 0.0;
    bool monotone = true;
    std::vector<ThresholdSample> samples;  // every evaluated market size, ascending
};

struct ThresholdSweep {
    int n = 0;
    double m_enter = 0.0;      // least M at which the n-th firm enters
    double m_max_deter = 0.0;  // greatest M at which n firms block the next one
    bool monotone = true;
    EquilibriumResult just_entered;
    EquilibriumResult deterrence;
};

struct SearchCounters {
    std::int64_t price_solves = 0;   // markup fixed points
    std::int64_t verifications = 0;  // global best-response checks
    std::int64_t revenue_lookups = 0;
    std::int64_t skipped_candidates = 0;
    std::int64_t entrant_searches = 0;
    std::int64_t subgames = 0;
    std::int64_t bound_violations = 0;  // entry raised an incumbent's revenue
};

// Backward-induction solver. Revenue per unit market size and the entrant's
// best revenue depend on locations only, so they are cached across market
// sizes and calls; the market size enters only through the entry test
// M * revenue - F >= 0. Not copyable; safe to use from one thread at a time
// (it parallelizes internally).
class GameSolver {
public:
    GameSolver(const MarketParams& params, const LocationGrid& grid,
               const SearchSettings& settings = {});
    ~GameSolver();
    GameSolver(const GameSolver&) = delete;
    GameSolver& operator=(const GameSolver&) = delete;

    // Best lattice location of one more firm. Incumbents may be anywhere; off
    // the lattice the scan is exhaustive and uncached. An empty configuration
    // asks for the monopolist's location.
    EntrantResponse entrant_best_response(const Configuration& incumbents, double market_size);

    // Firms 1..n choose in turn; an (n+1)-th firm enters iff its best profit
    // is >= 0. Regime is deterrence when it stays out and just_entered (with
    // the entrant appended) when it comes in. Throws infeasible_n when the
    // n-th firm cannot cover its fixed cost.
    EquilibriumResult sequential_equilibrium(int n, double market_size);

    // As sequential_equilibrium, but throws deterrence_impossible when the
    // (n+1)-th firm enters.
    EquilibriumResult deterrence_solve(int n, double market_size);

    // Bisection of the entry indicator against k incumbents over [lo, hi].
    // Throws bracketing_failure unless entry is blocked at lo and happens at hi.
    EntryBoundary entry_boundary(int incumbents, double lo, double hi);

    // M_enter(n) from the boundary with n-1 incumbents, M_max_deter(n) from the
    // one with n incumbents, and the equilibria at both.
    ThresholdSweep threshold_sweep(int n, double lo, double hi);

    SearchCounters counters() const;
    const MarketParams& params() const noexcept;
    const LocationGrid& grid() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot wrappers with a fresh solver.
EntrantResponse entrant_best_response(const Configuration& incumbents, const MarketParams& params,
                                      const LocationGrid& grid, const SearchSettings& settings = {});
EquilibriumResult sequential_equilibrium(int n, const MarketParams& params, const LocationGrid& grid,
                                         const SearchSettings& settings = {});
EquilibriumResult deterrence_solve(int n, const MarketParams& params, const LocationGrid& grid,
                                   const SearchSettings& settings = {});
ThresholdSweep threshold_sweep(int n, const MarketParams& params, double lo, double hi,
                               const LocationGrid& grid, const SearchSettings& settings = {});

// Lexicographically least image of an entry-ordered configuration under the
// square's symmetries, comparing firm by firm in entry order.
Configuration canonical_configuration(const Configuration& config);

}  // namespace hotelling
