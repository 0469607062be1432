// Acceptance run: one pass/fail line per criterion, details above them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hotelling/entry.hpp"
#include "hotelling/error.hpp"
#include "hotelling/geometry.hpp"
#include "hotelling/market.hpp"
#include "hotelling/pricing.hpp"
#include "hotelling/scenario.hpp"
#include "hotelling/welfare.hpp"
#include "reference_layouts.hpp"

using namespace hotelling;

namespace {

constexpr double kSweepLo = 1.0;
constexpr double kSweepHi = 1e5;

struct Outcome {
    int id = 0;
    std::string title;
    bool pass = false;
    double seconds = 0.0;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void detail(const std::string& line) { std::printf("    %s\n", line.c_str()); std::fflush(stdout); }

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string show(const std::vector<Point>& sites) {
    std::string out;
    for (const auto& p : sites) out += "(" + fmt("%.4f", p.x1) + "," + fmt("%.4f", p.x2) + ") ";
    if (!out.empty()) out.pop_back();
    return out;
}

std::string show(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += fmt("%.3f", x) + " ";
    if (!out.empty()) out.pop_back();
    return out;
}

// Smallest over square symmetries and firm matchings of the largest
// per-coordinate deviation between two site sets.
double pattern_distance(const std::vector<Point>& found, const std::vector<Point>& expected) {
    if (found.size() != expected.size()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> perm(expected.size());
    for (int s = 0; s < kSquareSymmetries; ++s) {
        std::vector<Point> image;
        for (const auto& p : found) image.push_back(apply_symmetry(s, p));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double worst = 0.0;
            for (std::size_t i = 0; i < perm.size(); ++i) {
                const Point a = image[i];
                const Point b = expected[perm[i]];
                worst = std::max({worst, std::abs(a.x1 - b.x1), std::abs(a.x2 - b.x2)});
            }
            best = std::min(best, worst);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return best;
}

// Search settings per firm count, sized for a single core. Finer leader
// lattices for n >= 3 multiply the run time by an order of magnitude per firm.
struct CaseSettings {
    int n;
    int grid;
    int leader;
    int last;
    int entrant;
};

const std::vector<CaseSettings> kCaseSettings = {
    {1, 33, 0, 0, 0}, {2, 37, 13, 13, 13}, {3, 33, 9, 9, 9}, {4, 33, 5, 9, 9}, {5, 33, 3, 5, 9}, {6, 33, 3, 5, 9},
};

std::string settings_label(const CaseSettings& c) {
    const auto r = [&](int v) { return std::to_string(v == 0 ? c.grid : v); };
    return std::to_string(c.grid) + "-lattice, stages " + r(c.leader) + "/" + r(c.last) + "/" + r(c.entrant);
}

// One solver per distinct settings; sweeps for n = 1..6.
struct SweepSet {
    std::map<int, ThresholdSweep> sweeps;
    std::map<int, EntryBoundary> next_boundary;  // boundary with n incumbents, same solver as sweep n
    std::map<int, double> seconds;
    std::map<int, std::string> label;
    std::map<int, std::string> error;
    std::vector<std::shared_ptr<GameSolver>> solvers;
};

SweepSet run_sweeps(const MarketParams& params, int threads, bool verbose) {
    SweepSet out;
    std::shared_ptr<GameSolver> solver;
    const CaseSettings* previous = nullptr;
    for (const auto& c : kCaseSettings) {
        if (previous == nullptr || previous->grid != c.grid || previous->leader != c.leader ||
            previous->last != c.last || previous->entrant != c.entrant) {
            LocationGrid grid;
            grid.resolution = c.grid;
            SearchSettings s;
            s.leader_resolution = c.leader;
            s.last_resolution = c.last;
            s.entrant_resolution = c.entrant;
            s.threads = threads;
            s.monotone_samples = 2;
            solver = std::make_shared<GameSolver>(params, grid, s);
            out.solvers.push_back(solver);
        }
        previous = &c;
        out.label[c.n] = settings_label(c);
        Timer t;
        try {
            out.sweeps[c.n] = solver->threshold_sweep(c.n, kSweepLo, kSweepHi);
            out.next_boundary[c.n] = solver->entry_boundary(c.n, kSweepLo, kSweepHi);
        } catch (const Error& e) {
            out.error[c.n] = e.what();
        }
        out.seconds[c.n] = t.seconds();
        if (verbose) {
            detail("sweep n=" + std::to_string(c.n) + " (" + out.label[c.n] + "): " + fmt("%.1f s", out.seconds[c.n]) +
                   (out.error.count(c.n) ? " FAILED: " + out.error[c.n] : ""));
        }
    }
    return out;
}

std::vector<ResultRecord> sweep_records(const SweepSet& set) {
    std::vector<ResultRecord> records;
    for (const auto& [n, sweep] : set.sweeps) {
        for (const auto* eq : {&sweep.just_entered, &sweep.deterrence}) {
            auto r = make_record("acceptance", "threshold", n, *eq);
            r.m_enter = sweep.m_enter;
            r.m_max_deter = sweep.m_max_deter;
            r.monotone = sweep.monotone;
            records.push_back(std::move(r));
        }
    }
    return records;
}

// --- criterion 1 -----------------------------------------------------------

bool geometry_suite() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MarketParams params;
    params.market_size = 1.0;
    double worst_area = 0.0;
    std::vector<int> resolutions{64, 128, 256};
    std::vector<double> max_err(resolutions.size(), 0.0);
    std::vector<double> mean_err(resolutions.size(), 0.0);
    int configs = 0;
    while (configs < 200) {
        const int n = 2 + configs % 6;
        std::vector<Point> sites;
        for (int i = 0; i < n; ++i) sites.push_back({u(rng), u(rng)});
        Configuration config;
        try {
            config = Configuration::create(sites);
        } catch (const Error&) {
            continue;
        }
        double total = 0.0;
        for (const auto& cell : voronoi_cells(sites)) total += polygon_area(cell);
        worst_area = std::max(worst_area, std::abs(total - 1.0));
        const auto exact = demand_exact_equal_prices(config, params);
        const PriceVector equal(sites.size(), 1.0);
        for (std::size_t k = 0; k < resolutions.size(); ++k) {
            const auto grid = demand_grid(config, equal, params, ConsumerGrid{resolutions[k]});
            for (std::size_t i = 0; i < sites.size(); ++i) {
                const double e = std::abs(grid.demand[i] - exact[i]);
                max_err[k] = std::max(max_err[k], e);
                mean_err[k] += e;
            }
        }
        ++configs;
    }
    bool pass = worst_area <= 1e-9;
    detail("200 configurations, n = 2..7: largest |sum of cell areas - 1| = " + fmt("%.2e", worst_area));
    for (std::size_t k = 0; k < resolutions.size(); ++k) {
        detail("grid " + std::to_string(resolutions[k]) + ": max demand error " + fmt("%.3e", max_err[k]) +
               ", summed error " + fmt("%.3e", mean_err[k]));
    }
    for (std::size_t k = 0; k + 1 < resolutions.size(); ++k) {
        const double ratio = max_err[k] / max_err[k + 1];
        const bool ok = ratio >= 1.5 && ratio <= 2.5;
        detail("max error ratio " + std::to_string(resolutions[k]) + "/" + std::to_string(resolutions[k + 1]) + " = " +
               fmt("%.3f", ratio) + (ok ? " (within 2 +- 25%)" : " (outside 2 +- 25%)"));
        pass = pass && ok;
    }
    return pass;
}

// --- criterion 2 -----------------------------------------------------------

bool price_suite() {
    MarketParams params;
    bool pass = true;
    for (const auto& layout : testing::reference_layouts()) {
        const auto config = Configuration::create(layout.sites);
        const auto r = price_equilibrium(config, params);
        double asym = 0.0;
        if (layout.square_symmetric) {
            for (int s = 1; s < kSquareSymmetries; ++s) {
                std::vector<std::size_t> perm;
                for (const auto& p : layout.sites) {
                    const Point q = apply_symmetry(s, p);
                    for (std::size_t j = 0; j < layout.sites.size(); ++j) {
                        if (distance(q, layout.sites[j]) < 1e-12) perm.push_back(j);
                    }
                }
                if (perm.size() != layout.sites.size()) continue;
                for (std::size_t i = 0; i < perm.size(); ++i) {
                    asym = std::max(asym, std::abs(r.prices[i] - r.prices[perm[i]]));
                }
            }
        }
        const bool ok = r.converged && r.multistart_spread <= 1e-5 && r.residual <= 2e-6 && asym <= 1e-6;
        pass = pass && ok;
        detail(std::string(ok ? "ok   " : "FAIL ") + layout.name + ": spread " + fmt("%.1e", r.multistart_spread) +
               ", residual " + fmt("%.1e", r.residual) + ", asymmetry " + fmt("%.1e", asym) + ", prices " +
               show(r.prices));
    }
    return pass;
}

// --- criterion 3 -----------------------------------------------------------

struct ExpectedLayout {
    int n;
    bool just_entered;
    std::string name;
    std::vector<Point> sites;
    double tolerance;
};

bool configuration_suite(const SweepSet& set, const MarketParams& params) {
    const double third = 1.0 / 3.0;
    const std::vector<ExpectedLayout> cases = {
        {1, false, "center", {{0.5, 0.5}}, 1.0 / 32},
        {2, false, "thirds on one axis", {{third, 0.5}, {2 * third, 0.5}}, 1.0 / 36},
        {3, true, "collinear (.426,.5) (.889,.5) (.074,.5)", {{0.426, 0.5}, {0.889, 0.5}, {0.074, 0.5}}, 0.05},
        {3, false, "quarter line", {{0.25, 0.5}, {0.75, 0.5}, {0.5, 0.5}}, 1.0 / 32},
        {4, true, "corners", {{0, 0}, {1, 1}, {0, 1}, {1, 0}}, 1.0 / 32},
        {4, false, "quarter points", {{0.25, 0.25}, {0.75, 0.75}, {0.25, 0.75}, {0.75, 0.25}}, 1.0 / 32},
        {5, false, "die face", {{0.25, 0.25}, {0.75, 0.75}, {0.25, 0.75}, {0.75, 0.25}, {0.5, 0.5}}, 1.0 / 32},
        {6, true, "border: two mid-edge, four corners", {{0, 0.5}, {1, 0.5}, {0, 0}, {1, 1}, {0, 1}, {1, 0}}, 1.0 / 32},
    };
    bool pass = true;
    for (const auto& c : cases) {
        const std::string tag = "n=" + std::to_string(c.n) + (c.just_entered ? " just-entered " : " deterrence ");
        if (!set.sweeps.count(c.n)) {
            detail("FAIL " + tag + c.name + ": sweep failed (" + set.error.at(c.n) + ")");
            pass = false;
            continue;
        }
        const auto& sweep = set.sweeps.at(c.n);
        const auto& eq = c.just_entered ? sweep.just_entered : sweep.deterrence;
        const auto found = canonical_configuration(eq.configuration).locations();
        const double dev = pattern_distance(found, c.sites);
        const bool ok = dev <= c.tolerance + 1e-12;
        pass = pass && ok;
        detail(std::string(ok ? "ok   " : "FAIL ") + tag + c.name + " at M = " + fmt("%.3f", eq.market_size) + " [" +
               set.label.at(c.n) + "]");
        detail("       found " + show(found) + ", deviation " + fmt("%.4f", dev) + " (tolerance " +
               fmt("%.4f", c.tolerance) + ")");
        detail("       found profits " + show(eq.profits) + ", best entrant " + fmt("%.4f", eq.best_entrant_profit));
        if (!ok) {
            // Profit gap: the expected layout priced at the same market size.
            MarketParams at = params;
            at.market_size = eq.market_size;
            std::vector<Point> expected = c.sites;
            const auto config = Configuration::create(expected);
            const auto report = price_equilibrium(config, at);
            const auto demand = demand_rays(config, report.prices, at);
            std::vector<double> profits;
            for (std::size_t i = 0; i < expected.size(); ++i) {
                profits.push_back((report.prices[i] - at.marginal_cost) * demand.demand[i] - at.fixed_cost);
            }
            const double total_found = std::accumulate(eq.profits.begin(), eq.profits.end(), 0.0);
            const double total_expected = std::accumulate(profits.begin(), profits.end(), 0.0);
            std::string entrant;
            if (!c.just_entered) {
                const auto e = entrant_best_response(config, at, LocationGrid{kCaseSettings[c.n - 1].grid, true});
                entrant = ", best entrant against it " + fmt("%.4f", e.profit) + " at " + show({e.location});
            }
            detail("       expected layout profits " + show(profits) + ", total profit gap found - expected " +
                   fmt("%.4f", total_found - total_expected) + entrant);
        }
    }
    double small = 0.0;
    double large = 0.0;
    for (const auto& [n, s] : set.seconds) (n <= 4 ? small : large) += s;
    const bool in_budget = small < 30 * 60 && large < 2 * 3600;
    detail("sweep time n <= 4: " + fmt("%.0f s", small) + " (budget 1800 s), n = 5, 6: " + fmt("%.0f s", large) +
           " (budget 7200 s)");
    return pass && in_budget;
}

// --- criterion 4 -----------------------------------------------------------

bool ordinal_suite(const SweepSet& set) {
    bool pass = true;
    const auto check = [&](bool ok, const std::string& what) {
        pass = pass && ok;
        detail(std::string(ok ? "ok   " : "FAIL ") + what);
    };
    if (set.sweeps.count(3)) {
        const auto& p = set.sweeps.at(3).just_entered.profits;
        check(p.size() == 3 && p[0] > p[1] && p[1] >= p[2], "n=3 just-entered pi1 > pi2 >= pi3: " + show(p));
    } else {
        check(false, "n=3 sweep missing");
    }
    if (set.sweeps.count(5)) {
        const auto& p = set.sweeps.at(5).deterrence.profits;
        check(p.size() == 5 && p[4] < *std::min_element(p.begin(), p.begin() + 4),
              "n=5 deterrence pi5 < min(pi1..pi4): " + show(p));
    } else {
        check(false, "n=5 sweep missing");
    }
    if (set.sweeps.count(6)) {
        const auto& d = set.sweeps.at(6).deterrence.profits;
        const auto& j = set.sweeps.at(6).just_entered.profits;
        bool ok = d.size() == 6 && j.size() == 6;
        for (std::size_t i = 2; ok && i < 6; ++i) ok = d[i] > j[i];
        check(ok, "n=6 firms 3-6 earn more under deterrence: deterrence " + show(d) + " vs just-entered " + show(j));
    } else {
        check(false, "n=6 sweep missing");
    }
    return pass;
}

// --- criterion 5 -----------------------------------------------------------

bool welfare_suite(const SweepSet& set, const MarketParams& params) {
    bool pass = true;
    MarketParams unit = params;
    unit.market_size = 1.0;
    for (int n = 2; n <= 4; ++n) {
        if (!set.sweeps.count(n)) {
            detail("FAIL n=" + std::to_string(n) + ": sweep missing");
            pass = false;
            continue;
        }
        const auto& sweep = set.sweeps.at(n);
        // Per unit market size: the two regimes sit at different M.
        const double deter = social_cost(sweep.deterrence.configuration, unit).cost;
        const double just = social_cost(sweep.just_entered.configuration, unit).cost;
        SocialOptimumOptions options;
        options.warm_starts = {sweep.deterrence.configuration, sweep.just_entered.configuration};
        const auto opt = social_optimum(n, unit, options);
        const bool ordered = deter < just;
        const bool near = opt.best_cost >= 0.99 * deter && opt.best_cost <= 1.01 * deter;
        pass = pass && ordered && near;
        detail(std::string(ordered ? "ok   " : "FAIL ") + "n=" + std::to_string(n) + " cost per unit M: deterrence " +
               fmt("%.6f", deter) + " < just-entered " + fmt("%.6f", just));
        detail(std::string(near ? "ok   " : "FAIL ") + "n=" + std::to_string(n) + " best found optimum " +
               fmt("%.6f", opt.best_cost) + " at " + show(opt.configuration.locations()) + ", gap to deterrence " +
               fmt("%+.2f%%", 100.0 * (opt.best_cost - deter) / deter) + ", local optimum spread " +
               fmt("%.4f", opt.worst_local_cost - opt.best_cost));
    }
    return pass;
}

// --- criterion 6 -----------------------------------------------------------

bool threshold_suite(const SweepSet& set) {
    bool pass = true;
    std::vector<double> enter;
    double small_seconds = 0.0;
    for (int n = 1; n <= 5; ++n) {
        if (!set.sweeps.count(n) || !set.next_boundary.count(n)) {
            detail("FAIL n=" + std::to_string(n) + ": sweep missing");
            pass = false;
            continue;
        }
        const auto& s = set.sweeps.at(n);
        const auto& next = set.next_boundary.at(n);
        const double m_enter_next = next.above;
        const bool tight = next.above / next.below - 1.0 <= 1e-3 + 1e-12 && s.m_max_deter == next.below;
        const bool ok = s.monotone && next.monotone && s.m_enter <= s.m_max_deter && s.m_max_deter < m_enter_next &&
                        s.m_enter < m_enter_next && tight;
        pass = pass && ok;
        enter.push_back(s.m_enter);
        if (n <= 4) small_seconds += set.seconds.at(n);
        detail(std::string(ok ? "ok   " : "FAIL ") + "n=" + std::to_string(n) + ": M_enter " + fmt("%.3f", s.m_enter) +
               " <= M_max_deter " + fmt("%.3f", s.m_max_deter) + " < M_enter(n+1) " + fmt("%.3f", m_enter_next) +
               ", bracket " + fmt("%.1e", next.above / next.below - 1.0) + (s.monotone ? "" : ", NOT monotone") +
               " [" + set.label.at(n) + "]");
    }
    bool increasing = enter.size() == 5;
    for (std::size_t i = 1; increasing && i < enter.size(); ++i) increasing = enter[i] > enter[i - 1];
    detail(std::string(increasing ? "ok   " : "FAIL ") + "M_enter(1..5) strictly increasing: " + show(enter));
    detail("sweep time n <= 4: " + fmt("%.0f s", small_seconds) + " (budget 3600 s)");
    return pass && increasing && small_seconds < 3600;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    std::string results_path = "acceptance_results.json";
    int threads = 1;
    app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 7));
    app.add_option("--results", results_path, "where to write the threshold records");
    app.add_option("--threads", threads, "solver threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    const auto wanted = [&](int id) { return only.empty() || std::count(only.begin(), only.end(), id) > 0; };

    const MarketParams params;
    std::vector<Outcome> outcomes;
    const auto run = [&](int id, const std::string& title, const std::function<bool()>& body) {
        if (!wanted(id)) return;
        std::printf("criterion %d: %s\n", id, title.c_str());
        Timer t;
        bool pass = false;
        try {
            pass = body();
        } catch (const std::exception& e) {
            detail(std::string("FAIL exception: ") + e.what());
        }
        outcomes.push_back({id, title, pass, t.seconds()});
    };

    run(1, "geometry oracle suite", [] {
        Timer t;
        const bool ok = geometry_suite();
        detail("runtime " + fmt("%.1f s", t.seconds()) + " (budget 60 s)");
        return ok && t.seconds() < 60;
    });
    run(2, "price equilibrium on the reference layouts", [] {
        Timer t;
        const bool ok = price_suite();
        detail("runtime " + fmt("%.1f s", t.seconds()) + " (budget 300 s)");
        return ok && t.seconds() < 300;
    });

    const bool need_sweeps = wanted(3) || wanted(4) || wanted(5) || wanted(6) || wanted(7);
    SweepSet sweeps;
    if (need_sweeps) {
        std::printf("threshold sweeps for n = 1..6\n");
        sweeps = run_sweeps(params, threads, true);
        const auto text = records_to_json(sweep_records(sweeps));
        std::ofstream(results_path, std::ios::binary) << text;
        detail("records written to " + results_path);
    }
    run(3, "configuration reproduction", [&] { return configuration_suite(sweeps, params); });
    run(4, "ordinal profit properties", [&] { return ordinal_suite(sweeps); });
    run(5, "social optimality", [&] {
        Timer t;
        const bool ok = welfare_suite(sweeps, params);
        detail("runtime " + fmt("%.1f s", t.seconds()) + " (budget 600 s)");
        return ok && t.seconds() < 600;
    });
    run(6, "threshold structure", [&] { return threshold_suite(sweeps); });
    run(7, "determinism", [&] {
        const auto first = records_to_json(sweep_records(sweeps));
        const auto again = records_to_json(sweep_records(run_sweeps(params, threads, false)));
        detail("second full sweep run with fresh solvers: " + std::to_string(again.size()) + " bytes, " +
               (first == again ? "identical" : "DIFFERENT"));
        const auto config = parse_scenario("id = \"det\"\n[solve]\nn_max = 2\nmarket_sizes = [150, 300]\n"
                                           "thresholds = true\n[grids]\nlocation_resolution = 17\n");
        const bool scenario_same =
            records_to_json(run_scenario(config).records) == records_to_json(run_scenario(config).records);
        detail(std::string("scenario rerun: ") + (scenario_same ? "identical" : "DIFFERENT"));
        return first == again && scenario_same;
    });

    std::printf("\nsummary\n");
    bool all = true;
    for (const auto& o : outcomes) {
        std::printf("%s criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", o.id, o.title.c_str(), o.seconds);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
