#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hotelling/error.hpp"
#include "hotelling/geometry.hpp"

using namespace hotelling;

namespace {

std::vector<Point> random_sites(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> sites;
    while (static_cast<int>(sites.size()) < n) {
        Point p{u(rng), u(rng)};
        bool clash = false;
        for (const auto& q : sites) clash = clash || distance(p, q) < 1e-6;
        if (!clash) sites.push_back(p);
    }
    return sites;
}

// Midpoint-rule oracle on an m x m lattice over the unit square.
double grid_distance_oracle(Point site, int m) {
    const double h = 1.0 / m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        double row = 0.0;
        for (int k = 0; k < m; ++k) {
            row += std::hypot((j + 0.5) * h - site.x1, (k + 0.5) * h - site.x2);
        }
        acc += row;
    }
    return acc * h * h;
}

std::size_t nearest(const std::vector<Point>& sites, Point x) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < sites.size(); ++i) {
        if (distance(sites[i], x) < distance(sites[best], x)) best = i;
    }
    return best;
}

}  // namespace

TEST_CASE("single site owns the whole square") {
    const std::vector<Point> sites{{0.5, 0.5}};
    const auto cells = voronoi_cells(sites);
    REQUIRE(cells.size() == 1);
    CHECK(polygon_area(cells[0]) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cells[0].owner == 0);
}

TEST_CASE("two mirrored sites split at x1 = 1/2") {
    const std::vector<Point> sites{{0.25, 0.5}, {0.75, 0.5}};
    const auto cells = voronoi_cells(sites);
    CHECK(polygon_area(cells[0]) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(polygon_area(cells[1]) == doctest::Approx(0.5).epsilon(1e-14));
    for (const auto& v : cells[0].vertices) CHECK(v.x1 <= 0.5 + 1e-15);
}

TEST_CASE("three collinear firms give vertical strips at the bisectors") {
    const std::vector<Point> sites{{0.426, 0.5}, {0.889, 0.5}, {0.074, 0.5}};
    const auto cells = voronoi_cells(sites);
    // bisector abscissae (0.074 + 0.426) / 2 = 0.25 and (0.426 + 0.889) / 2 = 0.6575
    const double expected[] = {0.6575 - 0.25, 1.0 - 0.6575, 0.25};
    for (int i = 0; i < 3; ++i) {
        CHECK(polygon_area(cells[i]) == doctest::Approx(expected[i]).epsilon(1e-12));
    }
    // nearest-site count on a 1000 x 1000 lattice
    const int m = 1000;
    double counts[3] = {0, 0, 0};
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
            counts[nearest(sites, {(j + 0.5) / m, (k + 0.5) / m})] += 1.0;
        }
    }
    for (int i = 0; i < 3; ++i) CHECK(counts[i] / (m * m) == doctest::Approx(expected[i]).epsilon(2e-3));
    CHECK(polygon_area(cells[2]) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("polygon area of simple shapes") {
    CHECK(polygon_area(unit_square()) == doctest::Approx(1.0));
    Polygon tri{{{0, 0}, {1, 0}, {0, 1}}, std::nullopt};
    CHECK(polygon_area(tri) == doctest::Approx(0.5));
    Polygon cw{{{0, 0}, {0, 1}, {1, 0}}, std::nullopt};
    CHECK(polygon_area(cw) == doctest::Approx(0.5));
    CHECK(signed_area(cw) < 0.0);
}

TEST_CASE("degenerate polygons are flagged with zero area") {
    Polygon two{{{0, 0}, {1, 1}}, std::nullopt};
    CHECK(is_degenerate(two));
    CHECK(polygon_area(two) == 0.0);
    Polygon repeated{{{0.2, 0.2}, {0.2, 0.2}, {0.7, 0.1}, {0.7, 0.1}}, std::nullopt};
    CHECK(is_degenerate(repeated));
    CHECK(polygon_area(repeated) == 0.0);
    CHECK(distance_integral(two, {0, 0}) == 0.0);
}

TEST_CASE("invalid site sets are rejected") {
    const std::vector<Point> dup{{0.3, 0.3}, {0.3, 0.3}};
    CHECK_THROWS_AS(voronoi_cells(dup), Error);
    try {
        voronoi_cells(dup);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::duplicate_sites);
    }
    const std::vector<Point> outside{{0.3, 0.3}, {1.2, 0.3}};
    try {
        voronoi_cells(outside);
        FAIL("expected OutOfDomain");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::out_of_domain);
    }
    CHECK_THROWS_AS(voronoi_cells(std::vector<Point>{}), Error);
}

TEST_CASE("distance integral over the unit square") {
    const double closed = (std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 6.0;
    const double center = distance_integral(unit_square(), {0.5, 0.5});
    const double corner = distance_integral(unit_square(), {0.0, 0.0});
    // ~10^7-point midpoint lattices
    const double center_oracle = grid_distance_oracle({0.5, 0.5}, 3162);
    const double corner_oracle = grid_distance_oracle({0.0, 0.0}, 3162);
    CHECK(center == doctest::Approx(0.38260).epsilon(1e-5));
    CHECK(corner == doctest::Approx(0.76520).epsilon(1e-5));
    CHECK(center == doctest::Approx(center_oracle).epsilon(1e-6));
    CHECK(corner == doctest::Approx(corner_oracle).epsilon(1e-6));
    CHECK(center == doctest::Approx(closed).epsilon(1e-12));
}

TEST_CASE("distance integral for a site outside the polygon") {
    Polygon left{{{0, 0}, {0.5, 0}, {0.5, 1}, {0, 1}}, std::nullopt};
    const Point site{0.8, 0.3};
    const int m = 2000;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
            acc += std::hypot((j + 0.5) * 0.5 / m - site.x1, (k + 0.5) / m - site.x2);
        }
    }
    acc *= 0.5 / (static_cast<double>(m) * m);
    CHECK(distance_integral(left, site) == doctest::Approx(acc).epsilon(1e-6));
}

TEST_CASE("tiling, containment and nearest-site properties on random sites") {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial % 16;
        const auto sites = random_sites(rng, n);
        const auto cells = voronoi_cells(sites);
        double total = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            total += polygon_area(cells[i]);
            CHECK(contains(cells[i], sites[i]));
            CHECK(signed_area(cells[i]) > 0.0);
            for (const auto& v : cells[i].vertices) CHECK(in_unit_square(v, 1e-12));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto sites = random_sites(rng, 9);
    const auto cells = voronoi_cells(sites);
    for (int s = 0; s < 10000; ++s) {
        const Point x{u(rng), u(rng)};
        const double best = distance(sites[nearest(sites, x)], x);
        bool found = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (contains(cells[i], x)) {
                CHECK(distance(sites[i], x) <= best + 1e-9);
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("distance integral is monotone under inclusion and converged under refinement") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto sites = random_sites(rng, 2 + trial % 6);
        const auto cells = voronoi_cells(sites);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const double base = distance_integral(cells[i], sites[i]);
            const double fine = distance_integral(cells[i], sites[i], 2 * kDefaultDistanceRule);
            CHECK(std::abs(base - fine) <= 1e-6 * std::max(fine, 1e-12));
            // clip the cell by an extra half-plane through a random point
            const Point n{u(rng) - 0.5, u(rng) - 0.5};
            const Point c = centroid(cells[i]);
            const Polygon sub = clip_half_plane(cells[i], n, n.x1 * c.x1 + n.x2 * c.x2);
            CHECK(distance_integral(sub, sites[i]) <= base + 1e-12);
        }
    }
}

TEST_CASE("square symmetries form a group action on the square") {
    const Point p{0.2, 0.7};
    for (int s = 0; s < kSquareSymmetries; ++s) {
        const Point q = apply_symmetry(s, p);
        CHECK(in_unit_square(q));
        CHECK(distance(apply_symmetry(s, {0.5, 0.5}), Point{0.5, 0.5}) == 0.0);
    }
    CHECK(apply_symmetry(0, p) == p);
}

namespace {

// Exact integral of the distance over a polygon: for the triangle spanned by the
// site and an edge at perpendicular distance h, int rho^3 / 3 dphi with
// rho = h / cos(phi) has the antiderivative h^3 / 6 (tau sqrt(1 + tau^2) + asinh tau).
double closed_form_distance_integral(const Polygon& poly, Point site) {
    const auto& v = poly.vertices;
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % v.size()];
        const double len = distance(a, b);
        if (len == 0.0) continue;
        const double ux = (b.x1 - a.x1) / len;
        const double uy = (b.x2 - a.x2) / len;
        // signed distance from the edge line to the site (positive when inside)
        const double h = ux * (site.x2 - a.x2) - uy * (site.x1 - a.x1);
        if (h == 0.0) continue;
        const double sa = (a.x1 - site.x1) * ux + (a.x2 - site.x2) * uy;
        const double sb = sa + len;
        const double ah = std::abs(h);
        const auto g = [&](double s) {
            return s * std::hypot(ah, s) * ah + ah * ah * ah * std::asinh(s / ah);
        };
        total += (h > 0 ? 1.0 : -1.0) * (g(sb) - g(sa)) / 6.0;
    }
    return total;
}

}  // namespace

TEST_CASE("distance integral agrees with the exact triangle formula") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto sites = random_sites(rng, 1 + trial % 9);
        const auto cells = voronoi_cells(sites);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const double exact = closed_form_distance_integral(cells[i], sites[i]);
            CHECK(distance_integral(cells[i], sites[i]) == doctest::Approx(exact).epsilon(1e-10));
            const Point elsewhere{u(rng), u(rng)};
            CHECK(distance_integral(cells[i], elsewhere) ==
                  doctest::Approx(closed_form_distance_integral(cells[i], elsewhere)).epsilon(1e-10));
        }
    }
}
