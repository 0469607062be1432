#pragma once

#include <optional>
#include <span>
#include <vector>

namespace hotelling {

// A location in the unit square, either a consumer type or a firm.
struct Point {
    double x1 = 0.0;
    double x2 = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline constexpr double kBoundaryTolerance = 1e-9;
inline constexpr double kDuplicateTolerance = 1e-12;

bool in_unit_square(Point p, double tol = 0.0) noexcept;
double distance(Point a, Point b) noexcept;

// Convex polygon, vertices counterclockwise.
struct Polygon {
    std::vector<Point> vertices;
    std::optional<int> owner;
};

Polygon unit_square();

// Clip a convex polygon against the half-plane {x : n.x <= offset}.
Polygon clip_half_plane(const Polygon& poly, Point normal, double offset);

// Market areas of equally priced firms: cell i holds every point of the unit
// square at least as close to sites[i] as to any other site.
// Throws Error(duplicate_sites | out_of_domain | invalid_argument).
std::vector<Polygon> voronoi_cells(std::span<const Point> sites);

// Fewer than three distinct vertices.
bool is_degenerate(const Polygon& poly) noexcept;

// Shoelace area; 0 for degenerate polygons.
double polygon_area(const Polygon& poly) noexcept;
double signed_area(const Polygon& poly) noexcept;
Point centroid(const Polygon& poly) noexcept;

// Point-in-convex-polygon with absolute tolerance on the edge tests.
bool contains(const Polygon& poly, Point p, double tol = kBoundaryTolerance) noexcept;

inline constexpr int kDefaultDistanceRule = 16;

// Integral of ||site - x|| over the polygon. The polygon is fanned into signed
// triangles from the site, which puts the cone tip on every triangle's apex
// (sites outside the polygon work the same way, the signs cancel the excess).
// The radial direction integrates exactly; along each edge, split at the foot
// of the perpendicular from the site, a Gauss-Legendre rule of the given order
// is applied on adaptively halved panels.
double distance_integral(const Polygon& poly, Point site,
                         int rule_order = kDefaultDistanceRule);

// The 8 symmetries of the unit square, indexed 0..7 (0 is the identity).
Point apply_symmetry(int symmetry, Point p) noexcept;
inline constexpr int kSquareSymmetries = 8;

}  // namespace hotelling
