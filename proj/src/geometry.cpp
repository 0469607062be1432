#include "hotelling/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hotelling/error.hpp"
#include "hotelling/quadrature.hpp"

namespace hotelling {
namespace {

constexpr double kVertexMergeTolerance = 1e-14;

double cross(Point o, Point a, Point b) noexcept {
    return (a.x1 - o.x1) * (b.x2 - o.x2) - (a.x2 - o.x2) * (b.x1 - o.x1);
}

std::string format_point(Point p) {
    return "(" + std::to_string(p.x1) + ", " + std::to_string(p.x2) + ")";
}

// Integral of f over the triangle (apex, a, b) in collapsed coordinates
// x = apex + u * ((1 - v) (a - apex) + v (b - apex)).
template <class F>
double gauss_panel(F&& f, double lo, double hi, const GaussRule& rule) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
    }
    return half * sum;
}

// Panel-halving Gauss-Legendre; stops when a panel and its two halves agree.
template <class F>
double adaptive_gauss(F&& f, double lo, double hi, const GaussRule& rule, double scale,
                      double whole = std::numeric_limits<double>::quiet_NaN(), int depth = 0) {
    if (std::isnan(whole)) whole = gauss_panel(f, lo, hi, rule);
    const double mid = 0.5 * (lo + hi);
    const double left = gauss_panel(f, lo, mid, rule);
    const double right = gauss_panel(f, mid, hi, rule);
    if (depth >= 40 || std::abs(left + right - whole) <= 1e-14 * scale * (hi - lo + 1e-3)) {
        return left + right;
    }
    return adaptive_gauss(f, lo, mid, rule, scale, left, depth + 1) +
           adaptive_gauss(f, mid, hi, rule, scale, right, depth + 1);
}

}  // namespace

bool in_unit_square(Point p, double tol) noexcept {
    return p.x1 >= -tol && p.x1 <= 1.0 + tol && p.x2 >= -tol && p.x2 <= 1.0 + tol;
}

double distance(Point a, Point b) noexcept {
    return std::hypot(a.x1 - b.x1, a.x2 - b.x2);
}

Polygon unit_square() {
    return Polygon{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}, std::nullopt};
}

Polygon clip_half_plane(const Polygon& poly, Point normal, double offset) {
    Polygon out;
    out.owner = poly.owner;
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    if (n == 0) return out;
    auto side = [&](Point p) { return normal.x1 * p.x1 + normal.x2 * p.x2 - offset; };
    auto push = [&](Point p) {
        if (!out.vertices.empty()) {
            const Point& last = out.vertices.back();
            if (std::abs(last.x1 - p.x1) <= kVertexMergeTolerance &&
                std::abs(last.x2 - p.x2) <= kVertexMergeTolerance) {
                return;
            }
        }
        out.vertices.push_back(p);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const Point cur = v[i];
        const Point next = v[(i + 1) % n];
        const double sc = side(cur);
        const double sn = side(next);
        if (sc <= 0.0) push(cur);
        if ((sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0)) {
            const double t = sc / (sc - sn);
            push(Point{cur.x1 + t * (next.x1 - cur.x1), cur.x2 + t * (next.x2 - cur.x2)});
        }
    }
    if (out.vertices.size() > 1) {
        const Point& first = out.vertices.front();
        const Point& last = out.vertices.back();
        if (std::abs(last.x1 - first.x1) <= kVertexMergeTolerance &&
            std::abs(last.x2 - first.x2) <= kVertexMergeTolerance) {
            out.vertices.pop_back();
        }
    }
    return out;
}

std::vector<Polygon> voronoi_cells(std::span<const Point> sites) {
    if (sites.empty()) {
        throw Error(ErrorCode::invalid_argument, "voronoi_cells: no sites");
    }
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (!in_unit_square(sites[i])) {
            throw Error(ErrorCode::out_of_domain,
                        "site " + std::to_string(i) + " " + format_point(sites[i]) +
                            " lies outside the unit square");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (distance(sites[i], sites[j]) <= kDuplicateTolerance) {
                throw Error(ErrorCode::duplicate_sites,
                            "sites " + std::to_string(j) + " and " + std::to_string(i) +
                                " coincide at " + format_point(sites[i]));
            }
        }
    }
    std::vector<Polygon> cells;
    cells.reserve(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        Polygon cell = unit_square();
        cell.owner = static_cast<int>(i);
        const Point si = sites[i];
        for (std::size_t j = 0; j < sites.size() && !cell.vertices.empty(); ++j) {
            if (j == i) continue;
            const Point sj = sites[j];
            const Point normal{sj.x1 - si.x1, sj.x2 - si.x2};
            const double offset =
                0.5 * ((sj.x1 * sj.x1 + sj.x2 * sj.x2) - (si.x1 * si.x1 + si.x2 * si.x2));
            cell = clip_half_plane(cell, normal, offset);
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

bool is_degenerate(const Polygon& poly) noexcept {
    const auto& v = poly.vertices;
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < v.size() && distinct < 3; ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) {
            if (v[i] == v[j]) {
                seen = true;
                break;
            }
        }
        if (!seen) ++distinct;
    }
    return distinct < 3;
}

double signed_area(const Polygon& poly) noexcept {
    const auto& v = poly.vertices;
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % v.size()];
        acc += a.x1 * b.x2 - b.x1 * a.x2;
    }
    return 0.5 * acc;
}

double polygon_area(const Polygon& poly) noexcept {
    if (is_degenerate(poly)) return 0.0;
    return std::abs(signed_area(poly));
}

Point centroid(const Polygon& poly) noexcept {
    const auto& v = poly.vertices;
    if (v.empty()) return {};
    const double area = signed_area(poly);
    if (std::abs(area) < 1e-300) {
        Point mean{};
        for (const auto& p : v) {
            mean.x1 += p.x1;
            mean.x2 += p.x2;
        }
        return {mean.x1 / v.size(), mean.x2 / v.size()};
    }
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % v.size()];
        const double w = a.x1 * b.x2 - b.x1 * a.x2;
        cx += (a.x1 + b.x1) * w;
        cy += (a.x2 + b.x2) * w;
    }
    return {cx / (6.0 * area), cy / (6.0 * area)};
}

bool contains(const Polygon& poly, Point p, double tol) noexcept {
    const auto& v = poly.vertices;
    if (v.size() < 3) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % v.size()];
        const double len = distance(a, b);
        if (len == 0.0) continue;
        if (cross(a, b, p) / len < -tol) return false;
    }
    return true;
}

double distance_integral(const Polygon& poly, Point site, int rule_order) {
    if (is_degenerate(poly)) return 0.0;
    const GaussRule& rule = gauss_legendre(rule_order);
    const auto& v = poly.vertices;
    const double orientation = signed_area(poly) < 0.0 ? -1.0 : 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % v.size()];
        const double det = cross(site, a, b);
        if (det == 0.0) continue;
        // Signed triangle (site, a, b). With the cone tip on the apex the
        // radial integral is exact: det / 3 * int_0^1 |a + t (b - a) - site| dt.
        const Point ea{a.x1 - site.x1, a.x2 - site.x2};
        const Point eb{b.x1 - site.x1, b.x2 - site.x2};
        const auto reach = [&](double t) {
            return std::hypot(ea.x1 + t * (eb.x1 - ea.x1), ea.x2 + t * (eb.x2 - ea.x2));
        };
        const double dx = eb.x1 - ea.x1;
        const double dy = eb.x2 - ea.x2;
        const double foot = std::clamp(-(ea.x1 * dx + ea.x2 * dy) / (dx * dx + dy * dy), 0.0, 1.0);
        const double scale = std::max(std::hypot(ea.x1, ea.x2), std::hypot(eb.x1, eb.x2));
        double edge = 0.0;
        if (foot > 0.0) edge += adaptive_gauss(reach, 0.0, foot, rule, scale);
        if (foot < 1.0) edge += adaptive_gauss(reach, foot, 1.0, rule, scale);
        total += det * edge / 3.0;
    }
    return orientation * total;
}

Point apply_symmetry(int symmetry, Point p) noexcept {
    switch (symmetry & 7) {
        case 0: return {p.x1, p.x2};
        case 1: return {1.0 - p.x1, p.x2};
        case 2: return {p.x1, 1.0 - p.x2};
        case 3: return {1.0 - p.x1, 1.0 - p.x2};
        case 4: return {p.x2, p.x1};
        case 5: return {1.0 - p.x2, p.x1};
        case 6: return {p.x2, 1.0 - p.x1};
        default: return {1.0 - p.x2, 1.0 - p.x1};
    }
}

}  // namespace hotelling
