#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bellbox/bell.hpp"
#include "bellbox/box.hpp"
#include "bellbox/rng.hpp"

namespace bellbox {

// Ball of moment vectors, optionally intersected with the cube [-1,1]^3.
// State spaces are always clipped: outcome probabilities bound every
// moment component by 1 in magnitude.
struct BallSpec {
    double radius = 1.0;
    bool clipped = true;

    bool contains(const MomentVector& m, double tol = 1e-9) const {
        if (clipped) {
            if (std::abs(m.x) > 1.0 + tol || std::abs(m.y) > 1.0 + tol ||
                std::abs(m.z) > 1.0 + tol)
                return false;
        }
        return m.norm2() <= radius * radius + tol;
    }

    static BallSpec for_family(const MeasurementFamily& family) {
        return {family.ball_radius(), true};
    }
};

inline bool ball_contains(const BallSpec& spec, const MomentVector& m, double tol = 1e-9) {
    return spec.contains(m, tol);
}

// Cube of moment vectors with vertices (+-l, +-l, +-h).
struct CuboidSpec {
    double l = 0.0;
    double h = 0.0;
};

// Grid of boolean feasibility samples over 2 or 3 named axes. Values are
// stored row-major in the axis order, i.e. lexicographic in grid indices.
struct FeasibilityRegion {
    std::vector<std::string> axis_names;
    std::vector<std::vector<double>> axis_coords;
    std::string params;
    std::vector<std::uint8_t> values;

    std::size_t size() const { return values.size(); }

    std::size_t flat_index(const std::vector<std::size_t>& idx) const {
        std::size_t flat = 0;
        for (std::size_t d = 0; d < axis_coords.size(); ++d)
            flat = flat * axis_coords[d].size() + idx[d];
        return flat;
    }

    void write_csv(std::ostream& out) const;
};

namespace detail {

inline std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Evenly spaced lattice over [lo, hi] including both endpoints.
inline std::vector<double> lattice(double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("grid size must be at least 2");
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pts[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) /
                                                    static_cast<double>(n - 1);
    return pts;
}

// Runs fn(i) for i in [0, n) over `workers` threads, chunked by index so
// the result layout never depends on the worker count.
template <typename Fn>
inline void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t w = static_cast<std::size_t>(workers);
    std::vector<std::thread> threads;
    threads.reserve(w);
    std::size_t chunk = (n + w - 1) / w;
    for (std::size_t t = 0; t < w; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn]() {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

}  // namespace detail

inline void FeasibilityRegion::write_csv(std::ostream& out) const {
    out << "# axes: ";
    for (std::size_t d = 0; d < axis_names.size(); ++d) {
        if (d) out << ",";
        out << axis_names[d];
    }
    out << "; params: " << params << "\n";
    const std::size_t dims = axis_coords.size();
    std::vector<std::size_t> idx(dims, 0);
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        for (std::size_t d = 0; d < dims; ++d) {
            out << detail::format_coord(axis_coords[d][idx[d]]) << ",";
        }
        out << int(values[flat]) << "\n";
        for (std::size_t d = dims; d-- > 0;) {
            if (++idx[d] < axis_coords[d].size()) break;
            idx[d] = 0;
        }
    }
}

struct BallEquivalenceReport {
    int grid_n = 0;
    long long points = 0;
    long long disagreements = 0;          // sign(p4) vs ball verdict mismatches
    long long disagreements_beyond_tol = 0;
    double max_abs_p4_at_disagreement = 0.0;
    bool pass = false;
};

// Sweeps (p_X, p_Y, p_Z) over a grid_n^3 lattice in [0,1]^3 and compares
// the sign of the product-state fourth-outcome quadratic against unit-ball
// membership of the canonical moments. The two predicates agree except
// possibly within the boundary tolerance.
inline BallEquivalenceReport ball_equivalence_check(int grid_n, double tol = 1e-9) {
    if (grid_n < 2) throw std::invalid_argument("ball_equivalence_check: grid_n must be >= 2");
    const std::vector<double> pts = detail::lattice(0.0, 1.0, grid_n);
    const BallSpec unit_ball{1.0, true};
    BallEquivalenceReport report;
    report.grid_n = grid_n;
    for (double px : pts) {
        for (double py : pts) {
            for (double pz : pts) {
                ++report.points;
                LocalState s{px, py, pz};
                double p4 = p4_product(s);
                bool quad_ok = p4 >= 0.0;
                bool ball_ok = unit_ball.contains(moments_from_local(s), tol);
                if (quad_ok != ball_ok) {
                    ++report.disagreements;
                    double mag = std::abs(p4);
                    report.max_abs_p4_at_disagreement =
                        std::max(report.max_abs_p4_at_disagreement, mag);
                    if (mag > tol) ++report.disagreements_beyond_tol;
                }
            }
        }
    }
    report.pass = report.disagreements_beyond_tol == 0 &&
                  report.max_abs_p4_at_disagreement <= tol;
    return report;
}

// Uniform sample from the clipped ball: random direction scaled by
// radius * u^(1/3), redrawn while it sticks out of the moment cube.
inline MomentVector sample_clipped_ball(Rng& rng, double radius) {
    while (true) {
        std::array<double, 3> dir = rng.unit_vector3();
        double r = radius * std::cbrt(rng.uniform01());
        MomentVector m{r * dir[0], r * dir[1], r * dir[2]};
        if (std::abs(m.x) <= 1.0 && std::abs(m.y) <= 1.0 && std::abs(m.z) <= 1.0) return m;
    }
}

struct TightnessReport {
    double min_value = std::numeric_limits<double>::infinity();
    int worst_outcome = 0;
    MomentVector worst_a;
    MomentVector worst_b;
    long long trials = 0;
    bool pass = false;
};

// Samples pairs of states from the family ball and evaluates all four
// outcome values; the minimum over the sample must stay above -1e-12,
// which is the numerical statement that the ball constraints are tight
// but never violated from inside.
inline TightnessReport tightness_check(const MeasurementFamily& family, long long trials,
                                       std::uint64_t seed) {
    if (family.kind == MeasurementFamily::Kind::NonMax)
        throw std::invalid_argument("tightness_check applies to ideal/noisy families");
    const double radius = family.ball_radius();
    const OperatorSet ops = operator_set(family);
    Rng rng(seed);
    TightnessReport report;
    report.trials = trials;
    for (long long i = 0; i < trials; ++i) {
        MomentVector a = sample_clipped_ball(rng, radius);
        MomentVector b = sample_clipped_ball(rng, radius);
        for (int k = 1; k <= 4; ++k) {
            double v = outcome_value(ops, k, a, b);
            if (v < report.min_value) {
                report.min_value = v;
                report.worst_outcome = k;
                report.worst_a = a;
                report.worst_b = b;
            }
        }
    }
    report.pass = report.min_value >= -1e-12;
    return report;
}

// Feasibility grid over (p_X, p_Y, p_Z): a lattice point is feasible iff
// its canonical moments lie in the clipped ball of radius 1/sqrt(1-lambda).
inline FeasibilityRegion scan_local_region(double lambda, int grid_n, int workers = 1,
                                           double tol = 1e-9) {
    if (lambda < 0.0 || lambda >= 1.0)
        throw std::invalid_argument("scan_local_region requires 0 <= lambda < 1");
    const BallSpec ball = BallSpec::for_family(MeasurementFamily::noisy(lambda));
    FeasibilityRegion region;
    region.axis_names = {"p_x", "p_y", "p_z"};
    const std::vector<double> pts = detail::lattice(0.0, 1.0, grid_n);
    region.axis_coords = {pts, pts, pts};
    region.params = "lambda=" + detail::format_coord(lambda) +
                    ", grid=" + std::to_string(grid_n);
    const std::size_t n = pts.size();
    region.values.assign(n * n * n, 0);
    detail::parallel_for(n * n * n, workers, [&](std::size_t flat) {
        std::size_t iz = flat % n;
        std::size_t iy = (flat / n) % n;
        std::size_t ix = flat / (n * n);
        LocalState s{pts[ix], pts[iy], pts[iz]};
        region.values[flat] = ball.contains(moments_from_local(s), tol) ? 1 : 0;
    });
    return region;
}

// 2-D slice of the scan above at fixed p_Z.
inline FeasibilityRegion scan_local_slice(double lambda, int grid_n, double pz, int workers = 1,
                                          double tol = 1e-9) {
    if (lambda < 0.0 || lambda >= 1.0)
        throw std::invalid_argument("scan_local_slice requires 0 <= lambda < 1");
    if (pz < 0.0 || pz > 1.0)
        throw std::invalid_argument("scan_local_slice requires 0 <= slice <= 1");
    const BallSpec ball = BallSpec::for_family(MeasurementFamily::noisy(lambda));
    FeasibilityRegion region;
    region.axis_names = {"p_x", "p_y"};
    const std::vector<double> pts = detail::lattice(0.0, 1.0, grid_n);
    region.axis_coords = {pts, pts};
    region.params = "lambda=" + detail::format_coord(lambda) + ", grid=" + std::to_string(grid_n) +
                    ", p_z=" + detail::format_coord(pz);
    const std::size_t n = pts.size();
    region.values.assign(n * n, 0);
    detail::parallel_for(n * n, workers, [&](std::size_t flat) {
        std::size_t iy = flat % n;
        std::size_t ix = flat / n;
        LocalState s{pts[ix], pts[iy], pz};
        region.values[flat] = ball.contains(moments_from_local(s), tol) ? 1 : 0;
    });
    return region;
}

// A cube with vertices (+-l, +-l, +-h) is an admissible local state space
// iff every ordered pair of its vertices gives nonnegative values on all
// four outcomes. Bilinearity of the outcome forms makes vertex pairs
// sufficient.
inline bool cuboid_feasible(const MeasurementFamily& family, const CuboidSpec& spec,
                            double tol = 1e-9) {
    if (family.kind == MeasurementFamily::Kind::NoisyBell)
        throw std::invalid_argument("cuboid_feasible applies to nonmax families (ideal = alpha 0)");
    const MeasurementFamily f = family.kind == MeasurementFamily::Kind::IdealBell
                                    ? MeasurementFamily::nonmax(0.0)
                                    : family;
    const OperatorSet ops = operator_set(f);
    std::array<MomentVector, 8> verts;
    int n = 0;
    for (int sx : {1, -1})
        for (int sy : {1, -1})
            for (int sz : {1, -1}) verts[n++] = {sx * spec.l, sy * spec.l, sz * spec.h};
    for (const MomentVector& va : verts)
        for (const MomentVector& vb : verts)
            for (int k = 1; k <= 4; ++k)
                if (outcome_value(ops, k, va, vb) < -tol) return false;
    return true;
}

// Feasibility grid over (h, l) in [0,1]^2 for the nonmax family at the
// given basis angle. Axis order matches the usual plot orientation:
// h first, l second.
inline FeasibilityRegion scan_lh_region(double alpha, int grid_n, int workers = 1,
                                        double tol = 1e-9) {
    const MeasurementFamily family = MeasurementFamily::nonmax(alpha);
    FeasibilityRegion region;
    region.axis_names = {"h", "l"};
    const std::vector<double> pts = detail::lattice(0.0, 1.0, grid_n);
    region.axis_coords = {pts, pts};
    region.params = "alpha=" + detail::format_coord(alpha) + ", grid=" + std::to_string(grid_n);
    const std::size_t n = pts.size();
    region.values.assign(n * n, 0);
    detail::parallel_for(n * n, workers, [&](std::size_t flat) {
        std::size_t il = flat % n;
        std::size_t ih = flat / n;
        region.values[flat] = cuboid_feasible(family, {pts[il], pts[ih]}, tol) ? 1 : 0;
    });
    return region;
}

}  // namespace bellbox
