#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bellbox/bell.hpp"
#include "bellbox/box.hpp"
#include "bellbox/geometry.hpp"
#include "bellbox/rng.hpp"
#include "bellbox/simplex.hpp"

namespace bellbox {

// CHSH setting choice: two distinct settings per party.
struct ChshSpec {
    Setting a1 = Setting::X;
    Setting a2 = Setting::Z;
    Setting b1 = Setting::X;
    Setting b2 = Setting::Z;

    void validate() const {
        if (a1 == a2 || b1 == b2)
            throw std::invalid_argument("ChshSpec requires a1 != a2 and b1 != b2");
    }

    std::string describe() const {
        return std::string("(") + setting_char(a1) + "," + setting_char(a2) + ";" +
               setting_char(b1) + "," + setting_char(b2) + ")";
    }
};

// All 36 ordered setting choices.
inline std::vector<ChshSpec> all_chsh_specs() {
    std::vector<ChshSpec> specs;
    for (Setting a1 : kSettings)
        for (Setting a2 : kSettings) {
            if (a1 == a2) continue;
            for (Setting b1 : kSettings)
                for (Setting b2 : kSettings) {
                    if (b1 == b2) continue;
                    specs.push_back({a1, a2, b1, b2});
                }
        }
    return specs;
}

// E(a1 b1) + E(a1 b2) + E(a2 b1) - E(a2 b2).
inline double chsh_value(const JointBox& box, const ChshSpec& spec) {
    spec.validate();
    return correlator(box, spec.a1, spec.b1) + correlator(box, spec.a1, spec.b2) +
           correlator(box, spec.a2, spec.b1) - correlator(box, spec.a2, spec.b2);
}

// Moments of the A state steered by B measuring setting y with outcome
// "+" (plus = true) or "-"; empty when that outcome has probability below
// the steering threshold.
inline std::optional<MomentVector> steered_moments_a(const JointBox& box, Setting y, bool plus,
                                                     double threshold = 1e-12) {
    double pb = box.block(Setting::X, y).marginal_b();
    double pcond = plus ? pb : 1.0 - pb;
    if (pcond < threshold) return std::nullopt;
    MomentVector m;
    double* comp[3] = {&m.x, &m.y, &m.z};
    for (Setting x : kSettings) {
        const Block& blk = box.block(x, y);
        double joint = plus ? blk.pp : blk.pm;  // p(a=+, b | x, y)
        *comp[static_cast<int>(x)] = 2.0 * (joint / pcond) - 1.0;
    }
    return m;
}

inline std::optional<MomentVector> steered_moments_b(const JointBox& box, Setting x, bool plus,
                                                     double threshold = 1e-12) {
    double pa = box.block(x, Setting::X).marginal_a();
    double pcond = plus ? pa : 1.0 - pa;
    if (pcond < threshold) return std::nullopt;
    MomentVector m;
    double* comp[3] = {&m.x, &m.y, &m.z};
    for (Setting y : kSettings) {
        const Block& blk = box.block(x, y);
        double joint = plus ? blk.pp : blk.mp;  // p(a, b=+ | x, y)
        *comp[static_cast<int>(y)] = 2.0 * (joint / pcond) - 1.0;
    }
    return m;
}

// One evaluated constraint: deviations must stay below tol, values must
// stay above -tol, excesses must stay below +tol.
struct ConstraintValue {
    std::string name;
    double value = 0.0;
    bool ok = true;
};

struct MembershipReport {
    int level = 1;
    bool pass = false;
    ValidationReport box_report;               // level >= 1
    std::optional<BellProbabilities> bell;     // level >= 2
    std::vector<ConstraintValue> checks;       // every evaluated constraint
    std::vector<Violation> violations;         // the failing subset, with magnitudes

    double max_magnitude() const {
        double m = box_report.max_magnitude();
        for (const auto& v : violations) m = std::max(m, v.magnitude);
        return m;
    }
};

// Nested membership test.
//   Level 1: valid non-signaling table.
//   Level 2: additionally the four joint-measurement outcome
//            probabilities of the family are >= -tol.
//   Level 3: additionally both unconditioned local moment vectors and
//            every steered local state lie inside the family ball
//            (ideal and noisy families only).
inline MembershipReport membership(const JointBox& box, int level,
                                   const MeasurementFamily& family = MeasurementFamily::ideal(),
                                   double tol = 1e-9) {
    if (level < 1 || level > 3) throw std::invalid_argument("membership level must be 1, 2 or 3");
    if (level >= 3 && family.kind == MeasurementFamily::Kind::NonMax)
        throw std::invalid_argument(
            "level 3 is defined for ideal/noisy families only (no ball for nonmax)");

    MembershipReport report;
    report.level = level;
    report.box_report = validate_joint_box(box, tol);
    for (const auto& v : report.box_report.violations) report.violations.push_back(v);

    // Table-level constraint values: per-block normalization deviation and
    // minimum entry, plus the 12 no-signaling deviations.
    for (Setting a : kSettings) {
        for (Setting b : kSettings) {
            const Block& blk = box.block(a, b);
            std::string name{setting_char(a), setting_char(b)};
            double dev = std::abs(blk.sum() - 1.0);
            report.checks.push_back({"normalization(" + name + ")", dev, dev <= tol});
            double lo = std::min(std::min(blk.pp, blk.pm), std::min(blk.mp, blk.mm));
            report.checks.push_back({"min_entry(" + name + ")", lo, lo >= -tol});
        }
    }
    for (Setting a : kSettings) {
        double ref = box.block(a, Setting::X).marginal_a();
        for (Setting b : {Setting::Y, Setting::Z}) {
            double dev = std::abs(box.block(a, b).marginal_a() - ref);
            report.checks.push_back({"nonsignaling(A:" + std::string{setting_char(a)} + "|" +
                                         std::string{setting_char(b)} + ")",
                                     dev, dev <= tol});
        }
    }
    for (Setting b : kSettings) {
        double ref = box.block(Setting::X, b).marginal_b();
        for (Setting a : {Setting::Y, Setting::Z}) {
            double dev = std::abs(box.block(a, b).marginal_b() - ref);
            report.checks.push_back({"nonsignaling(B:" + std::string{setting_char(b)} + "|" +
                                         std::string{setting_char(a)} + ")",
                                     dev, dev <= tol});
        }
    }

    if (level >= 2) {
        BellProbabilities p = family_bell_probs(box, family);
        report.bell = p;
        const char* names[4] = {"bell_p1", "bell_p2", "bell_p3", "bell_p4"};
        for (int k = 1; k <= 4; ++k) {
            double v = p[k];
            report.checks.push_back({names[k - 1], v, v >= -tol});
            if (v < -tol) report.violations.push_back({names[k - 1], -v});
        }
    }

    if (level >= 3) {
        const BallSpec ball = BallSpec::for_family(family);
        const double r2 = ball.radius * ball.radius;
        auto check_vec = [&](const std::optional<MomentVector>& m, const std::string& name) {
            if (!m) return;
            double excess = m->norm2() - r2;
            bool ok = ball.contains(*m, tol);
            report.checks.push_back({name, excess, ok});
            if (!ok) report.violations.push_back({name, excess});
        };
        check_vec(marginal_moments_a(box), "ball(marginal_A)");
        check_vec(marginal_moments_b(box), "ball(marginal_B)");
        for (Setting y : kSettings) {
            for (bool plus : {true, false}) {
                std::string tag = std::string{setting_char(y)} + (plus ? "+" : "-");
                check_vec(steered_moments_a(box, y, plus), "ball(steered_A|" + tag + ")");
            }
        }
        for (Setting x : kSettings) {
            for (bool plus : {true, false}) {
                std::string tag = std::string{setting_char(x)} + (plus ? "+" : "-");
                check_vec(steered_moments_b(box, x, plus), "ball(steered_B|" + tag + ")");
            }
        }
    }

    report.pass = report.violations.empty();
    return report;
}

// ---------------------------------------------------------------------
// Linear programming over the box polytopes.
//
// Variables are the 15 compact coordinates in internal order:
// q(a,b) row-major (9 of them), then marg_a (3), then marg_b (3).
// ---------------------------------------------------------------------

namespace lp_detail {

constexpr std::size_t kNumVars = 15;

inline std::size_t qvar(Setting a, Setting b) { return JointBox::index(a, b); }
inline std::size_t avar(Setting a) { return 9 + static_cast<std::size_t>(a); }
inline std::size_t bvar(Setting b) { return 12 + static_cast<std::size_t>(b); }

}  // namespace lp_detail

// Constraint rows of the level polytope (level 1: the 36 table-positivity
// rows; level 2 adds the four joint-outcome positivity rows). The six
// marginal upper bounds are redundant but keep the tableau shaped like
// the documented problem.
inline LinearProgram level_polytope(int level, bool marginal_bounds = true) {
    using namespace lp_detail;
    if (level < 1 || level > 2) throw std::invalid_argument("level polytope exists for levels 1, 2");
    LinearProgram lp;
    lp.num_vars = kNumVars;
    for (Setting a : kSettings) {
        for (Setting b : kSettings) {
            std::vector<double> r(kNumVars, 0.0);
            r[qvar(a, b)] = -1.0;  // q >= 0
            lp.add_row(r, 0.0);
            r.assign(kNumVars, 0.0);
            r[qvar(a, b)] = 1.0;
            r[avar(a)] = -1.0;  // q <= marg_a
            lp.add_row(r, 0.0);
            r.assign(kNumVars, 0.0);
            r[qvar(a, b)] = 1.0;
            r[bvar(b)] = -1.0;  // q <= marg_b
            lp.add_row(r, 0.0);
            r.assign(kNumVars, 0.0);
            r[avar(a)] = 1.0;
            r[bvar(b)] = 1.0;
            r[qvar(a, b)] = -1.0;  // marg_a + marg_b - q <= 1
            lp.add_row(r, 1.0);
        }
    }
    if (level >= 2) {
        // p_k >= 0 with c_W = 2 q_WW - marg_a_W - marg_b_W + 1; the three
        // signed combinations (p1, p2, p3) and the complement p4.
        const int signs[3][3] = {{1, -1, 1}, {-1, 1, 1}, {1, 1, -1}};
        for (const auto& s : signs) {
            std::vector<double> r(kNumVars, 0.0);
            double rhs = 0.0;
            for (int w = 0; w < 3; ++w) {
                Setting sw = static_cast<Setting>(w);
                r[qvar(sw, sw)] -= s[w];
                r[avar(sw)] += 0.5 * s[w];
                r[bvar(sw)] += 0.5 * s[w];
                rhs += 0.5 * s[w];
            }
            lp.add_row(r, rhs);
        }
        std::vector<double> r(kNumVars, 0.0);
        for (Setting w : kSettings) {
            r[lp_detail::qvar(w, w)] += 1.0;
            r[lp_detail::avar(w)] -= 0.5;
            r[lp_detail::bvar(w)] -= 0.5;
        }
        lp.add_row(r, -0.5);  // p4 >= 0
    }
    if (marginal_bounds) {
        for (std::size_t v = 9; v < 15; ++v) {
            std::vector<double> r(kNumVars, 0.0);
            r[v] = 1.0;
            lp.add_row(r, 1.0);
        }
    }
    return lp;
}

inline CompactState compact_from_lp_vars(const std::vector<double>& x) {
    CompactState s;
    for (std::size_t i = 0; i < 9; ++i) s.joint_pp[i] = x[i];
    for (std::size_t i = 0; i < 3; ++i) s.marg_a[i] = x[9 + i];
    for (std::size_t i = 0; i < 3; ++i) s.marg_b[i] = x[12 + i];
    return s;
}

inline std::vector<double> lp_vars_from_compact(const CompactState& s) {
    std::vector<double> x(15, 0.0);
    for (std::size_t i = 0; i < 9; ++i) x[i] = s.joint_pp[i];
    for (std::size_t i = 0; i < 3; ++i) x[9 + i] = s.marg_a[i];
    for (std::size_t i = 0; i < 3; ++i) x[12 + i] = s.marg_b[i];
    return x;
}

// Linear objective over the compact coordinates plus a constant offset.
struct LinearObjective {
    std::vector<double> coeffs = std::vector<double>(lp_detail::kNumVars, 0.0);
    double constant = 0.0;
};

// CHSH as a linear functional of the compact coordinates:
// E(x, y) = 4 q(x,y) - 2 marg_a_x - 2 marg_b_y + 1.
inline LinearObjective chsh_objective(const ChshSpec& spec) {
    spec.validate();
    LinearObjective obj;
    const std::array<std::tuple<Setting, Setting, double>, 4> terms{
        std::tuple{spec.a1, spec.b1, 1.0}, {spec.a1, spec.b2, 1.0}, {spec.a2, spec.b1, 1.0},
        {spec.a2, spec.b2, -1.0}};
    for (const auto& [x, y, sgn] : terms) {
        obj.coeffs[lp_detail::qvar(x, y)] += 4.0 * sgn;
        obj.coeffs[lp_detail::avar(x)] -= 2.0 * sgn;
        obj.coeffs[lp_detail::bvar(y)] -= 2.0 * sgn;
        obj.constant += sgn;
    }
    return obj;
}

// p4 as a linear functional: -1/2 + sum_W (marg_a_W/2 + marg_b_W/2 - q_WW).
inline LinearObjective p4_objective() {
    LinearObjective obj;
    obj.constant = -0.5;
    for (Setting w : kSettings) {
        obj.coeffs[lp_detail::qvar(w, w)] -= 1.0;
        obj.coeffs[lp_detail::avar(w)] += 0.5;
        obj.coeffs[lp_detail::bvar(w)] += 0.5;
    }
    return obj;
}

struct LpOptimum {
    double value = 0.0;
    CompactState witness;
};

// Exact maximum of a linear functional over the level-1 or level-2
// polytope. The polytopes are nonempty and bounded, so anything but an
// optimal outcome is an internal error.
inline LpOptimum lp_maximize(const LinearObjective& objective, int level) {
    LinearProgram lp = level_polytope(level);
    lp.objective = objective.coeffs;
    LpSolution sol = simplex_maximize(lp);
    if (sol.status != LpStatus::Optimal)
        throw std::logic_error("level polytope LP must be feasible and bounded");
    return {sol.value + objective.constant, compact_from_lp_vars(sol.x)};
}

inline LpOptimum lp_max_chsh(const ChshSpec& spec, int level) {
    if (level < 1 || level > 2)
        throw std::invalid_argument("lp_max_chsh supports levels 1 and 2");
    return lp_maximize(chsh_objective(spec), level);
}

// ---------------------------------------------------------------------
// Level-3 sampler.
// ---------------------------------------------------------------------

struct SamplerResult {
    std::vector<CompactState> boxes;     // ordered by (worker, emission step)
    std::uint64_t proposals = 0;         // thinned candidates examined
    double acceptance_rate = 1.0;
    bool low_acceptance_warning = false;
};

namespace sampler_detail {

// One hit-and-run walker over the level-2 polytope. Chord endpoints come
// from the exact ratio test over the constraint rows.
class Walker {
  public:
    Walker(const LinearProgram& lp, std::uint64_t seed)
        : lp_(lp), rng_(seed), x_(15, 0.0) {
        for (std::size_t i = 0; i < 9; ++i) x_[i] = 0.25;  // uniform box
        for (std::size_t i = 9; i < 15; ++i) x_[i] = 0.5;
    }

    void step() {
        std::array<double, 15> dir{};
        double n2 = 0.0;
        for (double& d : dir) {
            d = rng_.normal();
            n2 += d * d;
        }
        if (n2 < 1e-24) return;
        double inv = 1.0 / std::sqrt(n2);
        for (double& d : dir) d *= inv;

        double t_lo = -std::numeric_limits<double>::infinity();
        double t_hi = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < lp_.rows.size(); ++r) {
            double ad = 0.0, ax = 0.0;
            const std::vector<double>& row = lp_.rows[r];
            for (std::size_t j = 0; j < 15; ++j) {
                ad += row[j] * dir[j];
                ax += row[j] * x_[j];
            }
            double slack = lp_.rhs[r] - ax;
            if (ad > 1e-14)
                t_hi = std::min(t_hi, slack / ad);
            else if (ad < -1e-14)
                t_lo = std::max(t_lo, slack / ad);
        }
        if (!(t_hi >= t_lo)) return;  // numerically degenerate chord; stay put
        double t = t_lo + (t_hi - t_lo) * rng_.uniform01();
        for (std::size_t j = 0; j < 15; ++j) x_[j] += t * dir[j];
    }

    CompactState state() const {
        CompactState s;
        for (std::size_t i = 0; i < 9; ++i) s.joint_pp[i] = x_[i];
        for (std::size_t i = 0; i < 3; ++i) s.marg_a[i] = x_[9 + i];
        for (std::size_t i = 0; i < 3; ++i) s.marg_b[i] = x_[12 + i];
        return s;
    }

  private:
    const LinearProgram& lp_;
    Rng rng_;
    std::vector<double> x_;
};

}  // namespace sampler_detail

// Draws boxes from the level-3 set: a hit-and-run walk inside the level-2
// polytope, keeping only states that also pass the steering checks.
// Deterministic under (seed, workers); worker w uses seed + w and the
// output concatenates the workers' emissions in order.
inline SamplerResult sample_level3(const MeasurementFamily& family, std::size_t trials,
                                   std::uint64_t seed, int workers = 1, double tol = 1e-9) {
    if (family.kind != MeasurementFamily::Kind::IdealBell)
        throw std::invalid_argument("sample_level3 supports the ideal family");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");

    constexpr std::size_t kWarmup = 1000;
    constexpr std::size_t kThinning = 10;
    const LinearProgram polytope = level_polytope(2, /*marginal_bounds=*/false);

    SamplerResult result;
    std::size_t base = trials / static_cast<std::size_t>(workers);
    std::size_t extra = trials % static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
        std::size_t target = base + (static_cast<std::size_t>(w) < extra ? 1 : 0);
        if (target == 0) continue;
        sampler_detail::Walker walker(polytope, seed + static_cast<std::uint64_t>(w));
        for (std::size_t i = 0; i < kWarmup; ++i) walker.step();
        std::size_t emitted = 0;
        const std::uint64_t cap = static_cast<std::uint64_t>(target) * 10000u;
        std::uint64_t attempts = 0;
        while (emitted < target && attempts < cap) {
            for (std::size_t i = 0; i < kThinning; ++i) walker.step();
            ++attempts;
            CompactState s = walker.state();
            MembershipReport rep = membership(expand(s), 3, family, tol);
            if (rep.pass) {
                result.boxes.push_back(s);
                ++emitted;
            }
        }
        result.proposals += attempts;
    }
    result.acceptance_rate =
        result.proposals > 0
            ? static_cast<double>(result.boxes.size()) / static_cast<double>(result.proposals)
            : 1.0;
    result.low_acceptance_warning = result.acceptance_rate < 1e-3;
    return result;
}

}  // namespace bellbox
