#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellbox {

// Dichotomic measurement settings available on each elementary system.
enum class Setting : int { X = 0, Y = 1, Z = 2 };

constexpr std::array<Setting, 3> kSettings{Setting::X, Setting::Y, Setting::Z};

inline char setting_char(Setting s) { return "XYZ"[static_cast<int>(s)]; }

inline Setting setting_from_char(char c) {
    switch (c) {
        case 'X': case 'x': return Setting::X;
        case 'Y': case 'y': return Setting::Y;
        case 'Z': case 'z': return Setting::Z;
        default: throw std::invalid_argument(std::string("unknown setting '") + c + "'");
    }
}

// State of one elementary system: probability of outcome "+" for each of
// the three settings.
struct LocalState {
    double px = 0.5;
    double py = 0.5;
    double pz = 0.5;

    double prob(Setting s) const {
        switch (s) {
            case Setting::X: return px;
            case Setting::Y: return py;
            default: return pz;
        }
    }

    bool in_range(double tol = 0.0) const {
        auto ok = [tol](double p) { return p >= -tol && p <= 1.0 + tol; };
        return ok(px) && ok(py) && ok(pz);
    }
};

// Mean values of the three settings in the canonical normalization
// m = 2p - 1, so each component lives in [-1, 1] and the extended vector
// (m_x, m_y, m_z, 1) feeds the outcome operators directly.
struct MomentVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm2() const { return x * x + y * y + z * z; }
    double dot(const MomentVector& o) const { return x * o.x + y * o.y + z * o.z; }
    std::array<double, 4> extended() const { return {x, y, z, 1.0}; }
};

inline MomentVector moments_from_local(const LocalState& s) {
    return {2.0 * s.px - 1.0, 2.0 * s.py - 1.0, 2.0 * s.pz - 1.0};
}

inline LocalState local_from_moments(const MomentVector& m) {
    return {(m.x + 1.0) / 2.0, (m.y + 1.0) / 2.0, (m.z + 1.0) / 2.0};
}

// One conditional block p(ab|x_A x_B): joint probabilities of the four
// outcome pairs for a fixed pair of settings.
struct Block {
    double pp = 0.25;
    double pm = 0.25;
    double mp = 0.25;
    double mm = 0.25;

    double sum() const { return pp + pm + mp + mm; }
    double marginal_a() const { return pp + pm; }  // p(a=+ | x_A), from this block
    double marginal_b() const { return pp + mp; }  // p(b=+ | x_B), from this block
};

// Full conditional probability table over the 9 setting pairs. The
// default-constructed box is the uniform one (all entries 1/4).
class JointBox {
  public:
    Block& block(Setting a, Setting b) { return blocks_[index(a, b)]; }
    const Block& block(Setting a, Setting b) const { return blocks_[index(a, b)]; }

    Block& block(std::size_t flat) { return blocks_[flat]; }
    const Block& block(std::size_t flat) const { return blocks_[flat]; }

    static std::size_t index(Setting a, Setting b) {
        return 3 * static_cast<std::size_t>(a) + static_cast<std::size_t>(b);
    }

    static JointBox uniform() { return JointBox{}; }

  private:
    std::array<Block, 9> blocks_{};
};

// The 15 free parameters determining a box: the "++" probability of every
// setting pair plus the single-party marginals. joint_pp is row-major in
// (a_setting, b_setting).
struct CompactState {
    std::array<double, 9> joint_pp{};
    std::array<double, 3> marg_a{};
    std::array<double, 3> marg_b{};

    double& q(Setting a, Setting b) { return joint_pp[JointBox::index(a, b)]; }
    double q(Setting a, Setting b) const { return joint_pp[JointBox::index(a, b)]; }

    // Interchange order: diagonal q's, the six off-diagonal q's row-major,
    // then the A and B marginals.
    std::array<double, 15> to_array15() const {
        return {joint_pp[0], joint_pp[4], joint_pp[8],
                joint_pp[1], joint_pp[2], joint_pp[3], joint_pp[5], joint_pp[6], joint_pp[7],
                marg_a[0], marg_a[1], marg_a[2],
                marg_b[0], marg_b[1], marg_b[2]};
    }

    static CompactState from_array15(const std::array<double, 15>& v) {
        CompactState s;
        s.joint_pp = {v[0], v[3], v[4], v[5], v[1], v[6], v[7], v[8], v[2]};
        s.marg_a = {v[9], v[10], v[11]};
        s.marg_b = {v[12], v[13], v[14]};
        return s;
    }
};

// Probabilities of the four outcomes of the joint measurement.
struct BellProbabilities {
    double p1 = 0.25;
    double p2 = 0.25;
    double p3 = 0.25;
    double p4 = 0.25;

    double sum() const { return p1 + p2 + p3 + p4; }
    double min() const { return std::min(std::min(p1, p2), std::min(p3, p4)); }
    double operator[](int k) const {  // k = 1..4
        switch (k) {
            case 1: return p1;
            case 2: return p2;
            case 3: return p3;
            case 4: return p4;
            default: throw std::out_of_range("outcome index must be 1..4");
        }
    }
};

// One violated constraint: a human-readable name plus how badly it fails.
struct Violation {
    std::string constraint;
    double magnitude = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }

    double max_magnitude() const {
        double m = 0.0;
        for (const auto& v : violations) m = std::max(m, v.magnitude);
        return m;
    }
};

namespace detail {
inline std::string block_name(Setting a, Setting b) {
    return std::string{setting_char(a), setting_char(b)};
}
}  // namespace detail

// Checks normalization, positivity and the 12 independent no-signaling
// equalities. The report is empty iff the table is a valid
// non-signaling box at tolerance tol.
inline ValidationReport validate_joint_box(const JointBox& box, double tol = 1e-12) {
    ValidationReport report;
    auto add = [&report](std::string name, double magnitude) {
        report.violations.push_back({std::move(name), magnitude});
    };

    for (Setting a : kSettings) {
        for (Setting b : kSettings) {
            const Block& blk = box.block(a, b);
            const std::string name = detail::block_name(a, b);
            const std::array<std::pair<const char*, double>, 4> entries{
                std::pair{"pp", blk.pp}, {"pm", blk.pm}, {"mp", blk.mp}, {"mm", blk.mm}};
            for (const auto& [lbl, v] : entries) {
                if (v < -tol) add("positivity(" + name + "." + lbl + ")", -v);
                if (v > 1.0 + tol) add("upper_bound(" + name + "." + lbl + ")", v - 1.0);
            }
            double dev = std::abs(blk.sum() - 1.0);
            if (dev > tol) add("normalization(" + name + ")", dev);
        }
    }

    // A-marginal of block (a, b) must not depend on b; X is the reference.
    for (Setting a : kSettings) {
        double ref = box.block(a, Setting::X).marginal_a();
        for (Setting b : {Setting::Y, Setting::Z}) {
            double dev = std::abs(box.block(a, b).marginal_a() - ref);
            if (dev > tol)
                add("nonsignaling(A:" + std::string{setting_char(a)} + "," +
                        detail::block_name(a, b) + " vs " + detail::block_name(a, Setting::X) + ")",
                    dev);
        }
    }
    for (Setting b : kSettings) {
        double ref = box.block(Setting::X, b).marginal_b();
        for (Setting a : {Setting::Y, Setting::Z}) {
            double dev = std::abs(box.block(a, b).marginal_b() - ref);
            if (dev > tol)
                add("nonsignaling(B:" + std::string{setting_char(b)} + "," +
                        detail::block_name(a, b) + " vs " + detail::block_name(Setting::X, b) + ")",
                    dev);
        }
    }
    return report;
}

// Product box p(ab|x_A x_B) = p(a|x_A) p(b|x_B).
inline JointBox product_box(const LocalState& alice, const LocalState& bob) {
    if (!alice.in_range() || !bob.in_range())
        throw std::invalid_argument("product_box: outcome probabilities must lie in [0,1]");
    JointBox box;
    for (Setting a : kSettings) {
        for (Setting b : kSettings) {
            double pa = alice.prob(a);
            double pb = bob.prob(b);
            box.block(a, b) = {pa * pb, pa * (1.0 - pb), (1.0 - pa) * pb, (1.0 - pa) * (1.0 - pb)};
        }
    }
    return box;
}

// Convex combination w*lhs + (1-w)*rhs, entry by entry.
inline JointBox mix(const JointBox& lhs, const JointBox& rhs, double w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("mix: weight must lie in [0,1]");
    JointBox out;
    for (std::size_t i = 0; i < 9; ++i) {
        const Block& a = lhs.block(i);
        const Block& b = rhs.block(i);
        out.block(i) = {w * a.pp + (1.0 - w) * b.pp, w * a.pm + (1.0 - w) * b.pm,
                        w * a.mp + (1.0 - w) * b.mp, w * a.mm + (1.0 - w) * b.mm};
    }
    return out;
}

// E(x_a x_b) = p(++) + p(--) - p(+-) - p(-+), in [-1, 1].
inline double correlator(const JointBox& box, Setting a, Setting b) {
    const Block& blk = box.block(a, b);
    return blk.pp + blk.mm - blk.pm - blk.mp;
}

// Reads the 15 parameters off a box. Marginals are taken from the
// x_other = X blocks; for a valid box any choice agrees.
inline CompactState compact_from_box(const JointBox& box) {
    CompactState s;
    for (Setting a : kSettings)
        for (Setting b : kSettings) s.q(a, b) = box.block(a, b).pp;
    for (Setting a : kSettings)
        s.marg_a[static_cast<int>(a)] = box.block(a, Setting::X).marginal_a();
    for (Setting b : kSettings)
        s.marg_b[static_cast<int>(b)] = box.block(Setting::X, b).marginal_b();
    return s;
}

// Rebuilds the full table from the 15 parameters. Entries may come out
// negative; that is exactly what validate_joint_box reports.
inline JointBox expand(const CompactState& state) {
    JointBox box;
    for (Setting a : kSettings) {
        for (Setting b : kSettings) {
            double q = state.q(a, b);
            double ma = state.marg_a[static_cast<int>(a)];
            double mb = state.marg_b[static_cast<int>(b)];
            box.block(a, b) = {q, ma - q, mb - q, 1.0 - ma - mb + q};
        }
    }
    return box;
}

// Unconditioned local moment vectors of the two parties.
inline MomentVector marginal_moments_a(const JointBox& box) {
    CompactState s = compact_from_box(box);
    return {2.0 * s.marg_a[0] - 1.0, 2.0 * s.marg_a[1] - 1.0, 2.0 * s.marg_a[2] - 1.0};
}

inline MomentVector marginal_moments_b(const JointBox& box) {
    CompactState s = compact_from_box(box);
    return {2.0 * s.marg_b[0] - 1.0, 2.0 * s.marg_b[1] - 1.0, 2.0 * s.marg_b[2] - 1.0};
}

}  // namespace bellbox
