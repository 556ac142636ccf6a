#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellbox/box.hpp"

namespace bellbox {

// The three joint-measurement families. "ideal" is the Bell measurement
// itself, "noisy" mixes it with white noise of weight lambda, "nonmax"
// is the measurement in the partially entangled basis with
// a = sin(pi/4 + alpha), b = cos(pi/4 + alpha).
struct MeasurementFamily {
    enum class Kind { IdealBell, NoisyBell, NonMax };

    Kind kind = Kind::IdealBell;
    double lambda = 0.0;  // noise weight, [0, 1)
    double alpha = 0.0;   // basis angle, [0, pi/4]

    static MeasurementFamily ideal() { return {}; }

    static MeasurementFamily noisy(double lambda) {
        if (lambda < 0.0 || lambda >= 1.0)
            throw std::invalid_argument("noisy family requires 0 <= lambda < 1");
        return {Kind::NoisyBell, lambda, 0.0};
    }

    static MeasurementFamily nonmax(double alpha) {
        constexpr double quarter_pi = 0.78539816339744830961566084581988;
        if (alpha < 0.0 || alpha > quarter_pi + 1e-12)
            throw std::invalid_argument("nonmax family requires 0 <= alpha <= pi/4");
        return {Kind::NonMax, 0.0, alpha};
    }

    // Radius of the local moment-space ball: 1 for the ideal measurement,
    // 1/sqrt(1-lambda) for the noisy one. The nonmax local state space is
    // not a ball, so no radius is defined there.
    double ball_radius() const {
        switch (kind) {
            case Kind::IdealBell: return 1.0;
            case Kind::NoisyBell: return 1.0 / std::sqrt(1.0 - lambda);
            default:
                throw std::logic_error("nonmax family has no ball radius");
        }
    }

    std::string describe() const {
        switch (kind) {
            case Kind::IdealBell: return "ideal_bell";
            case Kind::NoisyBell: return "noisy_bell(lambda=" + std::to_string(lambda) + ")";
            default: return "nonmax(alpha=" + std::to_string(alpha) + ")";
        }
    }
};

using Mat4 = std::array<std::array<double, 4>, 4>;

// Four real 4x4 matrices acting on extended moment vectors
// (m_x, m_y, m_z, 1); outcome probability k for a product pair is the
// bilinear form <m_A | T_k | m_B>.
struct OperatorSet {
    std::array<Mat4, 4> t{};

    const Mat4& outcome(int k) const {  // k = 1..4
        if (k < 1 || k > 4) throw std::out_of_range("outcome index must be 1..4");
        return t[static_cast<std::size_t>(k - 1)];
    }
};

// Solves the parity relations
//   p1 + p3 = c_XX,  p2 + p3 = c_YY,  p1 + p2 = c_ZZ,  sum p_k = 1
// with c_WW = p(++|WW) + p(--|WW). Closed form of the unique solution;
// negative components are returned untouched, they are the membership
// signal for the joint-measurement positivity level.
inline BellProbabilities bell_probs(const JointBox& box) {
    auto c = [&box](Setting w) {
        const Block& blk = box.block(w, w);
        return blk.pp + blk.mm;
    };
    double cxx = c(Setting::X), cyy = c(Setting::Y), czz = c(Setting::Z);
    return {(cxx - cyy + czz) / 2.0, (-cxx + cyy + czz) / 2.0, (cxx + cyy - czz) / 2.0,
            1.0 - (cxx + cyy + czz) / 2.0};
}

// p(k|noisy) = (1-lambda) p(k|Bell) + lambda/4.
inline BellProbabilities noisy_bell_probs(const JointBox& box, double lambda) {
    if (lambda < 0.0 || lambda >= 1.0)
        throw std::invalid_argument("noisy_bell_probs requires 0 <= lambda < 1");
    BellProbabilities p = bell_probs(box);
    auto mixp = [lambda](double v) { return (1.0 - lambda) * v + lambda / 4.0; };
    return {mixp(p.p1), mixp(p.p2), mixp(p.p3), mixp(p.p4)};
}

// Outcome probabilities of the nonmax measurement on an arbitrary box,
// through the local-tomography route: the box determines the full
// two-qubit correlation data (marginal moments r, s and correlators
// t_ij), and each outcome is the Born value of the corresponding basis
// projector expressed in that data:
//   p1 = a^2 W00 + b^2 W33 + 2ab Re W03,   p2 = b^2 W00 + a^2 W33 - 2ab Re W03,
//   p3 = a^2 W11 + b^2 W22 + 2ab Re W12,   p4 = b^2 W11 + a^2 W22 - 2ab Re W12,
// with W00 = (1 + r_z + s_z + t_zz)/4 etc. Reduces to bell_probs at alpha = 0.
inline BellProbabilities nonmax_bell_probs(const JointBox& box, double alpha) {
    double a = std::sin(0.78539816339744830962 + alpha);
    double b = std::cos(0.78539816339744830962 + alpha);
    CompactState s = compact_from_box(box);
    double rz = 2.0 * s.marg_a[2] - 1.0;
    double sz = 2.0 * s.marg_b[2] - 1.0;
    double txx = correlator(box, Setting::X, Setting::X);
    double tyy = correlator(box, Setting::Y, Setting::Y);
    double tzz = correlator(box, Setting::Z, Setting::Z);
    double w00 = (1.0 + rz + sz + tzz) / 4.0;
    double w11 = (1.0 + rz - sz - tzz) / 4.0;
    double w22 = (1.0 - rz + sz - tzz) / 4.0;
    double w33 = (1.0 - rz - sz + tzz) / 4.0;
    double re_w03 = (txx - tyy) / 4.0;
    double re_w12 = (txx + tyy) / 4.0;
    double a2 = a * a, b2 = b * b, tab = 2.0 * a * b;
    return {a2 * w00 + b2 * w33 + tab * re_w03, b2 * w00 + a2 * w33 - tab * re_w03,
            a2 * w11 + b2 * w22 + tab * re_w12, b2 * w11 + a2 * w22 - tab * re_w12};
}

// Outcome probabilities of any family, dispatching on its kind.
inline BellProbabilities family_bell_probs(const JointBox& box, const MeasurementFamily& family) {
    switch (family.kind) {
        case MeasurementFamily::Kind::IdealBell: return bell_probs(box);
        case MeasurementFamily::Kind::NoisyBell: return noisy_bell_probs(box, family.lambda);
        default: return nonmax_bell_probs(box, family.alpha);
    }
}

namespace detail {

inline Mat4 zero_mat4() { return Mat4{}; }

// Ideal outcome k as a diagonal sign pattern over (x, y, z) plus the unit
// slot; all entries carry the overall 1/4.
inline Mat4 ideal_outcome(int sx, int sy, int sz) {
    Mat4 m = zero_mat4();
    m[0][0] = 0.25 * sx;
    m[1][1] = 0.25 * sy;
    m[2][2] = 0.25 * sz;
    m[3][3] = 0.25;
    return m;
}

}  // namespace detail

// Builds the four outcome operators of a family.
//
// Ideal: T_k = 1/4 diag(s_x, s_y, s_z, 1) with sign patterns
// (+,-,+), (-,+,+), (+,+,-), (-,-,-) for k = 1..4.
//
// Noisy: (1-lambda) T_k + lambda/4 N, where N = diag(0,0,0,1).
//
// Nonmax: the X,Y diagonals carry +-cos(2 alpha) and the (z, unit)
// off-diagonal entries +-sin(2 alpha), matching the Born forms of the
// orthonormal basis {a|00>+b|11>, b|00>-a|11>, a|01>+b|10>, b|01>-a|10>}:
//
//   4*T1 = [[ c2,   0,  0,  0], [0, -c2, 0, 0], [0, 0,  1,  s2], [0, 0,  s2, 1]]
//   4*T2 = [[-c2,   0,  0,  0], [0,  c2, 0, 0], [0, 0,  1, -s2], [0, 0, -s2, 1]]
//   4*T3 = [[ c2,   0,  0,  0], [0,  c2, 0, 0], [0, 0, -1,  s2], [0, 0, -s2, 1]]
//   4*T4 = [[-c2,   0,  0,  0], [0, -c2, 0, 0], [0, 0, -1, -s2], [0, 0,  s2, 1]]
//
// with c2 = cos(2 alpha) = 2ab and s2 = sin(2 alpha) = a^2 - b^2. The four
// operators sum to N for every family, so outcome probabilities are
// normalized for any pair of unit-fourth-component vectors.
inline OperatorSet operator_set(const MeasurementFamily& family) {
    OperatorSet ops;
    switch (family.kind) {
        case MeasurementFamily::Kind::IdealBell: {
            ops.t[0] = detail::ideal_outcome(+1, -1, +1);
            ops.t[1] = detail::ideal_outcome(-1, +1, +1);
            ops.t[2] = detail::ideal_outcome(+1, +1, -1);
            ops.t[3] = detail::ideal_outcome(-1, -1, -1);
            break;
        }
        case MeasurementFamily::Kind::NoisyBell: {
            OperatorSet ideal = operator_set(MeasurementFamily::ideal());
            double keep = 1.0 - family.lambda;
            for (int k = 0; k < 4; ++k) {
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) ops.t[k][i][j] = keep * ideal.t[k][i][j];
                ops.t[k][3][3] += family.lambda / 4.0;
            }
            break;
        }
        case MeasurementFamily::Kind::NonMax: {
            double c2 = std::cos(2.0 * family.alpha);
            double s2 = std::sin(2.0 * family.alpha);
            const std::array<std::array<double, 4>, 4> pattern{{
                // {x_diag, z_diag, zu (3,4) entry, uz (4,3) entry} in units of 1/4
                {{+c2, +1.0, +s2, +s2}},
                {{-c2, +1.0, -s2, -s2}},
                {{+c2, -1.0, +s2, -s2}},
                {{-c2, -1.0, -s2, +s2}},
            }};
            const std::array<double, 4> y_diag{-c2, +c2, +c2, -c2};
            for (int k = 0; k < 4; ++k) {
                Mat4 m = detail::zero_mat4();
                m[0][0] = 0.25 * pattern[k][0];
                m[1][1] = 0.25 * y_diag[k];
                m[2][2] = 0.25 * pattern[k][1];
                m[2][3] = 0.25 * pattern[k][2];
                m[3][2] = 0.25 * pattern[k][3];
                m[3][3] = 0.25;
                ops.t[k] = m;
            }
            break;
        }
    }
    return ops;
}

// Bilinear form <m_A | T_k | m_B> on extended vectors.
inline double outcome_value(const OperatorSet& ops, int k, const MomentVector& m_a,
                            const MomentVector& m_b) {
    const Mat4& t = ops.outcome(k);
    const std::array<double, 4> u = m_a.extended();
    const std::array<double, 4> v = m_b.extended();
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        double row = 0.0;
        for (int j = 0; j < 4; ++j) row += t[i][j] * v[j];
        acc += u[i] * row;
    }
    return acc;
}

struct PositivityReport {
    std::array<double, 4> values{};  // outcome values for k = 1..4
    double min_value = 0.0;
    bool pass = false;
};

// Evaluates all four outcome values for a pair of local states; passes
// iff none is below -tol.
inline PositivityReport positivity_report(const MeasurementFamily& family, const MomentVector& m_a,
                                          const MomentVector& m_b, double tol = 1e-9) {
    OperatorSet ops = operator_set(family);
    PositivityReport report;
    report.min_value = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 4; ++k) {
        double v = outcome_value(ops, k, m_a, m_b);
        report.values[static_cast<std::size_t>(k - 1)] = v;
        report.min_value = std::min(report.min_value, v);
    }
    report.pass = report.min_value >= -tol;
    return report;
}

// Fourth-outcome probability of the self-paired product state with
// marginals (p_x, p_y, p_z):
//   p4 = p_x + p_y + p_z - p_x^2 - p_y^2 - p_z^2 - 1/2.
// Nonnegativity of this quadratic is the ball condition on the local
// state space.
inline double p4_product(const LocalState& s) {
    return s.px + s.py + s.pz - s.px * s.px - s.py * s.py - s.pz * s.pz - 0.5;
}

}  // namespace bellbox
