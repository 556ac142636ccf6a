#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "bellbox/bell.hpp"
#include "bellbox/box.hpp"
#include "bellbox/correlations.hpp"
#include "bellbox/rng.hpp"

// Minimal two-qubit simulator used as ground truth for the abstract
// joint-measurement definitions: Born-rule box statistics, Bell-basis
// probabilities, and the CHSH operator norm.
namespace bellbox::quantum {

using cd = std::complex<double>;
using Mat2 = std::array<std::array<cd, 2>, 2>;
using Mat4 = std::array<std::array<cd, 4>, 4>;
using Vec4 = std::array<cd, 4>;

inline Mat2 pauli(Setting s) {
    switch (s) {
        case Setting::X: return {{{cd(0, 0), cd(1, 0)}, {cd(1, 0), cd(0, 0)}}};
        case Setting::Y: return {{{cd(0, 0), cd(0, -1)}, {cd(0, 1), cd(0, 0)}}};
        default: return {{{cd(1, 0), cd(0, 0)}, {cd(0, 0), cd(-1, 0)}}};
    }
}

// Eigenprojector P^{s,+-} = (I +- sigma_s)/2 in the textbook phase
// convention; P^{Z,+} = |0><0|.
inline Mat2 pauli_projector(Setting s, bool plus) {
    Mat2 p = pauli(s);
    double sign = plus ? 0.5 : -0.5;
    Mat2 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i][j] = sign * p[i][j] + (i == j ? cd(0.5, 0) : cd(0, 0));
    return out;
}

inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
    return out;
}

inline Mat4 add(const Mat4& a, const Mat4& b, cd wa = cd(1, 0), cd wb = cd(1, 0)) {
    Mat4 out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i][j] = wa * a[i][j] + wb * b[i][j];
    return out;
}

inline cd trace_product(const Mat4& a, const Mat4& b) {
    cd t(0, 0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t += a[i][j] * b[j][i];
    return t;
}

inline Mat4 outer(const Vec4& v) {
    Mat4 out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i][j] = v[i] * std::conj(v[j]);
    return out;
}

inline cd inner(const Vec4& a, const Vec4& b) {
    cd t(0, 0);
    for (int i = 0; i < 4; ++i) t += std::conj(a[i]) * b[i];
    return t;
}

// --------------------------------------------------------------------
// Jacobi eigensolver for 4x4 Hermitian matrices.
// --------------------------------------------------------------------

struct EigenResult {
    std::array<double, 4> values{};  // ascending
    Mat4 vectors{};                  // columns are the eigenvectors
    int sweeps = 0;
};

// Cyclic Jacobi with complex rotations: each sweep annihilates every
// off-diagonal element with a phased plane rotation; converges
// quadratically for Hermitian input.
inline EigenResult jacobi_hermitian(Mat4 h, double tol = 1e-13) {
    Mat4 v{};
    for (int i = 0; i < 4; ++i) v[i][i] = cd(1, 0);

    EigenResult result;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += std::abs(h[p][q]);
        result.sweeps = sweep;
        if (off <= tol) break;

        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                double beta_abs = std::abs(h[p][q]);
                if (beta_abs <= tol * 0.01) continue;
                cd phase = h[p][q] / beta_abs;
                double app = h[p][p].real();
                double aqq = h[q][q].real();
                double theta = (aqq - app) / (2.0 * beta_abs);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                // Columns p, q of the rotation: u_p = c e_p - s conj(phase) e_q,
                // u_q = s phase e_p + c e_q.
                for (int j = 0; j < 4; ++j) {
                    cd hpj = h[p][j];
                    cd hqj = h[q][j];
                    h[p][j] = c * hpj - s * phase * hqj;
                    h[q][j] = s * std::conj(phase) * hpj + c * hqj;
                }
                for (int i = 0; i < 4; ++i) {
                    cd hip = h[i][p];
                    cd hiq = h[i][q];
                    h[i][p] = c * hip - s * std::conj(phase) * hiq;
                    h[i][q] = s * phase * hip + c * hiq;
                    cd vip = v[i][p];
                    cd viq = v[i][q];
                    v[i][p] = c * vip - s * std::conj(phase) * viq;
                    v[i][q] = s * phase * vip + c * viq;
                }
                h[p][q] = cd(0, 0);
                h[q][p] = cd(0, 0);
            }
        }
    }

    std::array<int, 4> order{0, 1, 2, 3};
    std::array<double, 4> diag{h[0][0].real(), h[1][1].real(), h[2][2].real(), h[3][3].real()};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (diag[order[j]] < diag[order[i]]) std::swap(order[i], order[j]);
    for (int i = 0; i < 4; ++i) {
        result.values[i] = diag[order[i]];
        for (int r = 0; r < 4; ++r) result.vectors[r][i] = v[r][order[i]];
    }
    return result;
}

// --------------------------------------------------------------------
// States and measurements.
// --------------------------------------------------------------------

struct DensityMatrix {
    Mat4 m{};

    static DensityMatrix maximally_mixed() {
        DensityMatrix rho;
        for (int i = 0; i < 4; ++i) rho.m[i][i] = cd(0.25, 0);
        return rho;
    }

    static DensityMatrix pure(const Vec4& v) {
        double n2 = 0.0;
        for (const cd& c : v) n2 += std::norm(c);
        if (n2 < 1e-24) throw std::invalid_argument("pure state from zero vector");
        DensityMatrix rho;
        rho.m = outer(v);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) rho.m[i][j] /= n2;
        return rho;
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < 4; ++i) t += m[i][i].real();
        return t;
    }

    double hermiticity_deviation() const {
        double d = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) d = std::max(d, std::abs(m[i][j] - std::conj(m[j][i])));
        return d;
    }

    double min_eigenvalue() const { return jacobi_hermitian(m).values[0]; }

    double purity() const {
        double t = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) t += (m[i][j] * m[j][i]).real();
        return t;
    }

    bool valid(double tol = 1e-10) const {
        return hermiticity_deviation() <= 1e-12 && std::abs(trace() - 1.0) <= 1e-12 &&
               min_eigenvalue() >= -tol;
    }
};

// Orthonormal family {a|00>+b|11>, b|00>-a|11>, a|01>+b|10>, b|01>-a|10>}
// with a^2 + b^2 = 1; (a, b) = (1/sqrt2, 1/sqrt2) is the standard Bell
// basis in the order (phi+, phi-, psi+, psi-).
struct BellBasis {
    std::array<Vec4, 4> e{};
    double a = 0.0;
    double b = 0.0;

    static BellBasis from_amplitudes(double a, double b) {
        if (std::abs(a * a + b * b - 1.0) > 1e-12)
            throw std::invalid_argument("BellBasis requires a^2 + b^2 = 1");
        BellBasis basis;
        basis.a = a;
        basis.b = b;
        basis.e[0] = {cd(a, 0), cd(0, 0), cd(0, 0), cd(b, 0)};
        basis.e[1] = {cd(b, 0), cd(0, 0), cd(0, 0), cd(-a, 0)};
        basis.e[2] = {cd(0, 0), cd(a, 0), cd(b, 0), cd(0, 0)};
        basis.e[3] = {cd(0, 0), cd(b, 0), cd(-a, 0), cd(0, 0)};
        return basis;
    }

    static BellBasis standard() {
        const double r = 0.70710678118654752440084436210485;
        return from_amplitudes(r, r);
    }

    static BellBasis from_alpha(double alpha) {
        return from_amplitudes(std::sin(0.78539816339744830962 + alpha),
                               std::cos(0.78539816339744830962 + alpha));
    }
};

// Born-rule box: p(ab|x_A x_B) = tr(rho P_A^{x,a} x P_B^{y,b}).
inline JointBox box_from_state(const DensityMatrix& rho) {
    JointBox box;
    for (Setting x : kSettings) {
        for (Setting y : kSettings) {
            Block& blk = box.block(x, y);
            double* slots[4] = {&blk.pp, &blk.pm, &blk.mp, &blk.mm};
            int slot = 0;
            for (bool pa : {true, false}) {
                for (bool pb : {true, false}) {
                    Mat4 proj = kron(pauli_projector(x, pa), pauli_projector(y, pb));
                    *slots[slot++] = trace_product(rho.m, proj).real();
                }
            }
        }
    }
    return box;
}

// p_k = <e_k| rho |e_k> in the basis order (phi-like +, -, psi-like +, -).
inline BellProbabilities bell_probs_quantum(const DensityMatrix& rho, const BellBasis& basis) {
    std::array<double, 4> p{};
    for (int k = 0; k < 4; ++k) {
        cd acc(0, 0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) acc += std::conj(basis.e[k][i]) * rho.m[i][j] * basis.e[k][j];
        p[k] = acc.real();
    }
    return {p[0], p[1], p[2], p[3]};
}

// Verifies the three coarse-graining identities tying Bell projectors to
// equal-outcome products of Pauli projectors, e.g.
// |phi+><phi+| + |psi+><psi+| = P^{X,+} x P^{X,+} + P^{X,-} x P^{X,-}.
inline double projector_identity_check() {
    BellBasis bell = BellBasis::standard();
    Mat4 phi_p = outer(bell.e[0]);
    Mat4 phi_m = outer(bell.e[1]);
    Mat4 psi_p = outer(bell.e[2]);

    auto parity_sum = [](Setting s) {
        Mat4 plus = kron(pauli_projector(s, true), pauli_projector(s, true));
        Mat4 minus = kron(pauli_projector(s, false), pauli_projector(s, false));
        return add(plus, minus);
    };

    const std::array<std::pair<Mat4, Setting>, 3> identities{
        std::pair{add(phi_p, psi_p), Setting::X},
        {add(phi_m, psi_p), Setting::Y},
        {add(phi_p, phi_m), Setting::Z},
    };

    double max_dev = 0.0;
    for (const auto& [lhs, s] : identities) {
        Mat4 rhs = parity_sum(s);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) max_dev = std::max(max_dev, std::abs(lhs[i][j] - rhs[i][j]));
    }
    return max_dev;
}

struct ChshOperatorMax {
    double value = 0.0;
    DensityMatrix state;  // projector onto the top eigenvector
};

// Top eigenvalue and eigenstate of
// A1 x B1 + A1 x B2 + A2 x B1 - A2 x B2 with Pauli observables.
inline ChshOperatorMax chsh_operator_max(const ChshSpec& spec) {
    spec.validate();
    Mat4 op{};
    const std::array<std::tuple<Setting, Setting, double>, 4> terms{
        std::tuple{spec.a1, spec.b1, 1.0}, {spec.a1, spec.b2, 1.0}, {spec.a2, spec.b1, 1.0},
        {spec.a2, spec.b2, -1.0}};
    for (const auto& [x, y, sgn] : terms) {
        Mat4 term = kron(pauli(x), pauli(y));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) op[i][j] += sgn * term[i][j];
    }
    EigenResult eig = jacobi_hermitian(op);
    ChshOperatorMax out;
    out.value = eig.values[3];
    Vec4 top;
    for (int i = 0; i < 4; ++i) top[i] = eig.vectors[i][3];
    out.state = DensityMatrix::pure(top);
    return out;
}

// Random state rho = G G^dag / tr(G G^dag) with G a 4 x rank complex
// Gaussian matrix; deterministic under the seed.
inline DensityMatrix random_state(std::uint64_t seed, int rank = 4) {
    if (rank < 1 || rank > 4) throw std::invalid_argument("rank must be 1..4");
    Rng rng(seed);
    std::array<std::array<cd, 4>, 4> g{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < rank; ++j) g[i][j] = cd(rng.normal(), rng.normal());
    DensityMatrix rho;
    double tr = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            cd acc(0, 0);
            for (int k = 0; k < rank; ++k) acc += g[i][k] * std::conj(g[j][k]);
            rho.m[i][j] = acc;
        }
        tr += rho.m[i][i].real();
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) rho.m[i][j] /= tr;
    return rho;
}

}  // namespace bellbox::quantum
