#pragma once

#include <cmath>
#include <optional>

#include "kinecluster/common.hpp"

namespace kinecluster {

struct LameParams {
    double mu = 0.0;
    double lambda = 0.0;
};

// Standard isotropic conversion from (E, nu).
inline LameParams lame_from_youngs(double E, double nu) {
    if (E <= 0.0) throw ValidationError("material: Young's modulus must be > 0");
    if (nu <= -1.0 || nu >= 0.5) throw ValidationError("material: Poisson ratio must lie in (-1, 0.5)");
    LameParams p;
    p.mu = E / (2.0 * (1.0 + nu));
    p.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    return p;
}

class InvertedStateError : public SolverError {
public:
    using SolverError::SolverError;
};

namespace detail {

// Plane strain: the 2x2 deformation gradient embeds as diag-augmented 3x3
// with F33 = 1, so tr(F^T F) gains +1 and det is unchanged.
inline double nh_energy_unchecked(const Mat2& F, double mu, double lambda, double J) {
    const double trC = F.squaredNorm() + 1.0;
    const double logJ = std::log(J);
    return 0.5 * mu * (trC - 3.0) - mu * logJ + 0.5 * lambda * logJ * logJ;
}

}  // namespace detail

// Compressible neo-Hookean energy density at a plane-strain deformation
// gradient. Throws InvertedStateError when det F <= 0.
inline double neo_hookean_energy(const Mat2& F, double mu, double lambda) {
    const double J = F.determinant();
    if (J <= 0.0) throw InvertedStateError("neo-Hookean: non-positive det F");
    return detail::nh_energy_unchecked(F, mu, lambda, J);
}

// Non-throwing variant for line searches: empty when the state is inverted.
inline std::optional<double> neo_hookean_energy_checked(const Mat2& F, double mu, double lambda) {
    const double J = F.determinant();
    if (J <= 0.0) return std::nullopt;
    return detail::nh_energy_unchecked(F, mu, lambda, J);
}

// First Piola-Kirchhoff stress P = mu F - (mu - lambda ln J) F^{-T}.
inline Mat2 neo_hookean_pk1(const Mat2& F, double mu, double lambda) {
    const double J = F.determinant();
    if (J <= 0.0) throw InvertedStateError("neo-Hookean: non-positive det F");
    Mat2 FinvT;
    FinvT << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
    FinvT /= J;
    return mu * F - (mu - lambda * std::log(J)) * FinvT;
}

// Material tangent A_{iJkL} = dP_iJ/dF_kL flattened with a = 2*i + J,
// b = 2*k + L. Symmetric (it is an energy Hessian).
inline Eigen::Matrix4d neo_hookean_tangent(const Mat2& F, double mu, double lambda) {
    const double J = F.determinant();
    if (J <= 0.0) throw InvertedStateError("neo-Hookean: non-positive det F");
    Mat2 FinvT;
    FinvT << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
    FinvT /= J;
    const double gamma = mu - lambda * std::log(J);
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    for (int i = 0; i < 2; ++i)
        for (int Jc = 0; Jc < 2; ++Jc)
            for (int k = 0; k < 2; ++k)
                for (int L = 0; L < 2; ++L) {
                    double v = lambda * FinvT(i, Jc) * FinvT(k, L) + gamma * FinvT(i, L) * FinvT(k, Jc);
                    if (i == k && Jc == L) v += mu;
                    A(2 * i + Jc, 2 * k + L) = v;
                }
    return A;
}

// ---------------------------------------------------------------------------
// Holzapfel-Ogden isochoric energy kernel (fiber-reinforced, nearly
// incompressible model; evaluated pointwise on the deviatoric right
// Cauchy-Green tensor).

struct HOParams {
    double a = 0.0, b = 0.0;
    double a_f = 0.0, b_f = 0.0;
    double a_s = 0.0, b_s = 0.0;
    double a_fs = 0.0, b_fs = 0.0;
};

struct HOEnergy {
    double W_g = 0.0, W_f = 0.0, W_s = 0.0, W_fs = 0.0;
    double total() const { return W_g + W_f + W_s + W_fs; }
};

struct HOInvariants {
    double I1 = 0.0, I4f = 0.0, I4s = 0.0, I8fs = 0.0;
};

namespace detail {

// a/(2b) * (exp(b*x) - 1), with the b -> 0 limit a*x/2.
inline double ho_term(double a, double b, double x) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return 0.5 * a * x;
    return a / (2.0 * b) * (std::exp(b * x) - 1.0);
}

}  // namespace detail

inline HOInvariants ho_invariants(const Mat3& Cbar, const Vec3& f0, const Vec3& s0) {
    HOInvariants inv;
    inv.I1 = Cbar.trace();
    inv.I4f = f0.dot(Cbar * f0);
    inv.I4s = s0.dot(Cbar * s0);
    inv.I8fs = f0.dot(Cbar * s0);
    return inv;
}

inline HOEnergy holzapfel_ogden_isochoric_energy(const Mat3& Cbar, const Vec3& f0, const Vec3& s0,
                                                 const HOParams& p) {
    if (std::abs(f0.norm() - 1.0) > 1e-8 || std::abs(s0.norm() - 1.0) > 1e-8)
        throw ValidationError("holzapfel-ogden: fiber/sheet vectors must be unit length");
    if ((Cbar - Cbar.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("holzapfel-ogden: Cbar must be symmetric");
    if (std::abs(Cbar.determinant() - 1.0) > 1e-10)
        throw ValidationError("holzapfel-ogden: Cbar must have unit determinant");
    Eigen::SelfAdjointEigenSolver<Mat3> es(Cbar);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ValidationError("holzapfel-ogden: Cbar must be positive definite");

    const HOInvariants inv = ho_invariants(Cbar, f0, s0);
    HOEnergy w;
    w.W_g = detail::ho_term(p.a, p.b, inv.I1 - 3.0);
    w.W_f = detail::ho_term(p.a_f, p.b_f, (inv.I4f - 1.0) * (inv.I4f - 1.0));
    w.W_s = detail::ho_term(p.a_s, p.b_s, (inv.I4s - 1.0) * (inv.I4s - 1.0));
    w.W_fs = detail::ho_term(p.a_fs, p.b_fs, inv.I8fs * inv.I8fs);
    return w;
}

}  // namespace kinecluster
