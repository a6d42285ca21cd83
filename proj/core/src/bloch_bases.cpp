#include "lossmoe/bloch_bases.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lossmoe/error.hpp"

namespace lossmoe {

namespace {

constexpr double kBasisTol = 1e-12;

void check_basis(const Basis& basis) {
  const double n0 = basis.ket0.squaredNorm();
  const double n1 = basis.ket1.squaredNorm();
  const double cross = std::abs(basis.ket0.dot(basis.ket1));
  if (std::abs(n0 - 1.0) > kBasisTol || std::abs(n1 - 1.0) > kBasisTol ||
      cross > kBasisTol) {
    throw ValidationError("basis " + std::to_string(basis.label) +
                          " is not orthonormal");
  }
  const Qubit completeness =
      basis.projector(0) + basis.projector(1) - Qubit::Identity();
  if (completeness.cwiseAbs().maxCoeff() > kBasisTol) {
    throw ValidationError("basis " + std::to_string(basis.label) +
                          " projectors do not sum to identity");
  }
}

}  // namespace

BlochAngles BlochAngles::make(double theta, double phi) {
  constexpr double pi = std::numbers::pi;
  if (!std::isfinite(theta) || !std::isfinite(phi) || theta < 0.0 ||
      theta >= pi || phi < 0.0 || phi >= pi) {
    throw ParameterError("Bloch angles must be finite and lie in [0, pi)");
  }
  return BlochAngles{theta, phi};
}

Qubit Basis::projector(int outcome) const {
  const Ket& v = ket(outcome);
  return v * v.adjoint();
}

Basis basis_from_angles(const BlochAngles& angles, std::size_t label) {
  const double c = std::cos(angles.theta / 2.0);
  const double s = std::sin(angles.theta / 2.0);
  const Complex phase = std::polar(1.0, angles.phi);
  Basis basis;
  basis.ket0 << Complex(c, 0.0), phase * s;
  basis.ket1 << Complex(s, 0.0), -phase * c;
  basis.label = label;
  return basis;
}

MeasurementFamily::MeasurementFamily(std::vector<Basis> bases, int m_theta,
                                     int m_phi)
    : bases_(std::move(bases)), m_theta_(m_theta), m_phi_(m_phi) {
  if (bases_.empty()) throw ParameterError("measurement family is empty");
  const std::size_t m = bases_.size();
  for (std::size_t x = 0; x < m; ++x) {
    bases_[x].label = x;
    check_basis(bases_[x]);
  }
  angles_.assign(m, BlochAngles{});
  overlaps_.resize(4 * m * m);
  for (int a = 0; a < 2; ++a)
    for (std::size_t x = 0; x < m; ++x)
      for (int b = 0; b < 2; ++b)
        for (std::size_t xp = 0; xp < m; ++xp)
          overlaps_[((a * m + x) * 2 + b) * m + xp] =
              bases_[x].ket(a).dot(bases_[xp].ket(b));
}

Complex MeasurementFamily::overlap(int a, std::size_t x, int b,
                                   std::size_t xp) const {
  const std::size_t m = bases_.size();
  if (a < 0 || a > 1 || b < 0 || b > 1 || x >= m || xp >= m) {
    throw ParameterError("overlap index out of range");
  }
  return overlaps_[((a * m + x) * 2 + b) * m + xp];
}

MeasurementFamily discretize_bases(int m_theta, int m_phi) {
  if (m_theta < 2 || m_phi < 1) {
    throw ParameterError("discretize_bases needs m_theta >= 2 and m_phi >= 1");
  }
  const int m = m_phi * (m_theta - 1) + 1;
  std::vector<Basis> bases;
  std::vector<BlochAngles> angles;
  bases.reserve(m);
  for (int x = 0; x < m; ++x) {
    const double u = 2.0 / m_theta * (x / m_phi + 1) - 1.0;
    // Clamp guards acos against 1 + ulp at the pole.
    const double theta = std::acos(std::clamp(u, -1.0, 1.0));
    const double phi = std::numbers::pi * (x % m_phi) / m_phi;
    angles.push_back(BlochAngles::make(theta, phi));
    bases.push_back(basis_from_angles(angles.back(), x));
  }
  MeasurementFamily family(std::move(bases), m_theta, m_phi);
  family.angles_ = std::move(angles);
  return family;
}

double hermitian2_opnorm(const Qubit& matrix) {
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > kBasisTol) {
    throw ValidationError("hermitian2_opnorm: matrix is not Hermitian");
  }
  const double p = matrix(0, 0).real();
  const double q = matrix(1, 1).real();
  const double half_trace = 0.5 * (p + q);
  const double radius = std::hypot(0.5 * (p - q), std::abs(matrix(0, 1)));
  return std::max(std::abs(half_trace + radius), std::abs(half_trace - radius));
}

double coeff_prop1(int a, std::size_t x, int b, std::size_t xp,
                   const MeasurementFamily& family) {
  return 2.0 - hermitian2_opnorm(family.projector(a, x) +
                                 family.projector(b, xp));
}

Qubit prop2_matrix(int a, std::size_t x, int b, std::size_t xp,
                   const MeasurementFamily& family) {
  const Basis& bx = family.basis(x);
  const Basis& bxp = family.basis(xp);
  // alpha_i^a = <i_x'|a_x>, beta_j^b = <j_x|b_x'>
  const Complex alpha0 = family.overlap(0, xp, a, x);
  const Complex alpha1 = family.overlap(1, xp, a, x);
  const Complex beta0 = family.overlap(0, x, b, xp);
  const Complex beta1 = family.overlap(1, x, b, xp);
  const double beta_ab = std::norm(family.overlap(a, x, b, xp));
  const double alpha_ba = std::norm(family.overlap(b, xp, a, x));

  const Qubit cross_x = beta0 * std::conj(beta1) * bx.ket0 * bx.ket1.adjoint();
  const Qubit cross_xp =
      alpha0 * std::conj(alpha1) * bxp.ket0 * bxp.ket1.adjoint();
  Qubit m = (1.0 + beta_ab) * bx.projector(a) +
            (1.0 + alpha_ba) * bxp.projector(b);
  m += cross_x + cross_x.adjoint();
  m += cross_xp + cross_xp.adjoint();
  return m;
}

Prop2Coefficients coeff_prop2(int a, std::size_t x, int b, std::size_t xp,
                              const MeasurementFamily& family) {
  double max_beta = 0.0;
  double max_alpha = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      max_beta = std::max(max_beta, std::norm(family.overlap(i, x, j, xp)));
      max_alpha = std::max(max_alpha, std::norm(family.overlap(i, xp, j, x)));
    }
  }
  Prop2Coefficients out;
  out.lhs = 4.0 - hermitian2_opnorm(prop2_matrix(a, x, b, xp, family));
  out.rhs_x = 2.0 + max_beta;
  out.rhs_xp = 2.0 + max_alpha;
  return out;
}

}  // namespace lossmoe
