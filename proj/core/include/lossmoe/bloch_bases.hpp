#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace lossmoe {

using Complex = std::complex<double>;
using Ket = Eigen::Vector2cd;
using Qubit = Eigen::Matrix2cd;

/// Polar and azimuthal angle of the |0_x> vector of a basis, both in [0, pi).
struct BlochAngles {
  double theta = 0.0;
  double phi = 0.0;

  /// Throws ParameterError unless both angles are finite and in [0, pi).
  static BlochAngles make(double theta, double phi);
};

/// An orthonormal qubit basis {|0_x>, |1_x>}.
struct Basis {
  Ket ket0;
  Ket ket1;
  std::size_t label = 0;

  const Ket& ket(int outcome) const { return outcome == 0 ? ket0 : ket1; }
  /// Rank-1 projector |a_x><a_x|.
  Qubit projector(int outcome) const;
};

/// ket0 = cos(t/2)|0> + e^{i p} sin(t/2)|1>, ket1 = sin(t/2)|0> - e^{i p} cos(t/2)|1>.
Basis basis_from_angles(const BlochAngles& angles, std::size_t label = 0);

/// The referee's m ordered bases with all pairwise overlaps <a_x|b_x'>
/// precomputed. Immutable after construction.
class MeasurementFamily {
 public:
  /// Builds a family from explicit bases. Each basis is checked for
  /// orthonormality and completeness to 1e-12.
  explicit MeasurementFamily(std::vector<Basis> bases, int m_theta = 0,
                             int m_phi = 0);

  std::size_t size() const { return bases_.size(); }
  int m_theta() const { return m_theta_; }
  int m_phi() const { return m_phi_; }
  const Basis& basis(std::size_t x) const { return bases_.at(x); }
  const std::vector<Basis>& bases() const { return bases_; }
  /// Angles used to build basis x (zero for families built from raw bases).
  const BlochAngles& angles(std::size_t x) const { return angles_.at(x); }

  /// <a_x | b_x'>.
  Complex overlap(int a, std::size_t x, int b, std::size_t xp) const;
  /// V_a^x as a 2x2 matrix.
  Qubit projector(int a, std::size_t x) const { return basis(x).projector(a); }

 private:
  friend MeasurementFamily discretize_bases(int m_theta, int m_phi);

  std::vector<Basis> bases_;
  std::vector<BlochAngles> angles_;
  std::vector<Complex> overlaps_;  // index ((a*m + x)*2 + b)*m + x'
  int m_theta_ = 0;
  int m_phi_ = 0;
};

/// Uniform discretization of the Bloch sphere into
/// m = m_phi * (m_theta - 1) + 1 bases. The computational basis (theta = 0)
/// sits at index m - 1.
MeasurementFamily discretize_bases(int m_theta, int m_phi);

/// Largest |eigenvalue| of a 2x2 Hermitian matrix from its trace and
/// determinant. Throws ValidationError if the input is not Hermitian (1e-12).
double hermitian2_opnorm(const Qubit& matrix);

/// 2 - ||V_a^x + V_b^x'||.
double coeff_prop1(int a, std::size_t x, int b, std::size_t xp,
                   const MeasurementFamily& family);

/// Coefficients of the second error inequality for one (a, x, b, x') term.
struct Prop2Coefficients {
  double lhs = 0.0;      ///< 4 - ||M||
  double rhs_x = 0.0;    ///< 2 + max_{i,j} |beta_i^j|^2
  double rhs_xp = 0.0;   ///< 2 + max_{i,j} |alpha_i^j|^2
};

/// The Hermitian matrix M whose norm enters the second error inequality.
/// alpha_i^a = <i_x'|a_x>, beta_j^b = <j_x|b_x'>.
Qubit prop2_matrix(int a, std::size_t x, int b, std::size_t xp,
                   const MeasurementFamily& family);

Prop2Coefficients coeff_prop2(int a, std::size_t x, int b, std::size_t xp,
                              const MeasurementFamily& family);

}  // namespace lossmoe
