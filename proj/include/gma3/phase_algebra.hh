#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gma3/errors.hh"

// Pointwise algebra of the supercritical deformed Hermitian Yang-Mills
// equation on a complex 3-fold, written in its generalized Monge-Ampere
// form.  Everything here acts on the relative spectrum lambda of a real
// (1,1)-form Omega_phi against the metric form omega:
//
//   lambda1*lambda2*lambda3
//     = c * sec^2(th) * (lambda1+lambda2+lambda3) + 2 t tan(th) sec^2(th)
//
// with path parameter t in [0,1] and path constant c.  The admissible cone,
// the rescaled quotient F~, its gradient/Hessian and the convexity
// quantities below are the inputs to both the continuation solver and the
// randomized lemma checks.

namespace gma3 {

using Complex = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;

/// Average phase angle of the problem with its trigonometry cached.
/// Supported range is the supercritical branch (pi/2, 3pi/2), bounded away
/// from both ends (where sec^2 diverges) by a margin.  cos(th) < 0 on the
/// whole range, which fixes the signs of sec(th) and, via tan(th), of
/// sin(th).
class PhaseParameter {
 public:
  static PhaseParameter from_angle(double theta_hat, double margin = 1e-6);

  /// Builds the parameter from an exact tangent value: theta_hat is
  /// recovered as pi + atan(tan_theta).  Use this when tan(th) is known in
  /// closed form (e.g. -1); it keeps sec^2 = 1 + tan^2 free of the rounding
  /// that tan(theta_hat) would introduce.
  static PhaseParameter from_tangent(double tan_theta);

  double theta_hat() const { return theta_hat_; }
  double tan_theta() const { return tan_theta_; }
  double sec2_theta() const { return sec2_theta_; }
  double sin2_theta() const { return sin2_theta_; }
  double cos2_theta() const { return 1.0 / sec2_theta_; }
  double abs_sec_theta() const;
  double cos_theta() const;  // always negative here
  double sin_theta() const;  // tan * cos
  double csc_theta() const;  // singular at theta_hat = pi

 private:
  PhaseParameter(double theta_hat, double tan_theta);

  double theta_hat_;
  double tan_theta_;
  double sec2_theta_;
  double sin2_theta_;
};

/// Coefficient matrix of a real (1,1)-form in the frame
/// sqrt(-1) dz^j ^ dz~^k.  Reality of the form == hermiticity of m.
struct HermitianForm {
  Matrix3c m = Matrix3c::Zero();

  static HermitianForm zero() { return {}; }
  static HermitianForm identity(double scale = 1.0);
  static HermitianForm diagonal(double a, double b, double c);

  /// Symmetrizes raw and verifies it was Hermitian to begin with
  /// (deviation <= tol * scale).
  static HermitianForm from_matrix(const Matrix3c& raw, double tol = 1e-12);
};

/// Eigenvalues of the pencil (alpha, omega), i.e. of the endomorphism
/// omega^{-1} alpha, sorted descending: lambda[0] >= lambda[1] >= lambda[2].
struct RelativeSpectrum {
  std::array<double, 3> lambda{};

  double sigma1() const { return lambda[0] + lambda[1] + lambda[2]; }
  double sigma2() const {
    return lambda[0] * lambda[1] + lambda[0] * lambda[2] +
           lambda[1] * lambda[2];
  }
  double sigma3() const { return lambda[0] * lambda[1] * lambda[2]; }
};

/// Spectrum plus the frame change W that diagonalizes the pencil: for any
/// (1,1)-form with matrix H, the coefficients in the eigenframe are
/// (W^* H W); in particular W^* omega W = I and W^* alpha W = diag(lambda).
struct RelativeFrame {
  RelativeSpectrum spectrum;
  Matrix3c transport;
};

/// Worst-case slack of the three cone conditions:
///   lambda_i >= 0,
///   lambda_i lambda_j >= c sec^2(th)      (i != j),
///   c (lambda_i + lambda_j) + 2 t tan(th) >= 0.
struct ConeMargins {
  double min_lambda = 0.0;
  double min_pair_product = 0.0;  // min_ij lambda_i lambda_j - c sec^2
  double min_pair_sum = 0.0;      // min_ij c(lambda_i+lambda_j) + 2t tan
  bool admissible() const {
    return min_lambda > 0.0 && min_pair_product > 0.0 && min_pair_sum > 0.0;
  }
};

/// E, D, B of the reduced convexity form E v1^2 + D v2^2 + 2 B v1 v2 and the
/// discriminant factor g with E*D - B^2 = 4 (c sigma1 + 2 t tan)^2 g,
///   g = c^2 sigma2 + 2 c t tan(th) sigma1 + 3 t^2 tan^2(th).
struct ConvexityQuantities {
  double E = 0.0;
  double D = 0.0;
  double B = 0.0;
  double g = 0.0;
};

/// Pointwise subsolution test for threefolds: Omega > 0 and
/// 3 Omega^2 - 3 sec^2(th) omega^2 > 0, i.e. relative eigenvalues positive
/// with all pairwise products above sec^2(th).
struct SubsolutionMargins {
  double min_lambda = 0.0;
  double min_pair_product = 0.0;  // min_ij lambda_i lambda_j - sec^2
  bool ok() const { return min_lambda > 0.0 && min_pair_product > 0.0; }
};

/// Relative spectrum of alpha against omega.  omega must be Hermitian
/// positive-definite with smallest eigenvalue > pd_floor, else
/// degenerate_metric_error.  Implemented through a Cholesky factor L of
/// omega and the Hermitian eigenproblem of L^{-1} alpha L^{-*}.
RelativeSpectrum relative_spectrum(const HermitianForm& omega,
                                   const HermitianForm& alpha,
                                   double pd_floor = 1e-10);

/// Spectrum together with the diagonalizing frame (see RelativeFrame).
RelativeFrame relative_frame(const HermitianForm& omega,
                             const HermitianForm& alpha,
                             double pd_floor = 1e-10);

/// Pointwise average angle sum_i arctan(a_i) in (-3pi/2, 3pi/2), a_i the
/// relative eigenvalues of the curvature form against omega.
double phase(const HermitianForm& omega, const HermitianForm& i_theta,
             double pd_floor = 1e-10);

/// Defect of the original equation: Im(Z) - tan(th) Re(Z) for
/// Z = prod_j (1 + i a_j).  Vanishes iff the pointwise phase equals
/// theta_hat mod pi.
double dhym_residual(const HermitianForm& omega, const HermitianForm& i_theta,
                     const PhaseParameter& phase, double pd_floor = 1e-10);

/// Defect of the Monge-Ampere form at a spectrum:
/// sigma3 - c sec^2 sigma1 - 2 t tan sec^2.
double gma_residual(const RelativeSpectrum& s, double c, double t,
                    const PhaseParameter& phase);

/// F = (c sigma1 + 2 t tan) / sigma3 and its rescaling F~ = sec^2 * F; the
/// equation is the level set F~ = 1.  singular_determinant_error when
/// sigma3 = 0.
double F_value(const RelativeSpectrum& s, double c, double t,
               const PhaseParameter& phase);
double F_tilde(const RelativeSpectrum& s, double c, double t,
               const PhaseParameter& phase);

ConeMargins cone_check(const RelativeSpectrum& s, double c, double t,
                       const PhaseParameter& phase);

/// Third eigenvalue forced by the level set F~ = 1 given the two largest:
///   lambda3 = sec^2 (c (l1 + l2) + 2 t tan) / (l1 l2 - c sec^2).
/// outside_cone_error when the denominator is not positive.
double solve_lambda3(double lambda1, double lambda2, double c, double t,
                     const PhaseParameter& phase);

/// dF/dlambda_mu = (c - (c sigma1 + 2 t tan)/lambda_mu) / sigma3.
/// Strictly negative in the admissible cone (F is elliptic decreasing).
std::array<double, 3> gradient_F(const RelativeSpectrum& s, double c, double t,
                                 const PhaseParameter& phase);

/// min_mu dF/dlambda_mu * lambda_mu + cos^2(th).  Nonnegative on the level
/// set F~ = 1 inside the cone; equals cos^2 * c * lambda_mu / S pointwise.
double euler_bound_check(const RelativeSpectrum& s, double c, double t,
                         const PhaseParameter& phase);

ConvexityQuantities convexity_quantities(const RelativeSpectrum& s, double c,
                                         double t,
                                         const PhaseParameter& phase);

/// Quadratic form of the second derivative of F at the diagonal point, with
/// Hermitian direction b.  In terms of v_mu = b_mumu / lambda_mu and
/// S = c sigma1 + 2 t tan:
///   Q = [ S sum_{mu,al} |b_mual|^2/(l_mu l_al) + S (sum v)^2
///         - 2 c (sum lambda v)(sum v) ] / sigma3.
double hessian_quadratic_form(const RelativeSpectrum& s, double c, double t,
                              const PhaseParameter& phase,
                              const HermitianForm& b);

/// Projects the diagonal of b onto the constraint
///   sum_mu (c - S/lambda_mu) b_mumu = 0
/// (w-weighted removal of one degree of freedom; off-diagonal untouched).
/// The weights are all nonzero in the cone, so this is well defined.
HermitianForm constraint_project(const RelativeSpectrum& s, double c, double t,
                                 const PhaseParameter& phase,
                                 const HermitianForm& b);

SubsolutionMargins subsolution_check_n3(const HermitianForm& omega,
                                        const HermitianForm& Omega,
                                        const PhaseParameter& phase,
                                        double pd_floor = 1e-10);

/// Coefficients b_0 .. b_{n-1} of the dimension-n subsolution polynomial
///   n Omega^{n-1} - sum_{k=0}^{n-1} b_k k Omega^{k-1} omega^{n-k} > 0.
/// For even n:  b_k = csc^{n-k}(th) (-1)^{n-k+1} C(n,k) sin((n-k-1) th).
/// For odd n:   b_k = sec^{n+1-k}(th) (-1)^{floor((n+k+1)/2)} C(n,k)
///                    * [k even ? sin : cos]((n-k-1) th).
/// The family also has a k = n member, but it merely rescales the leading
/// n Omega^{n-1} term (for odd n it evaluates to -1), so the sum here stops
/// at n-1; that convention reproduces the threefold test
/// 3 Omega^2 - 3 sec^2 omega^2 used by subsolution_check_n3.
std::vector<double> subsolution_coefficients(int n,
                                             const PhaseParameter& phase);

}  // namespace gma3
