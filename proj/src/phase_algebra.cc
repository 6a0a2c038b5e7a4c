#include "gma3/phase_algebra.hh"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gma3 {

namespace {

constexpr double kPi = std::numbers::pi;

double ipow(double base, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Cholesky factor of omega after the positivity check shared by all pencil
// routines.
Eigen::LLT<Matrix3c> metric_factor(const HermitianForm& omega,
                                   double pd_floor) {
  Eigen::SelfAdjointEigenSolver<Matrix3c> es(omega.m,
                                             Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (!(lo > pd_floor)) {
    std::ostringstream msg;
    msg << "metric form not positive-definite: smallest eigenvalue " << lo
        << " <= floor " << pd_floor;
    throw degenerate_metric_error(msg.str());
  }
  Eigen::LLT<Matrix3c> llt(omega.m);
  if (llt.info() != Eigen::Success)
    throw degenerate_metric_error("Cholesky factorization of metric failed");
  return llt;
}

Matrix3c reduced_pencil(const Eigen::LLT<Matrix3c>& llt,
                        const HermitianForm& alpha) {
  const auto L = llt.matrixL();
  // M = L^{-1} alpha L^{-*}, symmetrized against rounding.
  Matrix3c tmp = L.solve(alpha.m);
  Matrix3c m = L.solve(tmp.adjoint().eval()).adjoint();
  return 0.5 * (m + m.adjoint().eval());
}

}  // namespace

PhaseParameter::PhaseParameter(double theta_hat, double tan_theta)
    : theta_hat_(theta_hat),
      tan_theta_(tan_theta),
      sec2_theta_(1.0 + tan_theta * tan_theta),
      sin2_theta_(tan_theta * tan_theta / (1.0 + tan_theta * tan_theta)) {}

PhaseParameter PhaseParameter::from_angle(double theta_hat, double margin) {
  if (!(theta_hat > kPi / 2 + margin && theta_hat < 3 * kPi / 2 - margin)) {
    std::ostringstream msg;
    msg << "phase angle " << theta_hat
        << " outside supercritical range (pi/2, 3pi/2) with margin "
        << margin;
    throw unsupported_phase_error(msg.str());
  }
  return PhaseParameter(theta_hat, std::tan(theta_hat));
}

PhaseParameter PhaseParameter::from_tangent(double tan_theta) {
  if (!std::isfinite(tan_theta))
    throw unsupported_phase_error("tangent of phase angle must be finite");
  return PhaseParameter(kPi + std::atan(tan_theta), tan_theta);
}

double PhaseParameter::abs_sec_theta() const { return std::sqrt(sec2_theta_); }

double PhaseParameter::cos_theta() const {
  return -1.0 / std::sqrt(sec2_theta_);
}

double PhaseParameter::sin_theta() const {
  return tan_theta_ * cos_theta();
}

double PhaseParameter::csc_theta() const {
  const double s = sin_theta();
  if (s == 0.0)
    throw domain_error("csc(theta_hat) undefined at theta_hat = pi");
  return 1.0 / s;
}

HermitianForm HermitianForm::identity(double scale) {
  HermitianForm f;
  f.m = scale * Matrix3c::Identity();
  return f;
}

HermitianForm HermitianForm::diagonal(double a, double b, double c) {
  HermitianForm f;
  f.m = Eigen::Vector3cd(a, b, c).asDiagonal();
  return f;
}

HermitianForm HermitianForm::from_matrix(const Matrix3c& raw, double tol) {
  const double dev = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, raw.cwiseAbs().maxCoeff());
  if (dev > tol * scale) {
    std::ostringstream msg;
    msg << "matrix is not Hermitian: max deviation " << dev << " at scale "
        << scale;
    throw domain_error(msg.str());
  }
  HermitianForm f;
  f.m = 0.5 * (raw + raw.adjoint().eval());
  return f;
}

RelativeSpectrum relative_spectrum(const HermitianForm& omega,
                                   const HermitianForm& alpha,
                                   double pd_floor) {
  const auto llt = metric_factor(omega, pd_floor);
  Eigen::SelfAdjointEigenSolver<Matrix3c> es(reduced_pencil(llt, alpha),
                                             Eigen::EigenvaluesOnly);
  RelativeSpectrum s;
  // Eigen returns ascending order.
  s.lambda = {es.eigenvalues()[2], es.eigenvalues()[1], es.eigenvalues()[0]};
  return s;
}

RelativeFrame relative_frame(const HermitianForm& omega,
                             const HermitianForm& alpha, double pd_floor) {
  const auto llt = metric_factor(omega, pd_floor);
  Eigen::SelfAdjointEigenSolver<Matrix3c> es(reduced_pencil(llt, alpha));
  RelativeFrame f;
  Matrix3c u;
  for (int k = 0; k < 3; ++k) {
    f.spectrum.lambda[k] = es.eigenvalues()[2 - k];
    u.col(k) = es.eigenvectors().col(2 - k);
  }
  // W = L^{-*} U, so that W^* alpha W = diag(lambda), W^* omega W = I.
  f.transport = llt.matrixL().adjoint().solve(u);
  return f;
}

double phase(const HermitianForm& omega, const HermitianForm& i_theta,
             double pd_floor) {
  const RelativeSpectrum a = relative_spectrum(omega, i_theta, pd_floor);
  return std::atan(a.lambda[0]) + std::atan(a.lambda[1]) +
         std::atan(a.lambda[2]);
}

double dhym_residual(const HermitianForm& omega, const HermitianForm& i_theta,
                     const PhaseParameter& phase, double pd_floor) {
  const RelativeSpectrum a = relative_spectrum(omega, i_theta, pd_floor);
  Complex z(1.0, 0.0);
  for (double ai : a.lambda) z *= Complex(1.0, ai);
  return z.imag() - phase.tan_theta() * z.real();
}

double gma_residual(const RelativeSpectrum& s, double c, double t,
                    const PhaseParameter& phase) {
  return s.sigma3() - c * phase.sec2_theta() * s.sigma1() -
         2.0 * t * phase.tan_theta() * phase.sec2_theta();
}

double F_value(const RelativeSpectrum& s, double c, double t,
               const PhaseParameter& phase) {
  const double det = s.sigma3();
  if (det == 0.0)
    throw singular_determinant_error(
        "F undefined: product of relative eigenvalues is zero");
  return (c * s.sigma1() + 2.0 * t * phase.tan_theta()) / det;
}

double F_tilde(const RelativeSpectrum& s, double c, double t,
               const PhaseParameter& phase) {
  return phase.sec2_theta() * F_value(s, c, t, phase);
}

ConeMargins cone_check(const RelativeSpectrum& s, double c, double t,
                       const PhaseParameter& phase) {
  const auto& l = s.lambda;
  ConeMargins m;
  m.min_lambda = std::min({l[0], l[1], l[2]});
  const double csec2 = c * phase.sec2_theta();
  m.min_pair_product =
      std::min({l[0] * l[1], l[0] * l[2], l[1] * l[2]}) - csec2;
  const double shift = 2.0 * t * phase.tan_theta();
  m.min_pair_sum =
      std::min({c * (l[0] + l[1]), c * (l[0] + l[2]), c * (l[1] + l[2])}) +
      shift;
  return m;
}

double solve_lambda3(double lambda1, double lambda2, double c, double t,
                     const PhaseParameter& phase) {
  const double denom = lambda1 * lambda2 - c * phase.sec2_theta();
  if (!(denom > 0.0)) {
    std::ostringstream msg;
    msg << "pair product margin " << denom
        << " not positive; level set has no admissible third eigenvalue";
    throw outside_cone_error(msg.str());
  }
  return phase.sec2_theta() *
         (c * (lambda1 + lambda2) + 2.0 * t * phase.tan_theta()) / denom;
}

std::array<double, 3> gradient_F(const RelativeSpectrum& s, double c, double t,
                                 const PhaseParameter& phase) {
  const double det = s.sigma3();
  if (det == 0.0)
    throw singular_determinant_error(
        "gradient of F undefined: zero eigenvalue product");
  const double S = c * s.sigma1() + 2.0 * t * phase.tan_theta();
  std::array<double, 3> g;
  for (int i = 0; i < 3; ++i) g[i] = (c - S / s.lambda[i]) / det;
  return g;
}

double euler_bound_check(const RelativeSpectrum& s, double c, double t,
                         const PhaseParameter& phase) {
  const auto g = gradient_F(s, c, t, phase);
  double worst = g[0] * s.lambda[0];
  for (int i = 1; i < 3; ++i) worst = std::min(worst, g[i] * s.lambda[i]);
  return worst + phase.cos2_theta();
}

ConvexityQuantities convexity_quantities(const RelativeSpectrum& s, double c,
                                         double t,
                                         const PhaseParameter& phase) {
  const auto& l = s.lambda;
  const double tn = phase.tan_theta();
  const double S = c * s.sigma1() + 2.0 * t * tn;
  ConvexityQuantities q;
  q.E = 2.0 * (c * (l[1] + l[2]) + 2.0 * t * tn) * S;
  q.D = 2.0 * (c * (l[0] + l[2]) + 2.0 * t * tn) * S;
  q.B = 2.0 * (c * l[2] + t * tn) * S;
  q.g = c * c * s.sigma2() + 2.0 * c * t * tn * s.sigma1() +
        3.0 * t * t * tn * tn;
  return q;
}

double hessian_quadratic_form(const RelativeSpectrum& s, double c, double t,
                              const PhaseParameter& phase,
                              const HermitianForm& b) {
  const auto& l = s.lambda;
  const double det = s.sigma3();
  if (det == 0.0)
    throw singular_determinant_error(
        "Hessian of F undefined: zero eigenvalue product");
  const double S = c * s.sigma1() + 2.0 * t * phase.tan_theta();

  double sum_v = 0.0, sum_lv = 0.0, t2 = 0.0;
  for (int mu = 0; mu < 3; ++mu) {
    const double v = b.m(mu, mu).real() / l[mu];
    sum_v += v;
    sum_lv += l[mu] * v;
    for (int al = 0; al < 3; ++al)
      t2 += std::norm(b.m(mu, al)) / (l[mu] * l[al]);
  }
  return (S * t2 + S * sum_v * sum_v - 2.0 * c * sum_lv * sum_v) / det;
}

HermitianForm constraint_project(const RelativeSpectrum& s, double c, double t,
                                 const PhaseParameter& phase,
                                 const HermitianForm& b) {
  const double S = c * s.sigma1() + 2.0 * t * phase.tan_theta();
  std::array<double, 3> w;
  double ww = 0.0, wd = 0.0;
  for (int mu = 0; mu < 3; ++mu) {
    w[mu] = c - S / s.lambda[mu];
    ww += w[mu] * w[mu];
    wd += w[mu] * b.m(mu, mu).real();
  }
  if (ww == 0.0)
    throw outside_cone_error("constraint weights vanish identically");
  HermitianForm out = b;
  for (int mu = 0; mu < 3; ++mu)
    out.m(mu, mu) = b.m(mu, mu).real() - w[mu] * wd / ww;
  return out;
}

SubsolutionMargins subsolution_check_n3(const HermitianForm& omega,
                                        const HermitianForm& Omega,
                                        const PhaseParameter& phase,
                                        double pd_floor) {
  const RelativeSpectrum s = relative_spectrum(omega, Omega, pd_floor);
  const auto& l = s.lambda;
  SubsolutionMargins m;
  m.min_lambda = std::min({l[0], l[1], l[2]});
  m.min_pair_product =
      std::min({l[0] * l[1], l[0] * l[2], l[1] * l[2]}) - phase.sec2_theta();
  return m;
}

std::vector<double> subsolution_coefficients(int n,
                                             const PhaseParameter& phase) {
  if (n < 1) throw domain_error("subsolution coefficients need n >= 1");
  std::vector<double> b(static_cast<std::size_t>(n));
  const double th = phase.theta_hat();
  if (n % 2 == 0) {
    const double csc = phase.csc_theta();
    for (int k = 0; k < n; ++k) {
      const double sign = ((n - k + 1) % 2 == 0) ? 1.0 : -1.0;
      b[k] = ipow(csc, n - k) * sign * static_cast<double>(binomial(n, k)) *
             std::sin((n - k - 1) * th);
    }
  } else {
    const double sec = 1.0 / phase.cos_theta();
    for (int k = 0; k < n; ++k) {
      const double sign = (((n + k + 1) / 2) % 2 == 0) ? 1.0 : -1.0;
      const double trig =
          (k % 2 == 0) ? std::sin((n - k - 1) * th) : std::cos((n - k - 1) * th);
      b[k] = ipow(sec, n + 1 - k) * sign *
             static_cast<double>(binomial(n, k)) * trig;
    }
  }
  return b;
}

}  // namespace gma3
