#include "oracles.hh"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace gma3::oracles {

namespace {

using CL = std::complex<long double>;

long double det3(const CL m[3][3]) {
  return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
          m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
          m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
      .real();
}

/// p(x) = det(alpha - x omega) sampled at x.
long double char_poly_at(const HermitianForm& omega,
                         const HermitianForm& alpha, long double x) {
  CL m[3][3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      m[r][c] = CL(alpha.m(r, c).real(), alpha.m(r, c).imag()) -
                x * CL(omega.m(r, c).real(), omega.m(r, c).imag());
  return det3(m);
}

/// Coefficients (a0, a1, a2, a3) of p(x) = a0 + a1 x + a2 x^2 + a3 x^3 by
/// interpolation at x = 0, 1, -1, 2.
std::array<long double, 4> char_poly_coeffs(const HermitianForm& omega,
                                            const HermitianForm& alpha) {
  const long double p0 = char_poly_at(omega, alpha, 0.0L);
  const long double p1 = char_poly_at(omega, alpha, 1.0L);
  const long double pm = char_poly_at(omega, alpha, -1.0L);
  const long double p2 = char_poly_at(omega, alpha, 2.0L);
  // Solve the 4x4 Vandermonde by hand:
  //   a0 = p0
  //   a2 = (p1 + pm)/2 - p0
  //   a1 + a3       = (p1 - pm)/2
  //   2 a1 + 8 a3   = p2 - p0 - 4 a2
  const long double a0 = p0;
  const long double a2 = 0.5L * (p1 + pm) - p0;
  const long double s1 = 0.5L * (p1 - pm);            // a1 + a3
  const long double s2 = (p2 - p0 - 4.0L * a2) / 2.0L;  // a1 + 4 a3
  const long double a3 = (s2 - s1) / 3.0L;
  const long double a1 = s1 - a3;
  return {a0, a1, a2, a3};
}

}  // namespace

std::array<double, 3> pencil_sigmas_cubic(const HermitianForm& omega,
                                          const HermitianForm& alpha) {
  const auto a = char_poly_coeffs(omega, alpha);
  // p(x) = det(omega) * (-1) * (x - l1)(x - l2)(x - l3)  when det(omega) > 0:
  // a3 = -det(omega); sigma1 = -a2/a3, sigma2 = a1/a3 * ... expand:
  // p(x) = a3 (x^3 - sigma1 x^2 + sigma2 x - sigma3).
  return {static_cast<double>(-a[2] / a[3]), static_cast<double>(a[1] / a[3]),
          static_cast<double>(-a[0] / a[3])};
}

std::array<double, 3> pencil_spectrum_cubic(const HermitianForm& omega,
                                            const HermitianForm& alpha) {
  const auto c = char_poly_coeffs(omega, alpha);
  // Normalize to x^3 + b x^2 + cx + d, then depress: x = y - b/3.
  const long double b = c[2] / c[3];
  const long double cc = c[1] / c[3];
  const long double d = c[0] / c[3];
  const long double p = cc - b * b / 3.0L;
  const long double q = 2.0L * b * b * b / 27.0L - b * cc / 3.0L + d;

  std::array<long double, 3> y{};
  if (p >= 0.0L) {
    // Triple/near-triple root; the depressed cubic is monotone.  A pencil
    // of Hermitian forms always has three real roots, so p > 0 only by
    // round-off: treat as triple.
    y = {0.0L, 0.0L, 0.0L};
    if (p > 0.0L) {
      const long double r = std::cbrt(-q);
      y = {r, r, r};
    }
  } else {
    const long double m = 2.0L * std::sqrt(-p / 3.0L);
    long double arg = 3.0L * q / (p * m);
    arg = std::clamp(arg, -1.0L, 1.0L);
    const long double theta = std::acos(arg) / 3.0L;
    const long double pi = std::acos(-1.0L);
    for (int k = 0; k < 3; ++k)
      y[static_cast<std::size_t>(k)] =
          m * std::cos(theta - 2.0L * pi * static_cast<long double>(k) / 3.0L);
  }
  std::array<double, 3> x{};
  for (int k = 0; k < 3; ++k)
    x[static_cast<std::size_t>(k)] =
        static_cast<double>(y[static_cast<std::size_t>(k)] - b / 3.0L);
  std::sort(x.begin(), x.end(), std::greater<>());
  return x;
}

long double F_at(const std::array<double, 3>& lambda, const Matrix3c& b,
                 long double s, double c, double t, double tan_theta) {
  CL m[3][3];
  for (int r = 0; r < 3; ++r)
    for (int q = 0; q < 3; ++q) {
      m[r][q] = s * CL(b(r, q).real(), b(r, q).imag());
      if (r == q) m[r][q] += static_cast<long double>(lambda[r]);
    }
  const long double tr = m[0][0].real() + m[1][1].real() + m[2][2].real();
  const long double num = static_cast<long double>(c) * tr +
                          2.0L * static_cast<long double>(t) *
                              static_cast<long double>(tan_theta);
  return num / det3(m);
}

std::array<double, 3> gradient_fd(const std::array<double, 3>& lambda,
                                  double c, double t, double tan_theta,
                                  double h) {
  const auto F = [&](const std::array<double, 3>& l) {
    return F_at(l, Matrix3c::Zero(), 0.0L, c, t, tan_theta);
  };
  std::array<double, 3> g{};
  for (int mu = 0; mu < 3; ++mu) {
    auto lp = lambda, lm = lambda;
    lp[static_cast<std::size_t>(mu)] += h;
    lm[static_cast<std::size_t>(mu)] -= h;
    g[static_cast<std::size_t>(mu)] =
        static_cast<double>((F(lp) - F(lm)) / (2.0L * static_cast<long double>(h)));
  }
  return g;
}

double hessian_fd(const std::array<double, 3>& lambda, const Matrix3c& b,
                  double c, double t, double tan_theta, double h) {
  const long double hl = static_cast<long double>(h);
  const long double fp = F_at(lambda, b, hl, c, t, tan_theta);
  const long double f0 = F_at(lambda, b, 0.0L, c, t, tan_theta);
  const long double fm = F_at(lambda, b, -hl, c, t, tan_theta);
  return static_cast<double>((fp - 2.0L * f0 + fm) / (hl * hl));
}

namespace {

using Vec = std::vector<double>;

double vdot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void subtract_mean(Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

/// Restarted right-preconditioned GMRES(m): solve A M^{-1} z = b, x = M^{-1} z.
template <class Apply, class Precond>
Vec gmres_restarted(const Apply& A, const Precond& M, const Vec& b,
                    double tol, int restart, int max_outer) {
  const std::size_t n = b.size();
  Vec x(n, 0.0);
  const double bnorm = std::sqrt(vdot(b, b));
  if (bnorm == 0.0) return x;

  for (int outer = 0; outer < max_outer; ++outer) {
    Vec r = A(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = std::sqrt(vdot(r, r));
    if (beta <= tol * bnorm) return x;

    std::vector<Vec> v;
    v.push_back(r);
    for (double& e : v[0]) e /= beta;
    std::vector<std::vector<double>> H(static_cast<std::size_t>(restart) + 1,
                                       std::vector<double>(
                                           static_cast<std::size_t>(restart),
                                           0.0));
    std::vector<double> g(static_cast<std::size_t>(restart) + 1, 0.0);
    std::vector<double> cs(static_cast<std::size_t>(restart), 0.0);
    std::vector<double> sn(static_cast<std::size_t>(restart), 0.0);
    g[0] = beta;
    int m = 0;
    for (int j = 0; j < restart; ++j) {
      Vec w = A(M(v[static_cast<std::size_t>(j)]));
      for (int i = 0; i <= j; ++i) {
        H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            vdot(w, v[static_cast<std::size_t>(i)]);
        const double hij =
            H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        for (std::size_t p = 0; p < n; ++p)
          w[p] -= hij * v[static_cast<std::size_t>(i)][p];
      }
      double hn = std::sqrt(vdot(w, w));
      for (int i = 0; i < j; ++i) {
        const double t1 =
            cs[static_cast<std::size_t>(i)] *
                H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
            sn[static_cast<std::size_t>(i)] *
                H[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)];
        H[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)] =
            -sn[static_cast<std::size_t>(i)] *
                H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
            cs[static_cast<std::size_t>(i)] *
                H[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)];
        H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = t1;
      }
      const double delta = std::hypot(
          H[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)], hn);
      cs[static_cast<std::size_t>(j)] =
          H[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] / delta;
      sn[static_cast<std::size_t>(j)] = hn / delta;
      H[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = delta;
      g[static_cast<std::size_t>(j) + 1] =
          -sn[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
      g[static_cast<std::size_t>(j)] *= cs[static_cast<std::size_t>(j)];
      m = j + 1;
      if (std::abs(g[static_cast<std::size_t>(j) + 1]) <= tol * bnorm ||
          hn == 0.0)
        break;
      Vec next = w;
      for (double& e : next) e /= hn;
      v.push_back(std::move(next));
    }
    // y = H^{-1} g (upper triangular), correction x += M^{-1} (V y).
    std::vector<double> y(static_cast<std::size_t>(m), 0.0);
    for (int i = m - 1; i >= 0; --i) {
      double s = g[static_cast<std::size_t>(i)];
      for (int k = i + 1; k < m; ++k)
        s -= H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
             y[static_cast<std::size_t>(k)];
      y[static_cast<std::size_t>(i)] =
          s / H[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    Vec z(n, 0.0);
    for (int i = 0; i < m; ++i)
      for (std::size_t p = 0; p < n; ++p)
        z[p] += y[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)][p];
    const Vec dz = M(z);
    for (std::size_t p = 0; p < n; ++p) x[p] += dz[p];
  }
  return x;
}

}  // namespace

ScalarField solve_t0_quotient(const BackgroundData& bg, double K, double tol,
                              int max_iters) {
  const std::size_t n = bg.grid.point_count();
  SpectralWorkspace ws(bg.grid);
  ScalarField phi = ScalarField::zeros(bg.grid);

  // Projection onto the modes the discrete Hessian can actually produce
  // (drops the zero mode and pure-Nyquist modes).  The nonlinear residual
  // aliases tiny components onto those dead modes; left in the linear
  // system they make the preconditioned operator singular with
  // range/kernel overlap, which stalls GMRES.  Inverting the flat
  // Laplacian against itself is exactly that projection.
  const auto resolvable = [&](Vec v) {
    ScalarField vf{bg.grid, std::move(v)};
    const FormField hv = ws.complex_hessian(vf);
    Vec lap(n);
    for (std::size_t p = 0; p < n; ++p) lap[p] = hv.v[p].m.trace().real();
    return ws
        .solve_constant_coefficient(HermitianForm::identity(),
                                    ScalarField{bg.grid, std::move(lap)})
        .v;
  };

  for (int it = 0; it < max_iters; ++it) {
    const FormField hess = ws.complex_hessian(phi);
    FormField omega_phi = bg.Omega0;
    for (std::size_t p = 0; p < n; ++p) omega_phi.v[p].m += hess.v[p].m;

    Vec resid(n);
    std::vector<RelativeFrame> frames(n);
    double sup = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      frames[p] = relative_frame(bg.omega, omega_phi.v[p]);
      const RelativeSpectrum& s = frames[p].spectrum;
      resid[p] = s.sigma3() / s.sigma1() - K;
      sup = std::max(sup, std::abs(resid[p]));
    }
    if (sup <= tol) return zero_mean(phi);

    // Quotient-rule coefficients (sigma1 l_nu l_rho - sigma3)/sigma1^2.
    std::vector<HermitianForm> coeff(n);
    HermitianForm cbar;
    for (std::size_t p = 0; p < n; ++p) {
      const auto& l = frames[p].spectrum.lambda;
      const double s1 = frames[p].spectrum.sigma1();
      const double s3 = frames[p].spectrum.sigma3();
      const Eigen::Vector3d d((s1 * l[1] * l[2] - s3) / (s1 * s1),
                              (s1 * l[0] * l[2] - s3) / (s1 * s1),
                              (s1 * l[0] * l[1] - s3) / (s1 * s1));
      coeff[p].m = frames[p].transport * d.asDiagonal() *
                   frames[p].transport.adjoint();
      coeff[p].m = 0.5 * (coeff[p].m + coeff[p].m.adjoint().eval());
      cbar.m += coeff[p].m;
    }
    cbar.m /= static_cast<double>(n);

    const auto A = [&](const Vec& u) {
      ScalarField uf{bg.grid, u};
      const FormField hu = ws.complex_hessian(uf);
      Vec out(n);
      for (std::size_t p = 0; p < n; ++p)
        out[p] =
            coeff[p].m.cwiseProduct(hu.v[p].m.conjugate()).sum().real();
      return resolvable(std::move(out));
    };
    const auto M = [&](const Vec& r) {
      ScalarField rf{bg.grid, r};
      Vec out = ws.solve_constant_coefficient(cbar, rf).v;
      subtract_mean(out);
      return out;
    };

    Vec rhs = resid;
    for (double& r : rhs) r = -r;
    rhs = resolvable(std::move(rhs));
    const Vec du = gmres_restarted(A, M, rhs, 1e-13, 50, 8);
    for (std::size_t p = 0; p < n; ++p) phi.v[p] += du[p];
    phi = zero_mean(phi);
  }
  throw no_convergence_error("quotient-form t=0 oracle did not converge",
                             max_iters, -1.0);
}

}  // namespace gma3::oracles
