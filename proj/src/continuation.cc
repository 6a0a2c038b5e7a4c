#include "gma3/continuation.hh"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "gma3/parallel.hh"

namespace gma3 {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2(const Vec& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void project_zero_mean(Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

// Plain full-memory GMRES on the zero-mean subspace; the operator passed in
// is already left-preconditioned.  Returns the iteration count.
int gmres(const std::function<void(const Vec&, Vec&)>& apply,
          const Vec& rhs, Vec& x, double tol, int maxit) {
  const std::size_t n = rhs.size();
  x.assign(n, 0.0);
  const double beta = nrm2(rhs);
  if (beta == 0.0) return 0;

  std::vector<Vec> basis;
  basis.push_back(rhs);
  for (double& v : basis[0]) v /= beta;

  std::vector<std::vector<double>> h;  // h[j] has j+2 entries
  std::vector<double> cs, sn, g;
  g.push_back(beta);

  int iters = 0;
  Vec w(n);
  for (int j = 0; j < maxit; ++j) {
    apply(basis[static_cast<std::size_t>(j)], w);
    std::vector<double> hj(static_cast<std::size_t>(j) + 2, 0.0);
    for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
      hj[i] = dot(w, basis[static_cast<std::size_t>(i)]);
      axpy(-hj[i], basis[static_cast<std::size_t>(i)], w);
    }
    hj[static_cast<std::size_t>(j) + 1] = nrm2(w);

    for (int i = 0; i < j; ++i) {  // apply accumulated rotations
      const double t = cs[i] * hj[i] + sn[i] * hj[i + 1];
      hj[static_cast<std::size_t>(i) + 1] =
          -sn[i] * hj[i] + cs[i] * hj[i + 1];
      hj[static_cast<std::size_t>(i)] = t;
    }
    const double denom = std::hypot(hj[static_cast<std::size_t>(j)],
                                    hj[static_cast<std::size_t>(j) + 1]);
    const double c = (denom == 0.0) ? 1.0 : hj[static_cast<std::size_t>(j)] / denom;
    const double s =
        (denom == 0.0) ? 0.0 : hj[static_cast<std::size_t>(j) + 1] / denom;
    cs.push_back(c);
    sn.push_back(s);
    hj[static_cast<std::size_t>(j)] = denom;
    hj[static_cast<std::size_t>(j) + 1] = 0.0;
    g.push_back(-s * g[static_cast<std::size_t>(j)]);
    g[static_cast<std::size_t>(j)] *= c;
    if (denom == 0.0) {
      // Singular pivot: drop this column, keep the previous iterate.
      cs.pop_back();
      sn.pop_back();
      g.pop_back();
      break;
    }
    h.push_back(std::move(hj));
    iters = j + 1;

    const double relres = std::abs(g[static_cast<std::size_t>(j) + 1]) / beta;
    if (relres <= tol) break;
    if (j + 1 < maxit) {
      const double wn = nrm2(w);
      if (wn == 0.0) break;  // happy breakdown (relres is already 0)
      Vec next = w;
      for (double& v : next) v /= wn;
      basis.push_back(std::move(next));
    }
  }

  // Back-substitution on the rotated Hessenberg system.
  const int m = iters;
  std::vector<double> y(static_cast<std::size_t>(m), 0.0);
  for (int i = m - 1; i >= 0; --i) {
    double s = g[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < m; ++k)
      s -= h[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
           y[static_cast<std::size_t>(k)];
    y[static_cast<std::size_t>(i)] =
        s / h[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < m; ++i)
    axpy(y[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(i)], x);
  return iters;
}

// Everything the Newton loop needs to know about one iterate.
struct EvalState {
  std::vector<RelativeSpectrum> spectra;
  Vec residual;        // pointwise Monge-Ampere defect
  double sup_dev = 0;  // sup |F~ - 1|
  ConeMargins min_margins;
  double sup_lambda1 = 0;
};

FormField add_hessian(const BackgroundData& bg, const FormField& hess) {
  FormField omega_phi = bg.Omega0;
  for (std::size_t p = 0; p < omega_phi.v.size(); ++p)
    omega_phi.v[p].m += hess.v[p].m;
  return omega_phi;
}

EvalState evaluate(const BackgroundData& bg, const FormField& omega_phi,
                   const PathPoint& path) {
  const std::size_t n = bg.grid.point_count();
  EvalState st;
  st.spectra.resize(n);
  st.residual.resize(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p)
      st.spectra[p] = relative_spectrum(bg.omega, omega_phi.v[p]);
  });

  st.min_margins.min_lambda = std::numeric_limits<double>::infinity();
  st.min_margins.min_pair_product = std::numeric_limits<double>::infinity();
  st.min_margins.min_pair_sum = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n; ++p) {
    const RelativeSpectrum& s = st.spectra[p];
    st.residual[p] = gma_residual(s, path.c_t, path.t, bg.phase);
    const ConeMargins m = cone_check(s, path.c_t, path.t, bg.phase);
    st.min_margins.min_lambda =
        std::min(st.min_margins.min_lambda, m.min_lambda);
    st.min_margins.min_pair_product =
        std::min(st.min_margins.min_pair_product, m.min_pair_product);
    st.min_margins.min_pair_sum =
        std::min(st.min_margins.min_pair_sum, m.min_pair_sum);
    st.sup_lambda1 = std::max(st.sup_lambda1, s.lambda[0]);
    const double det = s.sigma3();
    const double dev = (det == 0.0) ? std::numeric_limits<double>::infinity()
                                    : std::abs(st.residual[p] / det);
    st.sup_dev = std::max(st.sup_dev, dev);
  }
  return st;
}

double sup_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

HermitianForm mean_form(const FormField& f) {
  Matrix3c acc = Matrix3c::Zero();
  for (const auto& h : f.v) acc += h.m;
  HermitianForm out;
  out.m = acc / static_cast<double>(f.v.size());
  out.m = 0.5 * (out.m + out.m.adjoint().eval());
  return out;
}

}  // namespace

void ContinuationTrace::write_csv(std::ostream& os) const {
  os << "t,c_t,newton_iters,residual_sup,margin_pos,margin_pair_prod,"
        "margin_pair_sum,sup_phi,sup_lambda1\n";
  os << std::setprecision(17);
  for (const auto& r : steps) {
    os << r.t << ',' << r.c_t << ',' << r.newton_iters << ','
       << r.residual_sup << ',' << r.margin_pos << ',' << r.margin_pair_prod
       << ',' << r.margin_pair_sum << ',' << r.sup_phi << ','
       << r.sup_lambda1 << '\n';
  }
}

void ContinuationTrace::write_csv_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open '" + path + "' for writing");
  write_csv(os);
  if (!os) throw io_error("write to '" + path + "' failed");
}

FormField linearized_coefficients(const BackgroundData& bg,
                                  const ScalarField& phi,
                                  const PathPoint& path) {
  SpectralWorkspace ws(bg.grid);
  const FormField omega_phi = add_hessian(bg, ws.complex_hessian(phi));
  const std::size_t n = bg.grid.point_count();
  FormField coeff = FormField::constant(bg.grid, HermitianForm::zero());
  std::vector<double> worst(n);
  const double csec2 = path.c_t * bg.phase.sec2_theta();
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      const RelativeFrame f = relative_frame(bg.omega, omega_phi.v[p]);
      const auto& l = f.spectrum.lambda;
      const Eigen::Vector3d d(l[1] * l[2] - csec2, l[0] * l[2] - csec2,
                              l[0] * l[1] - csec2);
      worst[p] = d.minCoeff();
      coeff.v[p].m = f.transport * d.asDiagonal() * f.transport.adjoint();
      coeff.v[p].m = 0.5 * (coeff.v[p].m + coeff.v[p].m.adjoint().eval());
    }
  });
  double lo = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  for (std::size_t p = 0; p < n; ++p)
    if (worst[p] < lo) {
      lo = worst[p];
      at = p;
    }
  if (!(lo > 0.0)) {
    std::ostringstream msg;
    msg << "linearized operator lost ellipticity: coefficient " << lo
        << " at grid point " << at;
    throw ellipticity_lost_error(msg.str());
  }
  return coeff;
}

NewtonResult newton_solve(const BackgroundData& bg,
                          const ScalarField& phi_init, const PathPoint& path,
                          const SolverConfig& config) {
  const std::size_t n = bg.grid.point_count();
  SpectralWorkspace ws(bg.grid);

  ScalarField phi = zero_mean(phi_init);
  FormField hess_phi = ws.complex_hessian(phi);
  EvalState state = evaluate(bg, add_hessian(bg, hess_phi), path);
  if (!state.min_margins.admissible()) {
    std::ostringstream msg;
    msg << "initial iterate is outside the admissible cone (margins "
        << state.min_margins.min_lambda << ", "
        << state.min_margins.min_pair_product << ", "
        << state.min_margins.min_pair_sum << ")";
    throw ellipticity_lost_error(msg.str());
  }

  NewtonResult res;
  const double csec2 = path.c_t * bg.phase.sec2_theta();

  for (int iter = 0; iter <= config.max_newton_iters; ++iter) {
    if (state.sup_dev <= config.newton_tol) {
      res.phi = phi;
      res.iterations = iter;
      res.residual_sup = state.sup_dev;
      return res;
    }
    if (iter == config.max_newton_iters) break;

    // Coefficient field of the linearization at the current iterate.
    FormField coeff = FormField::constant(bg.grid, HermitianForm::zero());
    {
      const FormField omega_phi = add_hessian(bg, hess_phi);
      parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
          const RelativeFrame f = relative_frame(bg.omega, omega_phi.v[p]);
          const auto& l = f.spectrum.lambda;
          const Eigen::Vector3d d(l[1] * l[2] - csec2, l[0] * l[2] - csec2,
                                  l[0] * l[1] - csec2);
          coeff.v[p].m = f.transport * d.asDiagonal() * f.transport.adjoint();
          coeff.v[p].m = 0.5 * (coeff.v[p].m + coeff.v[p].m.adjoint().eval());
        }
      });
    }
    const HermitianForm cbar = mean_form(coeff);

    const auto apply = [&](const Vec& u, Vec& out) {
      ScalarField uf{bg.grid, u};
      const FormField hu = ws.complex_hessian(uf);
      Vec lu(n);
      parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p)
          lu[p] = coeff.v[p].m.cwiseProduct(hu.v[p].m.conjugate()).sum().real();
      });
      project_zero_mean(lu);
      ScalarField lf{bg.grid, std::move(lu)};
      out = ws.solve_constant_coefficient(cbar, lf).v;
      project_zero_mean(out);
    };

    Vec rhs = state.residual;
    for (double& r : rhs) r = -r;
    project_zero_mean(rhs);
    ScalarField rf{bg.grid, rhs};
    Vec prhs = ws.solve_constant_coefficient(cbar, rf).v;
    project_zero_mean(prhs);

    Vec update;
    res.linear_iters +=
        gmres(apply, prhs, update, config.linear_tol, config.max_linear_iters);

    // Damped line search: stay inside the cone (with floor) and force the
    // sup-residual down.
    double s = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30 && !accepted; ++half, s *= 0.5) {
      ScalarField cand = phi;
      for (std::size_t p = 0; p < n; ++p) cand.v[p] += s * update[p];
      cand = zero_mean(cand);
      FormField hess_cand = ws.complex_hessian(cand);
      EvalState cst = evaluate(bg, add_hessian(bg, hess_cand), path);
      const bool margins_ok =
          cst.min_margins.min_lambda >= config.cone_margin_floor &&
          cst.min_margins.min_pair_product >= config.cone_margin_floor &&
          cst.min_margins.min_pair_sum >= config.cone_margin_floor;
      const bool improved =
          cst.sup_dev <= state.sup_dev * (1.0 - 0.25 * s) ||
          cst.sup_dev <= config.newton_tol;
      if (margins_ok && improved) {
        phi = std::move(cand);
        hess_phi = std::move(hess_cand);
        state = std::move(cst);
        accepted = true;
      }
    }
    if (!accepted)
      throw no_convergence_error(
          "Newton line search failed to find an admissible decreasing step",
          iter + 1, state.sup_dev);
  }
  throw no_convergence_error("Newton iteration budget exhausted",
                             config.max_newton_iters, state.sup_dev);
}

ContinuationResult continue_path(const BackgroundData& bg,
                                 const SolverConfig& config) {
  const GridSubsolution sub = subsolution_margins_grid(bg);
  if (!sub.ok()) {
    std::ostringstream msg;
    msg << "background is not a subsolution: min eigenvalue margin "
        << sub.worst.min_lambda << ", min pair product margin "
        << sub.worst.min_pair_product << " (worst at grid point "
        << sub.worst_index << ")";
    throw hypothesis_violated_error(msg.str(), sub.worst.min_lambda,
                                    sub.worst.min_pair_product);
  }

  const ClassIntegrals cls = class_integrals_grid(bg);
  const double h = bg.grid.min_spacing();
  const double class_tol = 10.0 * h * h;  // spectral quadrature: generous

  ContinuationResult out;
  ContinuationTrace& trace = out.trace;

  const auto record = [&](double t, double c_t, const NewtonResult& nr,
                          const ScalarField& phi) {
    const EvalState st =
        evaluate(bg, add_hessian(bg, complex_hessian(phi)), PathPoint{t, c_t});
    StepRecord r;
    r.t = t;
    r.c_t = c_t;
    r.newton_iters = nr.iterations;
    r.residual_sup = nr.residual_sup;
    r.margin_pos = st.min_margins.min_lambda;
    r.margin_pair_prod = st.min_margins.min_pair_product;
    r.margin_pair_sum = st.min_margins.min_pair_sum;
    r.sup_phi = sup_abs(phi.v);
    r.sup_lambda1 = st.sup_lambda1;
    r.linear_iters = nr.linear_iters;
    trace.steps.push_back(r);
  };

  PathPoint path = compute_ct(cls, 0.0, bg.phase, class_tol);
  ScalarField phi = ScalarField::zeros(bg.grid);
  NewtonResult nr = newton_solve(bg, phi, path, config);
  phi = nr.phi;
  record(0.0, path.c_t, nr, phi);

  double t = 0.0;
  double dt = config.t_step_init;
  while (t < 1.0) {
    const double tn = (t + dt >= 1.0 - 1e-12) ? 1.0 : t + dt;
    path = compute_ct(cls, tn, bg.phase, class_tol);
    try {
      nr = newton_solve(bg, phi, path, config);
    } catch (const no_convergence_error&) {
      dt *= 0.5;
      if (dt < config.t_step_min)
        throw continuation_stalled_error(
            "continuation step fell below t_step_min at t = " +
                std::to_string(t),
            std::move(trace));
      continue;
    } catch (const ellipticity_lost_error&) {
      dt *= 0.5;
      if (dt < config.t_step_min)
        throw continuation_stalled_error(
            "continuation step fell below t_step_min at t = " +
                std::to_string(t),
            std::move(trace));
      continue;
    }
    phi = nr.phi;
    t = tn;
    record(t, path.c_t, nr, phi);
    if (nr.iterations <= 3) dt = std::min(2.0 * dt, config.t_step_max);
  }
  out.phi = phi;
  return out;
}

VerificationReport verify_solution(const BackgroundData& bg,
                                   const ScalarField& phi) {
  const ScalarField phi0 = zero_mean(phi);
  const FormField omega_phi = add_hessian(bg, complex_hessian(phi0));
  const std::size_t n = bg.grid.point_count();
  const double tan = bg.phase.tan_theta();

  VerificationReport rep;
  rep.min_margins.min_lambda = std::numeric_limits<double>::infinity();
  rep.min_margins.min_pair_product = std::numeric_limits<double>::infinity();
  rep.min_margins.min_pair_sum = std::numeric_limits<double>::infinity();

  std::vector<RelativeSpectrum> spectra(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p)
      spectra[p] = relative_spectrum(bg.omega, omega_phi.v[p]);
  });

  for (std::size_t p = 0; p < n; ++p) {
    const RelativeSpectrum& s = spectra[p];
    rep.sup_gma_deviation = std::max(
        rep.sup_gma_deviation, std::abs(F_tilde(s, 1.0, 1.0, bg.phase) - 1.0));
    // Recover the curvature spectrum a = lambda + tan(th).
    double theta_pt = 0.0;
    Complex z(1.0, 0.0);
    for (double l : s.lambda) {
      const double a = l + tan;
      theta_pt += std::atan(a);
      z *= Complex(1.0, a);
    }
    rep.sup_dhym_residual = std::max(rep.sup_dhym_residual,
                                     std::abs(z.imag() - tan * z.real()));
    rep.sup_phase_deviation = std::max(
        rep.sup_phase_deviation, std::abs(theta_pt - bg.phase.theta_hat()));
    const ConeMargins m = cone_check(s, 1.0, 1.0, bg.phase);
    rep.min_margins.min_lambda =
        std::min(rep.min_margins.min_lambda, m.min_lambda);
    rep.min_margins.min_pair_product =
        std::min(rep.min_margins.min_pair_product, m.min_pair_product);
    rep.min_margins.min_pair_sum =
        std::min(rep.min_margins.min_pair_sum, m.min_pair_sum);
  }
  return rep;
}

}  // namespace gma3
