#include "gma3/torus_fields.hh"

#include <fftw3.h>

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <sstream>

#include "gma3/parallel.hh"

namespace gma3 {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Compensated accumulator; quadrature results must not depend on summation
// luck, and constant integrands should come out (nearly) exact.
struct Kahan {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

// FFTW plan creation is not thread-safe.
std::mutex g_fftw_mutex;

// Odometer over grid indices in row-major order (axis 0 slowest).
struct GridCounter {
  explicit GridCounter(const TorusGrid& g) : res(g.resolution()) {}
  std::array<int, TorusGrid::kAxes> res;
  std::array<int, TorusGrid::kAxes> i{};
  void advance() {
    for (int a = TorusGrid::kAxes - 1; a >= 0; --a) {
      if (++i[a] < res[a]) return;
      i[a] = 0;
    }
  }
};

}  // namespace

TorusGrid::TorusGrid() : res_{1, 1, 1, 1, 1, 1}, dims_active_(0), points_(1) {}

TorusGrid TorusGrid::make(int dims_active, const std::vector<int>& resolution) {
  if (dims_active < 1 || dims_active > kAxes)
    throw domain_error("dims_active must be in 1..6");
  if (static_cast<int>(resolution.size()) != dims_active)
    throw domain_error("need one resolution per active axis");
  TorusGrid g;
  g.dims_active_ = dims_active;
  g.res_ = {1, 1, 1, 1, 1, 1};
  g.points_ = 1;
  for (int a = 0; a < dims_active; ++a) {
    const int n = resolution[static_cast<std::size_t>(a)];
    if (n < 8 || n % 2 != 0) {
      std::ostringstream msg;
      msg << "resolution " << n << " on axis " << a
          << " must be even and >= 8";
      throw domain_error(msg.str());
    }
    g.res_[a] = n;
    g.points_ *= static_cast<std::size_t>(n);
  }
  return g;
}

double TorusGrid::min_spacing() const {
  int nmax = 1;
  for (int a = 0; a < kAxes; ++a) nmax = std::max(nmax, res_[a]);
  return kTwoPi / nmax;
}

std::array<int, TorusGrid::kAxes> TorusGrid::unflatten(std::size_t idx) const {
  std::array<int, kAxes> i{};
  for (int a = kAxes - 1; a >= 0; --a) {
    i[a] = static_cast<int>(idx % res_[a]);
    idx /= res_[a];
  }
  return i;
}

std::size_t TorusGrid::flatten(const std::array<int, kAxes>& i) const {
  std::size_t idx = 0;
  for (int a = 0; a < kAxes; ++a)
    idx = idx * res_[a] + static_cast<std::size_t>(i[a]);
  return idx;
}

std::array<double, TorusGrid::kAxes> TorusGrid::coords(std::size_t idx) const {
  const auto i = unflatten(idx);
  std::array<double, kAxes> x{};
  for (int a = 0; a < kAxes; ++a) x[a] = kTwoPi * i[a] / res_[a];
  return x;
}

ScalarField synthesize_modes(const TorusGrid& grid,
                             const std::vector<TrigMode>& modes) {
  for (const auto& m : modes) {
    for (int a = 0; a < TorusGrid::kAxes; ++a) {
      const int n = grid.resolution()[a];
      if (n == 1 && m.wave[a] != 0)
        throw domain_error("trig mode excites an inactive axis");
      if (n > 1 && 2 * std::abs(m.wave[a]) >= n)
        throw domain_error("trig mode at or above the Nyquist frequency");
    }
  }
  ScalarField f = ScalarField::zeros(grid);
  parallel_for(grid.point_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      const auto x = grid.coords(p);
      double val = 0.0;
      for (const auto& m : modes) {
        double ph = 0.0;
        for (int a = 0; a < TorusGrid::kAxes; ++a) ph += m.wave[a] * x[a];
        val += m.amplitude * (m.is_cos ? std::cos(ph) : std::sin(ph));
      }
      f.v[p] = val;
    }
  });
  return f;
}

double quadrature(const ScalarField& f) {
  Kahan acc;
  for (double x : f.v) acc.add(x);
  const double vol = std::pow(kTwoPi, 6);
  return acc.s / static_cast<double>(f.v.size()) * vol;
}

ScalarField zero_mean(const ScalarField& f) {
  Kahan acc;
  for (double x : f.v) acc.add(x);
  const double mean = acc.s / static_cast<double>(f.v.size());
  ScalarField out = f;
  for (double& x : out.v) x -= mean;
  return out;
}

// ---------------------------------------------------------------------------
// Spectral workspace

struct SpectralWorkspace::Impl {
  std::size_t n = 0;
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  // First-derivative frequencies per axis, Nyquist zeroed.
  std::array<std::vector<double>, TorusGrid::kAxes> dfreq;
  std::vector<Complex> spec;  // saved forward transform

  ~Impl() {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }
};

SpectralWorkspace::SpectralWorkspace(const TorusGrid& grid)
    : grid_(grid), impl_(std::make_unique<Impl>()) {
  impl_->n = grid.point_count();
  impl_->buf = fftw_alloc_complex(impl_->n);
  if (!impl_->buf) throw error("fftw_alloc_complex failed");
  int dims[TorusGrid::kAxes];
  for (int a = 0; a < TorusGrid::kAxes; ++a) dims[a] = grid.resolution()[a];
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    impl_->fwd = fftw_plan_dft(TorusGrid::kAxes, dims, impl_->buf, impl_->buf,
                               FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft(TorusGrid::kAxes, dims, impl_->buf, impl_->buf,
                               FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (!impl_->fwd || !impl_->bwd) throw error("fftw plan creation failed");
  for (int a = 0; a < TorusGrid::kAxes; ++a) {
    const int n = grid.resolution()[a];
    auto& fr = impl_->dfreq[a];
    fr.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (2 * i < n)
        fr[i] = i;
      else if (2 * i == n)
        fr[i] = 0.0;  // Nyquist: no consistent odd-derivative phase
      else
        fr[i] = i - n;
    }
  }
  impl_->spec.resize(impl_->n);
}

SpectralWorkspace::~SpectralWorkspace() = default;

FormField SpectralWorkspace::complex_hessian(const ScalarField& phi) {
  if (!(phi.grid == grid_)) throw domain_error("field grid mismatch");
  auto& im = *impl_;
  auto* cbuf = reinterpret_cast<Complex*>(im.buf);

  for (std::size_t p = 0; p < im.n; ++p) cbuf[p] = Complex(phi.v[p], 0.0);
  fftw_execute(im.fwd);
  std::copy(cbuf, cbuf + im.n, im.spec.begin());

  FormField out = FormField::constant(grid_, HermitianForm::zero());
  const double inv_n = 1.0 / static_cast<double>(im.n);

  std::array<bool, 3> active{};
  for (int j = 0; j < 3; ++j)
    active[j] = grid_.resolution()[2 * j] > 1 || grid_.resolution()[2 * j + 1] > 1;

  for (int j = 0; j < 3; ++j) {
    for (int k = j; k < 3; ++k) {
      if (!active[j] || !active[k]) continue;
      GridCounter ctr(grid_);
      for (std::size_t p = 0; p < im.n; ++p, ctr.advance()) {
        const Complex wj(im.dfreq[2 * j][ctr.i[2 * j]],
                         im.dfreq[2 * j + 1][ctr.i[2 * j + 1]]);
        const Complex wk(im.dfreq[2 * k][ctr.i[2 * k]],
                         im.dfreq[2 * k + 1][ctr.i[2 * k + 1]]);
        cbuf[p] = -0.25 * std::conj(wj) * wk * im.spec[p];
      }
      fftw_execute(im.bwd);
      for (std::size_t p = 0; p < im.n; ++p) {
        const Complex h = cbuf[p] * inv_n;
        out.v[p].m(j, k) = h;
        if (k != j) out.v[p].m(k, j) = std::conj(h);
      }
    }
  }
  // The mode-wise construction is Hermitian already; clean up the last few
  // ulps of FFT round-off so downstream eigensolves see exact hermiticity.
  parallel_for(im.n, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      Matrix3c& m = out.v[p].m;
      m = 0.5 * (m + m.adjoint().eval());
    }
  });
  return out;
}

ScalarField SpectralWorkspace::solve_constant_coefficient(
    const HermitianForm& cbar, const ScalarField& rhs) {
  if (!(rhs.grid == grid_)) throw domain_error("field grid mismatch");
  auto& im = *impl_;
  auto* cbuf = reinterpret_cast<Complex*>(im.buf);

  for (std::size_t p = 0; p < im.n; ++p) cbuf[p] = Complex(rhs.v[p], 0.0);
  fftw_execute(im.fwd);

  GridCounter ctr(grid_);
  for (std::size_t p = 0; p < im.n; ++p, ctr.advance()) {
    Complex w[3];
    for (int j = 0; j < 3; ++j)
      w[j] = Complex(im.dfreq[2 * j][ctr.i[2 * j]],
                     im.dfreq[2 * j + 1][ctr.i[2 * j + 1]]);
    // symbol of u -> tr(cbar dd~u) at this mode: -1/4 sum_jk cbar_jk w_j w~_k
    Complex sym(0.0, 0.0);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) sym += cbar.m(j, k) * w[j] * std::conj(w[k]);
    const double symbol = -0.25 * sym.real();
    cbuf[p] = (symbol != 0.0) ? cbuf[p] / symbol : Complex(0.0, 0.0);
  }
  fftw_execute(im.bwd);

  ScalarField out = ScalarField::zeros(grid_);
  const double inv_n = 1.0 / static_cast<double>(im.n);
  for (std::size_t p = 0; p < im.n; ++p) out.v[p] = cbuf[p].real() * inv_n;
  return out;
}

FormField complex_hessian(const ScalarField& phi) {
  SpectralWorkspace ws(phi.grid);
  return ws.complex_hessian(phi);
}

// ---------------------------------------------------------------------------
// Backgrounds

BackgroundData make_background(const TorusGrid& grid,
                               const HermitianForm& omega,
                               const HermitianForm& Omega0_constant,
                               const ScalarField& psi0,
                               const PhaseParameter& phase) {
  if (!(psi0.grid == grid)) throw domain_error("psi0 grid mismatch");
  BackgroundData bg{grid, omega, Omega0_constant, psi0, phase,
                    FormField::constant(grid, Omega0_constant)};
  const FormField hess = complex_hessian(psi0);
  for (std::size_t p = 0; p < grid.point_count(); ++p)
    bg.Omega0.v[p].m += hess.v[p].m;
  return bg;
}

ClassIntegrals class_integrals_grid(const BackgroundData& bg) {
  const std::size_t n = bg.grid.point_count();
  std::vector<double> s1(n), s3(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      const RelativeSpectrum s = relative_spectrum(bg.omega, bg.Omega0.v[p]);
      s1[p] = s.sigma1();
      s3[p] = s.sigma3();
    }
  });
  Kahan a1, a3;
  for (std::size_t p = 0; p < n; ++p) {
    a1.add(s1[p]);
    a3.add(s3[p]);
  }
  const double det = bg.omega.m.determinant().real();
  const double vol = std::pow(kTwoPi, 6) * det;
  ClassIntegrals cls;
  cls.int_Omega3 = a3.s / static_cast<double>(n) * vol;
  cls.int_3omega2Omega = a1.s / static_cast<double>(n) * vol;
  cls.int_omega3 = vol;
  return cls;
}

Complex phase_integral(const TorusGrid& grid, const HermitianForm& omega,
                       const FormField& i_theta) {
  if (!(i_theta.grid == grid)) throw domain_error("field grid mismatch");
  const std::size_t n = grid.point_count();
  std::vector<Complex> z(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      const RelativeSpectrum a = relative_spectrum(omega, i_theta.v[p]);
      Complex w(1.0, 0.0);
      for (double ai : a.lambda) w *= Complex(1.0, ai);
      z[p] = w;
    }
  });
  Kahan re, imacc;
  for (const Complex& w : z) {
    re.add(w.real());
    imacc.add(w.imag());
  }
  const double det = omega.m.determinant().real();
  const double vol = std::pow(kTwoPi, 6) * det;
  const double inv_n = 1.0 / static_cast<double>(n);
  return Complex(re.s * inv_n, imacc.s * inv_n) * vol;
}

GridSubsolution subsolution_margins_grid(const BackgroundData& bg) {
  const std::size_t n = bg.grid.point_count();
  GridSubsolution out;
  out.worst.min_lambda = std::numeric_limits<double>::infinity();
  out.worst.min_pair_product = std::numeric_limits<double>::infinity();
  double worst_score = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n; ++p) {
    const SubsolutionMargins m =
        subsolution_check_n3(bg.omega, bg.Omega0.v[p], bg.phase);
    out.worst.min_lambda = std::min(out.worst.min_lambda, m.min_lambda);
    out.worst.min_pair_product =
        std::min(out.worst.min_pair_product, m.min_pair_product);
    const double score = std::min(m.min_lambda, m.min_pair_product);
    if (score < worst_score) {
      worst_score = score;
      out.worst_index = p;
    }
  }
  return out;
}

}  // namespace gma3
