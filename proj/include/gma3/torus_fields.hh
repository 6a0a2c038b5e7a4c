#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "gma3/path_constants.hh"
#include "gma3/phase_algebra.hh"

// Discrete fields on the flat torus C^3 / (2 pi Z)^6.  The six real
// coordinates are ordered (x1, y1, x2, y2, x3, y3) with z_j = x_j + i y_j;
// each has period 2 pi.  Fields may depend on a leading block of
// "active" axes only; inactive axes carry a single grid point.  All
// derivatives are Fourier-spectral, so trigonometric data below the Nyquist
// frequency are differentiated exactly.

namespace gma3 {

class TorusGrid {
 public:
  static constexpr int kAxes = 6;

  /// dims_active in 1..6; one even resolution >= 8 per active axis.
  static TorusGrid make(int dims_active, const std::vector<int>& resolution);

  TorusGrid();  // single-point grid (constant fields)

  int dims_active() const { return dims_active_; }
  const std::array<int, kAxes>& resolution() const { return res_; }
  std::size_t point_count() const { return points_; }

  /// Smallest grid spacing 2 pi / N over active axes.
  double min_spacing() const;

  std::array<int, kAxes> unflatten(std::size_t idx) const;
  std::size_t flatten(const std::array<int, kAxes>& i) const;
  /// Coordinates (x1, y1, ..., y3) of a flat index, each in [0, 2 pi).
  std::array<double, kAxes> coords(std::size_t idx) const;

  bool operator==(const TorusGrid&) const = default;

 private:
  std::array<int, kAxes> res_;
  int dims_active_;
  std::size_t points_;
};

struct ScalarField {
  TorusGrid grid;
  std::vector<double> v;

  static ScalarField zeros(const TorusGrid& g) {
    return {g, std::vector<double>(g.point_count(), 0.0)};
  }
};

/// One Hermitian coefficient matrix per grid point.
struct FormField {
  TorusGrid grid;
  std::vector<HermitianForm> v;

  static FormField constant(const TorusGrid& g, const HermitianForm& f) {
    return {g, std::vector<HermitianForm>(g.point_count(), f)};
  }
};

/// One term a * cos(k . x) or a * sin(k . x) of a trigonometric potential;
/// k is a six-vector of integer frequencies over (x1, y1, ..., y3).
struct TrigMode {
  bool is_cos = true;
  std::array<int, TorusGrid::kAxes> wave{};
  double amplitude = 0.0;
};

/// Evaluates a sum of modes on the grid.  Frequencies must vanish on
/// inactive axes and stay strictly below Nyquist on active ones.
ScalarField synthesize_modes(const TorusGrid& grid,
                             const std::vector<TrigMode>& modes);

/// mean(f) * (2 pi)^6.
double quadrature(const ScalarField& f);

/// f minus its mean.  (The omega^3-weighted mean coincides with the plain
/// mean because the metric coefficients are constant.)
ScalarField zero_mean(const ScalarField& f);

/// FFT scratch space with cached plans for one grid shape.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const TorusGrid& grid);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const TorusGrid& grid() const { return grid_; }

  /// Complex Hessian phi_{jk~} = d^2 phi / dz^j dz~^k as a Hermitian form
  /// field:
  ///   phi_{jk~} = 1/4 [ (d_xj d_xk + d_yj d_yk)
  ///                     + i (d_xj d_yk - d_yj d_xk) ] phi.
  /// Nyquist frequencies are treated as derivative-free (their first
  /// derivative multiplier is zero), which keeps the output exactly
  /// Hermitian; it is additionally symmetrized against FFT round-off.
  FormField complex_hessian(const ScalarField& phi);

  /// Inverse of u -> tr(cbar * dd~ u) mode by mode, for a constant
  /// Hermitian positive-definite cbar.  The zero mode and pure-Nyquist
  /// modes (which the discrete Hessian annihilates) are mapped to zero.
  ScalarField solve_constant_coefficient(const HermitianForm& cbar,
                                         const ScalarField& rhs);

 private:
  struct Impl;
  TorusGrid grid_;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around SpectralWorkspace.
FormField complex_hessian(const ScalarField& phi);

/// Background data of one continuation run: constant metric omega, the
/// Monge-Ampere form Omega0 = (constant part) + dd~ psi0, and the phase.
struct BackgroundData {
  TorusGrid grid;
  HermitianForm omega;
  HermitianForm Omega0_constant;
  ScalarField psi0;
  PhaseParameter phase;
  FormField Omega0;  // cached Omega0_constant + dd~ psi0
};

BackgroundData make_background(const TorusGrid& grid,
                               const HermitianForm& omega,
                               const HermitianForm& Omega0_constant,
                               const ScalarField& psi0,
                               const PhaseParameter& phase);

/// Class integrals from grid quadrature of the sigma-polynomials of the
/// relative spectrum of Omega0; invariant under psi0 (a dd~-exact shift) up
/// to spectral quadrature error.
ClassIntegrals class_integrals_grid(const BackgroundData& bg);

/// Total class integral Z = int (omega - Theta)^3 computed pointwise from
/// the relative spectrum a of the curvature form:
///   Z = int prod_j (1 + i a_j) det(omega) d mu.
Complex phase_integral(const TorusGrid& grid, const HermitianForm& omega,
                       const FormField& i_theta);

/// Worst subsolution margins over the grid.
struct GridSubsolution {
  SubsolutionMargins worst;
  std::size_t worst_index = 0;
  bool ok() const { return worst.ok(); }
};

GridSubsolution subsolution_margins_grid(const BackgroundData& bg);

}  // namespace gma3
