#pragma once

#include <complex>

#include "gma3/phase_algebra.hh"

// Cohomological constants of the continuity path.  With the three class
// integrals
//   I3 = int Omega^3,  I21 = int 3 omega^2 Omega,  V = int omega^3
// the path constant at parameter t is
//   c_t = (I3 - 2 t tan(th) sec^2(th) V) / (sec^2(th) I21),
// which is affine in t with c_1 = 1 whenever the data satisfy the
// compatibility identity I3 = sec^2(th) I21 + 2 tan(th) sec^2(th) V.

namespace gma3 {

struct ClassIntegrals {
  double int_Omega3 = 0.0;       // int Omega^3        (sigma3-weighted volume)
  double int_3omega2Omega = 0.0; // int 3 omega^2 Omega (sigma1-weighted volume)
  double int_omega3 = 0.0;       // int omega^3
};

struct PathPoint {
  double t = 0.0;
  double c_t = 0.0;
};

/// Signed defect of the compatibility identity,
///   I3 - sec^2(th) I21 - 2 tan(th) sec^2(th) V.
double class_identity_residual(const ClassIntegrals& cls,
                               const PhaseParameter& phase);

/// Path constant at t in [0,1].  Checks, at relative tolerance rel_tol:
///  - the compatibility identity above (else the data do not represent one
///    cohomology class with this phase angle),
///  - the proven range of c_t: always c_t > 1/3 and c_t^3 > t^2 sin^2(th);
///    additionally c_t <= 1 when tan(th) < 0 and c_t >= 1 when tan(th) >= 0.
/// Violations raise inadmissible_class_error; t outside [0,1] raises
/// domain_error.
PathPoint compute_ct(const ClassIntegrals& cls, double t,
                     const PhaseParameter& phase, double rel_tol = 1e-8);

/// Lifts Arg of the total class integral Z = int (omega - Theta)^3 to the
/// supercritical branch:
///   Arg in (pi/2, pi]    ->  theta_hat = Arg(Z),
///   Arg in (-pi, -pi/2)  ->  theta_hat = Arg(Z) + 2 pi.
/// Arg in (-pi/2, pi/2] is out of scope -> unsupported_phase_error.
PhaseParameter compute_theta_hat(Complex Z, double margin = 1e-6);

/// Class integrals of constant forms on a torus of volume V:
/// (sigma3 V, sigma1 V, V) in the relative spectrum of Omega against omega.
ClassIntegrals constant_class_integrals(const HermitianForm& omega,
                                        const HermitianForm& Omega,
                                        double volume,
                                        double pd_floor = 1e-10);

}  // namespace gma3
