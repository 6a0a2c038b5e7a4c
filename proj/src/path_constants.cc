#include "gma3/path_constants.hh"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gma3 {

namespace {
constexpr double kPi = std::numbers::pi;
}

double class_identity_residual(const ClassIntegrals& cls,
                               const PhaseParameter& phase) {
  const double sec2 = phase.sec2_theta();
  return cls.int_Omega3 - sec2 * cls.int_3omega2Omega -
         2.0 * phase.tan_theta() * sec2 * cls.int_omega3;
}

PathPoint compute_ct(const ClassIntegrals& cls, double t,
                     const PhaseParameter& phase, double rel_tol) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream msg;
    msg << "path parameter t = " << t << " outside [0,1]";
    throw domain_error(msg.str());
  }
  if (!(cls.int_omega3 > 0.0))
    throw inadmissible_class_error("int omega^3 must be positive");

  const double sec2 = phase.sec2_theta();
  const double tan = phase.tan_theta();
  const double scale =
      std::max({std::abs(cls.int_Omega3), sec2 * std::abs(cls.int_3omega2Omega),
                2.0 * std::abs(tan) * sec2 * cls.int_omega3, 1e-300});
  const double defect = class_identity_residual(cls, phase);
  if (std::abs(defect) > rel_tol * scale) {
    std::ostringstream msg;
    msg << "class integrals incompatible with phase angle: identity defect "
        << defect << " exceeds " << rel_tol << " * " << scale;
    throw inadmissible_class_error(msg.str());
  }

  const double denom = sec2 * cls.int_3omega2Omega;
  if (!(denom > 0.0))
    throw inadmissible_class_error("int 3 omega^2 Omega must be positive");

  PathPoint p;
  p.t = t;
  p.c_t = (cls.int_Omega3 - 2.0 * t * tan * sec2 * cls.int_omega3) / denom;

  // Proven range of the path constant.  The one-sided comparison with 1
  // flips with the sign of tan(th); the lower bound 1/3 and the cube bound
  // hold on the whole supported branch.
  const double tol1 = rel_tol * std::max(1.0, std::abs(p.c_t));
  bool ok = p.c_t > 1.0 / 3.0;
  if (tan < 0.0)
    ok = ok && p.c_t <= 1.0 + tol1;
  else
    ok = ok && p.c_t >= 1.0 - tol1;
  const double cube_gap =
      p.c_t * p.c_t * p.c_t - t * t * phase.sin2_theta();
  ok = ok && cube_gap > -rel_tol * std::max(1.0, p.c_t * p.c_t * p.c_t);
  if (!ok) {
    std::ostringstream msg;
    msg << "path constant c_t = " << p.c_t << " at t = " << t
        << " violates its proven range (cube gap " << cube_gap
        << "); input class is inadmissible";
    throw inadmissible_class_error(msg.str());
  }
  return p;
}

PhaseParameter compute_theta_hat(Complex Z, double margin) {
  if (!(std::abs(Z) > 0.0))
    throw unsupported_phase_error("total class integral vanishes");
  const double arg = std::arg(Z);
  double theta;
  if (arg > kPi / 2 && arg <= kPi)
    theta = arg;
  else if (arg < -kPi / 2)
    theta = arg + 2.0 * kPi;
  else {
    std::ostringstream msg;
    msg << "class integral argument " << arg
        << " lies on the subcritical branch (-pi/2, pi/2]";
    throw unsupported_phase_error(msg.str());
  }
  return PhaseParameter::from_angle(theta, margin);
}

ClassIntegrals constant_class_integrals(const HermitianForm& omega,
                                        const HermitianForm& Omega,
                                        double volume, double pd_floor) {
  if (!(volume > 0.0)) throw domain_error("volume must be positive");
  const RelativeSpectrum s = relative_spectrum(omega, Omega, pd_floor);
  ClassIntegrals cls;
  cls.int_Omega3 = s.sigma3() * volume;
  cls.int_3omega2Omega = s.sigma1() * volume;
  cls.int_omega3 = volume;
  return cls;
}

}  // namespace gma3
