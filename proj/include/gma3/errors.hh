#pragma once

#include <stdexcept>
#include <string>

namespace gma3 {

/// Base class for everything this library throws on purpose.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Metric coefficient matrix is not positive-definite above the floor.
struct degenerate_metric_error : error {
  using error::error;
};

/// A relative-eigenvalue product (determinant) vanished where a division
/// by it was required.
struct singular_determinant_error : error {
  using error::error;
};

/// Requested operation needs a point inside the admissible cone and the
/// given one is not.
struct outside_cone_error : error {
  using error::error;
};

/// Cohomological data violate the compatibility identity tying the three
/// class integrals to the phase angle, or a derived path constant left its
/// proven range.  Signals inconsistent input data, not a solver failure.
struct inadmissible_class_error : error {
  using error::error;
};

/// The average phase angle lies outside the supported supercritical branch
/// (pi/2, 3pi/2).
struct unsupported_phase_error : error {
  using error::error;
};

/// Scalar argument outside its documented domain (e.g. path parameter t
/// outside [0,1]).
struct domain_error : error {
  using error::error;
};

/// The linearized operator stopped being elliptic: some pointwise
/// coefficient (pair product margin) is no longer positive.
struct ellipticity_lost_error : error {
  using error::error;
};

/// Newton iteration exhausted its budget without meeting the tolerance.
struct no_convergence_error : error {
  no_convergence_error(const std::string& what, int iters, double residual)
      : error(what), iterations(iters), residual_sup(residual) {}
  int iterations;
  double residual_sup;
};

/// The background fails a structural hypothesis (subsolution positivity)
/// required before any solve is attempted.
struct hypothesis_violated_error : error {
  hypothesis_violated_error(const std::string& what, double min_lambda,
                            double min_pair_product)
      : error(what),
        min_lambda(min_lambda),
        min_pair_product(min_pair_product) {}
  double min_lambda;
  double min_pair_product;
};

/// Rejection sampling exceeded its attempt budget; the requested sample
/// region is (numerically) empty.
struct sampler_starved_error : error {
  using error::error;
};

/// File format or I/O failure on field dumps.
struct io_error : error {
  using error::error;
};

}  // namespace gma3
