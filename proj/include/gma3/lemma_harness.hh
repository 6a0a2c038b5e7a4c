#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gma3/phase_algebra.hh"

// Randomized verification of the pointwise inequalities behind the
// mixed-sign continuity path.  Each check draws a deterministic stream of
// admissible cone points (on the level set F~ = 1 unless noted), evaluates
// the claimed inequality or identity, and reports the worst slack seen.  A
// slack below the stated tolerance counts as a failure; reports serialize
// to JSON for the CLI.

namespace gma3 {

struct SampleSpec {
  std::size_t count = 10000;
  std::uint64_t seed = 0x5eed;
  // Phase angle range; the default stays strictly inside the mixed-sign
  // regime theta_hat in (pi/2, pi), i.e. tan(theta_hat) < 0.
  double theta_min = 1.6207963267948966;  // pi/2 + 0.05
  double theta_max = 3.1315926535897933;  // pi - 0.01
  double lambda_scale = 1.5;  // log-spread of eigenvalues above the floor
};

/// Deterministic uniform double stream.  The mapping from raw engine output
/// to [0,1) is fixed here (not delegated to std::uniform_real_distribution)
/// so sample streams are reproducible across standard libraries.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

 private:
  std::mt19937_64 eng_;
};

/// One admissible sample: eigenvalues sorted descending, constants (c, t)
/// with c^3 > t^2 sin^2(theta_hat), all three cone margins positive, and
/// sigma3 = c sec^2 sigma1 + 2 t tan sec^2 (level set) up to roundoff.
struct ConeSample {
  std::array<double, 3> lambda{};
  double c = 0.0;
  double t = 0.0;
  double theta_hat = 0.0;
};

/// Rejection sampler for ConeSample: draws theta_hat, t, then c above
/// max(1/3, cbrt(t^2 sin^2)), places lambda2 and lambda1 log-uniformly above
/// the pair-product floor sqrt(c) |sec|, and closes the triple through the
/// level set.  Throws sampler_starved_error after too many rejections.
ConeSample sample_cone_point(SampleRng& rng, const SampleSpec& spec);

struct LemmaReport {
  std::string lemma;
  std::size_t samples = 0;
  std::size_t failures = 0;
  double worst_slack = 0.0;  // most negative slack encountered
  ConeSample worst_at;
  bool pass = false;
  std::string note;  // tolerances, sweeps, auxiliary maxima
};

std::string to_json_string(const LemmaReport& report);
std::string to_json_string(const std::vector<LemmaReport>& reports);

/// Range of the path constant: for every sampled admissible constant class
/// and every t in {0, 1/100, ..., 1}, the constant satisfies
/// 1/3 < c_t <= 1 (mixed sign) and c_t^3 > t^2 sin^2(theta_hat).
/// Slack = min(c_t - 1/3, 1 - c_t, c_t^3 - t^2 sin^2); tolerance 1e-10.
LemmaReport check_ct_lemma(const SampleSpec& spec);

/// Convexity of the level set: for every sample and a random Hermitian
/// direction b projected onto the tangent constraint
/// sum (c - S/lambda_mu) b_mumu = 0, the second derivative Q of F dominates
/// (S/sigma3) sum_{mu != al} |b_mual|^2/(lambda_mu lambda_al).  Every 100th
/// sample is audited against a long-double finite difference of F along
/// diag(lambda) + s b.
LemmaReport check_convexity_lemma(const SampleSpec& spec);

/// Reduced-form discriminant: E D - B^2 = 4 S^2 g as an identity (1e-10
/// relative) and g >= 0 on the cone; includes 40 deterministic stages
/// driving the pair-product margin to zero, where g is smallest.
LemmaReport check_discriminant(const SampleSpec& spec);

/// Scaling-derivative bound: min_mu dF/dlambda_mu * lambda_mu + cos^2 >= 0
/// on the level set (slack tolerance 1e-10).
LemmaReport check_euler_bound(const SampleSpec& spec);

/// Pair sums stay away from the cone boundary:
/// c (lambda_mu + lambda_nu) + 2 t tan >= 2 c^{3/2} |sec| + 2 t tan > 0
/// whenever c^3 > t^2 sin^2.  Includes deterministic equality probes at
/// lambda_2 = lambda_3 = sqrt(c) |sec| where the first bound is tight.
LemmaReport check_boundary_exclusion(const SampleSpec& spec);

/// All five checks in a fixed order with the same spec (independent
/// engines, so removing one check does not shift the others' streams).
std::vector<LemmaReport> run_all_checks(const SampleSpec& spec);

}  // namespace gma3
