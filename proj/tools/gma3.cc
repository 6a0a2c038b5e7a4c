// Command-line front end: continuation solves, lemma sweeps and class
// diagnostics for the generalized Monge-Ampere path on flat 3-tori.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gma3/continuation.hh"
#include "gma3/field_io.hh"
#include "gma3/lemma_harness.hh"
#include "gma3/parallel.hh"
#include "gma3/path_constants.hh"
#include "gma3/run_config.hh"

namespace {

using gma3::BackgroundData;
using gma3::RunConfig;
using json = nlohmann::ordered_json;

// Exit codes, kept stable for scripting:
//   0 success          4 continuation stalled      7 inadmissible class
//   1 internal error   5 solver did not converge  10 lemma check failed
//   2 usage / config   6 unsupported phase branch
//   3 subsolution hypothesis violated
constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;
constexpr int kHypothesis = 3;
constexpr int kStalled = 4;
constexpr int kNoConvergence = 5;
constexpr int kUnsupportedPhase = 6;
constexpr int kInadmissibleClass = 7;
constexpr int kLemmaFailure = 10;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw gma3::io_error("cannot open '" + path.string() + "'");
  os << text;
}

json margins_json(const gma3::ConeMargins& m) {
  json j;
  j["min_lambda"] = m.min_lambda;
  j["min_pair_product"] = m.min_pair_product;
  j["min_pair_sum"] = m.min_pair_sum;
  return j;
}

int cmd_solve(const std::string& config_path, std::string out_dir) {
  const RunConfig cfg = gma3::load_run_config(config_path);
  if (out_dir.empty()) out_dir = cfg.output_dir;
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path out(out_dir);

  const BackgroundData bg = gma3::prepare_background(cfg);
  std::cout << "theta_hat = " << bg.phase.theta_hat()
            << ", tan = " << bg.phase.tan_theta()
            << ", grid = " << bg.grid.point_count() << " points\n";

  gma3::ContinuationResult result;
  try {
    result = gma3::continue_path(bg, cfg.solver);
  } catch (const gma3::continuation_stalled_error& e) {
    e.trace.write_csv_file((out / "trace.csv").string());
    json diag;
    diag["error"] = "continuation_stalled";
    diag["message"] = e.what();
    diag["steps_completed"] = e.trace.steps.size();
    write_text(out / "failure.json", diag.dump(2) + "\n");
    std::cerr << "error: " << e.what() << "\n(partial trace written to "
              << (out / "trace.csv").string() << ")\n";
    return kStalled;
  }

  result.trace.write_csv_file((out / "trace.csv").string());
  gma3::write_scalar_field((out / "phi.gma3").string(), result.phi);

  const gma3::VerificationReport rep = gma3::verify_solution(bg, result.phi);
  json v;
  v["sup_gma_deviation"] = rep.sup_gma_deviation;
  v["sup_dhym_residual"] = rep.sup_dhym_residual;
  v["sup_phase_deviation"] = rep.sup_phase_deviation;
  v["min_margins"] = margins_json(rep.min_margins);
  v["steps"] = result.trace.steps.size();
  if (!result.trace.steps.empty()) {
    const gma3::StepRecord& last = result.trace.steps.back();
    v["final"] = {{"t", last.t},
                  {"c_t", last.c_t},
                  {"sup_phi", last.sup_phi},
                  {"sup_lambda1", last.sup_lambda1}};
  }
  write_text(out / "verify.json", v.dump(2) + "\n");

  std::cout << "reached t = 1 in " << result.trace.steps.size()
            << " accepted steps\n"
            << "  sup |F~ - 1|          = " << rep.sup_gma_deviation << "\n"
            << "  sup |dhym residual|   = " << rep.sup_dhym_residual << "\n"
            << "  sup |phase - theta^|  = " << rep.sup_phase_deviation << "\n"
            << "outputs in " << out_dir << ": trace.csv, phi.gma3, verify.json\n";
  return kOk;
}

int cmd_check_lemmas(std::size_t count, std::uint64_t seed,
                     const std::string& out_dir) {
  gma3::SampleSpec spec;
  spec.count = count;
  spec.seed = seed;
  const std::vector<gma3::LemmaReport> reports = gma3::run_all_checks(spec);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const auto& r : reports)
      write_text(std::filesystem::path(out_dir) / (r.lemma + ".json"),
                 gma3::to_json_string(r));
    write_text(std::filesystem::path(out_dir) / "lemmas.json",
               gma3::to_json_string(reports));
  }

  bool all_pass = true;
  for (const auto& r : reports) {
    std::printf("%-26s %8zu samples  %3zu failures  worst slack % .3e  %s\n",
                r.lemma.c_str(), r.samples, r.failures, r.worst_slack,
                r.pass ? "PASS" : "FAIL");
    all_pass = all_pass && r.pass;
  }
  return all_pass ? kOk : kLemmaFailure;
}

int cmd_phase(const std::string& config_path) {
  const RunConfig cfg = gma3::load_run_config(config_path);
  const BackgroundData bg = gma3::prepare_background(cfg);
  const gma3::ClassIntegrals cls = gma3::class_integrals_grid(bg);
  const double h = bg.grid.min_spacing();

  std::cout << "theta_hat = " << bg.phase.theta_hat()
            << "  (tan = " << bg.phase.tan_theta()
            << ", sec^2 = " << bg.phase.sec2_theta() << ")\n";
  std::cout << "class integrals: int Omega^3 = " << cls.int_Omega3
            << ", int 3 omega^2 Omega = " << cls.int_3omega2Omega
            << ", int omega^3 = " << cls.int_omega3 << "\n";

  std::cout << "path constants:\n";
  for (int k = 0; k <= 10; ++k) {
    const double t = static_cast<double>(k) / 10.0;
    const gma3::PathPoint p = gma3::compute_ct(cls, t, bg.phase, 10.0 * h * h);
    std::printf("  t = %4.2f   c_t = %.12f\n", t, p.c_t);
  }

  const gma3::GridSubsolution sub = gma3::subsolution_margins_grid(bg);
  std::cout << "subsolution margins: min eigenvalue = " << sub.worst.min_lambda
            << ", min pair product = " << sub.worst.min_pair_product
            << (sub.ok() ? "  (ok)" : "  (VIOLATED)") << "\n";
  return kOk;
}

int dispatch(int argc, char** argv) {
  CLI::App app{
      "Continuation solver and lemma harness for the deformed "
      "Hermitian-Yang-Mills equation on flat complex 3-tori (generalized "
      "Monge-Ampere form, mixed-sign path)"};
  app.require_subcommand(1);

  int threads = 1;
  app.add_option("--threads", threads, "worker threads for pointwise maps")
      ->capture_default_str();

  std::string config_path;
  std::string out_dir;

  CLI::App* solve = app.add_subcommand(
      "solve", "run the continuation path t: 0 -> 1 and verify the result");
  solve->fallthrough();
  solve->add_option("--config", config_path, "JSON run configuration")
      ->required();
  solve->add_option("--out", out_dir, "output directory (default from config)");

  std::size_t count = 10000;
  std::uint64_t seed = 0x5eed;
  CLI::App* lemmas = app.add_subcommand(
      "check-lemmas", "randomized sweeps of the pointwise inequalities");
  lemmas->fallthrough();
  lemmas->add_option("--count", count, "samples per lemma")
      ->capture_default_str();
  lemmas->add_option("--seed", seed, "RNG seed")->capture_default_str();
  lemmas->add_option("--out", out_dir, "directory for JSON reports");

  CLI::App* phase = app.add_subcommand(
      "phase", "print the class angle, path constants and margins");
  phase->fallthrough();
  phase->add_option("--config", config_path, "JSON run configuration")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  gma3::set_max_threads(threads);

  if (solve->parsed()) return cmd_solve(config_path, out_dir);
  if (lemmas->parsed()) {
    if (count == 0) {
      std::cerr << "error: --count must be positive\n";
      return kUsage;
    }
    return cmd_check_lemmas(count, seed, out_dir);
  }
  return cmd_phase(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const gma3::hypothesis_violated_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kHypothesis;
  } catch (const gma3::no_convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const gma3::unsupported_phase_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnsupportedPhase;
  } catch (const gma3::inadmissible_class_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInadmissibleClass;
  } catch (const gma3::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const gma3::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
