#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gma3/continuation.hh"
#include "gma3/torus_fields.hh"

// JSON run configuration for the CLI.  Schema (matrix entries are numbers
// or [re, im] pairs; the matrix must be Hermitian):
//
//   {
//     "grid": { "dims_active": 2, "resolution": [32, 32] },
//     "background": {
//       "omega": [[1,0,0],[0,1,0],[0,0,1]],
//       "Omega0": [[...]],            // XOR "curvature"
//       "theta_hat": 2.356...,        // required with Omega0
//       "psi0_modes": [ { "type": "cos", "wave": [1,0,0,0,0,0],
//                         "amplitude": 0.05 } ]
//     },
//     "solver": { "newton_tol": 1e-12, ... },   // all fields optional
//     "output_dir": "out"
//   }
//
// With "curvature" the phase angle is derived from the total class
// integral; with "Omega0" the given theta_hat is cross-checked against it
// (mismatch beyond 1e-10 raises inadmissible_class_error).

namespace gma3 {

struct RunConfig {
  int dims_active = 1;
  std::vector<int> resolution;

  HermitianForm omega;
  std::optional<HermitianForm> Omega0;
  std::optional<HermitianForm> curvature;
  std::optional<double> theta_hat;
  std::vector<TrigMode> psi0_modes;

  SolverConfig solver;
  std::string output_dir = "out";
};

/// Parses the JSON text.  Malformed input raises domain_error with a
/// message naming the offending key.
RunConfig parse_run_config(const std::string& json_text);

/// Reads and parses a config file (io_error on filesystem problems).
RunConfig load_run_config(const std::string& path);

/// Builds the background: grid, psi0 synthesis, phase resolution and the
/// class-angle consistency check described above.
BackgroundData prepare_background(const RunConfig& config);

}  // namespace gma3
