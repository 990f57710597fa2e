#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gabp/detectors.hpp"
#include "gabp/engine.hpp"
#include "gabp/simulator.hpp"

namespace gabp::cli {

// Flat key-value document with one nesting level (INI sections). Sections
// and keys:
//   [scenario]  users chips frames seed sigma2 symbols noise_file spreading_file
//   [solver]    tolerance max_iterations schedule damping tolerance_mode
//   [detectors] use            (comma-separated: mf zf mmse pinv)
//   [output]    csv plot
// Unknown sections or keys are rejected, naming the valid set. Flags given
// on the command line override anything read here.
struct RunConfig {
  Scenario scenario;
  SolverConfig solver;
  std::vector<DetectorSpec> detectors;
  std::string csv_path;
  std::string plot_path;
  bool damping_set = false;
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

DetectorKind parse_detector_name(const std::string& name);
std::vector<DetectorSpec> parse_detector_list(const std::string& names);

}  // namespace gabp::cli
