#include "run_config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <stdexcept>

#include "gabp/io.hpp"

namespace gabp::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long to_long(const std::string& v, const std::string& key, int lineno) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ParseError(key + " needs an integer, got '" + v + "'", lineno);
  }
  return x;
}

double to_double(const std::string& v, const std::string& key, int lineno) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ParseError(key + " needs a number, got '" + v + "'", lineno);
  }
  return x;
}

constexpr const char* kScenarioKeys =
    "users, chips, frames, seed, sigma2, symbols, noise_file, spreading_file";
constexpr const char* kSolverKeys =
    "tolerance, max_iterations, schedule, damping, tolerance_mode";
constexpr const char* kDetectorKeys = "use";
constexpr const char* kOutputKeys = "csv, plot";

}  // namespace

DetectorKind parse_detector_name(const std::string& name) {
  if (name == "mf") return DetectorKind::matched_filter;
  if (name == "zf") return DetectorKind::decorrelator;
  if (name == "mmse") return DetectorKind::mmse;
  if (name == "pinv") return DetectorKind::pseudoinverse;
  throw std::invalid_argument("unknown detector '" + name + "'; valid: mf, zf, mmse, pinv");
}

std::vector<DetectorSpec> parse_detector_list(const std::string& names) {
  std::vector<DetectorSpec> out;
  std::size_t pos = 0;
  while (pos <= names.size()) {
    const std::size_t comma = names.find(',', pos);
    const std::string item =
        trim(comma == std::string::npos ? names.substr(pos) : names.substr(pos, comma - pos));
    if (item.empty()) throw std::invalid_argument("empty entry in detector list '" + names + "'");
    DetectorSpec spec;
    spec.kind = parse_detector_name(item);
    spec.clipping = spec.kind == DetectorKind::pseudoinverse ? Clipping::identity : Clipping::sign;
    out.push_back(spec);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("detector list is empty");
  return out;
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError("unterminated section header", lineno);
      section = text.substr(1, text.size() - 2);
      if (section != "scenario" && section != "solver" && section != "detectors" &&
          section != "output") {
        throw ParseError("unknown section [" + section +
                             "]; valid: [scenario], [solver], [detectors], [output]",
                         lineno);
      }
      continue;
    }
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (section.empty()) {
      throw ParseError("key '" + key + "' appears before any section header", lineno);
    }

    if (section == "scenario") {
      if (key == "users") {
        cfg.scenario.users = static_cast<int>(to_long(value, key, lineno));
      } else if (key == "chips") {
        cfg.scenario.chips = static_cast<int>(to_long(value, key, lineno));
      } else if (key == "frames") {
        cfg.scenario.num_frames = static_cast<int>(to_long(value, key, lineno));
      } else if (key == "seed") {
        cfg.scenario.rng_seed = static_cast<std::uint64_t>(to_long(value, key, lineno));
      } else if (key == "sigma2") {
        cfg.scenario.sigma2 = to_double(value, key, lineno);
      } else if (key == "symbols") {
        if (value == "binary") {
          cfg.scenario.symbols = SymbolAlphabet::binary;
        } else if (value == "gaussian") {
          cfg.scenario.symbols = SymbolAlphabet::gaussian;
        } else {
          throw ParseError("symbols must be binary or gaussian", lineno);
        }
      } else if (key == "noise_file") {
        cfg.scenario.noise_diagonal = read_vector_file(value);
      } else if (key == "spreading_file") {
        cfg.scenario.spreading = read_rectangular_file(value);
      } else {
        throw ParseError("unknown key '" + key + "' in [scenario]; valid keys: " + kScenarioKeys,
                         lineno);
      }
    } else if (section == "solver") {
      if (key == "tolerance") {
        cfg.solver.tolerance = to_double(value, key, lineno);
      } else if (key == "max_iterations") {
        cfg.solver.max_iterations = static_cast<int>(to_long(value, key, lineno));
      } else if (key == "schedule") {
        if (value == "synchronous") {
          cfg.solver.schedule = Schedule::synchronous;
        } else if (value == "sequential") {
          cfg.solver.schedule = Schedule::sequential;
        } else {
          throw ParseError("schedule must be synchronous or sequential", lineno);
        }
      } else if (key == "damping") {
        cfg.solver.damping = to_double(value, key, lineno);
        cfg.damping_set = true;
      } else if (key == "tolerance_mode") {
        if (value == "absolute") {
          cfg.solver.tolerance_mode = ToleranceMode::absolute;
        } else if (value == "scaled") {
          cfg.solver.tolerance_mode = ToleranceMode::scaled;
        } else {
          throw ParseError("tolerance_mode must be absolute or scaled", lineno);
        }
      } else {
        throw ParseError("unknown key '" + key + "' in [solver]; valid keys: " + kSolverKeys,
                         lineno);
      }
    } else if (section == "detectors") {
      if (key == "use") {
        try {
          cfg.detectors = parse_detector_list(value);
        } catch (const std::invalid_argument& e) {
          throw ParseError(e.what(), lineno);
        }
      } else {
        throw ParseError("unknown key '" + key + "' in [detectors]; valid keys: " + kDetectorKeys,
                         lineno);
      }
    } else {
      if (key == "csv") {
        cfg.csv_path = value;
      } else if (key == "plot") {
        cfg.plot_path = value;
      } else {
        throw ParseError("unknown key '" + key + "' in [output]; valid keys: " + kOutputKeys,
                         lineno);
      }
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return parse_run_config(in);
}

}  // namespace gabp::cli
