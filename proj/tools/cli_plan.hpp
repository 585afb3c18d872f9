#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lalnet::cli {

// Raised instead of running: code 0 for --help (text goes to stdout), 2 for usage errors.
class CliExit : public std::runtime_error {
 public:
  CliExit(int code, const std::string& text) : std::runtime_error(text), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

struct CliPlan {
  std::string subcommand;  // analyze, train, infer, eval, gradcheck, ablate
  // Explicit settings after merging: defaults < config file < flags.
  std::map<std::string, std::string> settings;
  uint64_t seed = 1;

  std::string data;         // train/ablate (optional), eval (required)
  std::string out;          // output file or directory
  std::string ckpt;         // infer/eval: checkpoint; train: optional checkpoint to resume
  std::string in;           // infer input image
  std::string analyze_dir;  // analyze input directory
  std::string spectra_dir;  // analyze: empty unless --spectra
  int levels = 3;           // analyze decomposition levels
  std::string op;           // gradcheck filter
  bool list = false;        // gradcheck: list case names
  std::string variants;     // ablate selection

  std::string settings_text() const;
  std::string get(const std::string& key, const std::string& fallback = "") const;
};

/// Flag spelling of a setting key: use_lga -> "lga" (toggle pair --lga/--no-lga),
/// other booleans keep their kebab-case name, everything else is --kebab-case VALUE.
std::string flag_name(const std::string& key);

/// Parses argv (argv[0] is the program name). Throws CliExit for help and usage errors;
/// usage messages name the offending token.
CliPlan parse_and_plan(int argc, const char* const* argv);

}  // namespace lalnet::cli
