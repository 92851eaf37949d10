#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "papm/classifier.hpp"
#include "papm/field_spec.hpp"

namespace papm::app {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kSchemaVersion = 1;

/// Bad input: unreadable file, malformed JSON or expression, bad flags.
class InputError : public Error {
 public:
  using Error::Error;
};

struct Tolerances {
  double curvature = 1e-4;
  double derivative = 1e-5;
  double structure = 1e-6;
};

struct LoadedSpec {
  Json echo;
  FieldSpec field;
  std::vector<Coordinates> points;
  bool points_from_spec = false;
  std::uint64_t seed = kDefaultSeed;
  double fd_step = 1e-5;
};

/// PAPM_SEED if set (decimal, non-negative), else the built-in seed.
std::uint64_t resolve_seed();

LoadedSpec spec_from_json(const Json& doc, std::uint64_t seed);
LoadedSpec load_spec(const std::string& path, std::uint64_t seed);

struct Options {
  std::string spec_path;
  Tolerances tol;
  std::optional<double> fd_step;
};

struct ClassifyOptions {
  std::optional<std::string> named;
  std::optional<double> lambda, mu;
};

struct SweepOptions {
  std::string lambda_range, mu_range;
  int steps = 9;
  std::string json_path;
};

/// Each command writes its report and returns the exit code. Errors in the
/// input are thrown as InputError.
int cmd_validate(const Options& o, std::ostream& out);
int cmd_classify(const Options& o, const ClassifyOptions& c, std::ostream& out);
int cmd_verify(const Options& o, const std::string& identity, const ClassifyOptions& c, std::ostream& out);
int cmd_sweep(const Options& o, const SweepOptions& s, std::ostream& csv, std::ostream& err);

/// Full command line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "A:B" with A <= B.
std::pair<double, double> parse_range(const std::string& text);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace papm::app
