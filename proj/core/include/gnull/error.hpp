#pragma once

#include <stdexcept>
#include <string>

namespace gnull {

// Failure categories surfaced to callers. The CLI maps usage/config problems
// to exit code 1 and runtime or statistical failures to exit code 2.
enum class errc {
  invalid_argument,        // bad inputs, malformed config, schema violations
  singular_design,         // design matrix not full column rank
  separation,              // logistic MLE does not exist
  missing_history,         // model term references data the trajectory lacks
  missing_u,               // model term references u on a dataset without u
  enumeration_infeasible,  // exact enumeration over covariate paths too large
  bootstrap_unstable,      // too many bootstrap replicates failed to refit
  cell_failure,            // too many study replicates failed in one cell
  io_error,                // file read/write problems
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace gnull
