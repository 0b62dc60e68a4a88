#ifndef DAMC_ERRORS_HPP
#define DAMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace damc {

/// Invalid or non-finite parameter passed to a sampler or density.
struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A matrix required to be symmetric positive definite failed factorization.
struct not_spd_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A series or iterative scheme failed to converge within its term cap.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A rejection sampler exceeded its attempt cap.  Chains abort on this;
/// there is no silent fallback.
struct rejection_cap_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Distributed-protocol consistency violation (epoch ordering, duplication,
/// deadlock).  Carries a state dump in what().
struct protocol_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Kernel failure mid-run.  Reports how far the chain got.
struct chain_abort : std::runtime_error {
  chain_abort(const std::string& msg, int completed)
      : std::runtime_error(msg + " [iterations completed: " +
                           std::to_string(completed) + "]"),
        iterations_completed(completed) {}
  int iterations_completed;
};

}  // namespace damc

#endif  // DAMC_ERRORS_HPP
