#ifndef DAMC_VERIFY_HPP
#define DAMC_VERIFY_HPP

#include <string>
#include <vector>

namespace damc {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;      // observed statistic (max error, eigenvalue gap, ...)
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  std::vector<std::string> notes;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::string to_json() const;
};

struct VerifyOptions {
  std::string suite = "all";  // all | kernels | theorems | adda | distributions
  std::uint64_t seed = 20240501;
  /// Testing aid: perturbs one conditional inside the kernel construction
  /// so the stationarity checks must fail.
  bool inject_kernel_bug = false;
};

VerifyReport run_verify(const VerifyOptions& options);

}  // namespace damc

#endif  // DAMC_VERIFY_HPP
