#ifndef DAMC_LOGCONCAVE_HPP
#define DAMC_LOGCONCAVE_HPP

#include <functional>

#include "damc/rng.hpp"

namespace damc {

/// Exact rejection sampler for a log-concave density known up to a constant.
///
/// Builds a piecewise-exponential envelope from two secants through three
/// points straddling the mode (the derivative-free tangent construction:
/// a secant extended beyond its own interval always lies above a concave
/// function, so the hull is valid no matter how roughly the mode is
/// located).  No adaptation; the three points are the mode estimate and
/// one curvature scale unit to either side.
///
/// `lo`/`hi` delimit the support and may be infinite.  `guess` seeds the
/// mode search.  Throws rejection_cap_error after max_attempts rejected
/// proposals and convergence_error if no integrable envelope exists.
double sample_log_concave(const std::function<double(double)>& log_density,
                          double lo, double hi, double guess, RngStream& rng,
                          int max_attempts = 100000);

}  // namespace damc

#endif  // DAMC_LOGCONCAVE_HPP
