#ifndef DAMC_RNG_HPP
#define DAMC_RNG_HPP

#include <cstdint>
#include <random>

namespace damc {

/// Seeded, splittable random stream.  A stream is identified by the pair
/// (seed, stream_id): the same pair always reproduces the same draw
/// sequence, and distinct stream ids give statistically independent
/// streams.  Every execution unit (chain, worker, latency model) owns its
/// own stream; nothing is shared.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Derive an independent child stream.  Children of distinct ids are
  /// themselves distinct streams under the same seed.
  RngStream split(std::uint64_t child_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  /// Uniform on (0, 1); never returns exactly zero.
  double uniform_pos();

  /// Standard normal via Wichura's AS 241 inverse CDF.  One uniform per
  /// draw, strictly monotone in the underlying uniform.
  double normal();

  /// Exponential(rate 1).
  double exponential();

  /// Gamma(shape, rate) by Marsaglia-Tsang; shape < 1 boosted.
  double gamma(double shape, double rate);

  double chi_squared(double dof) { return gamma(dof / 2.0, 0.5); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// AS 241 inverse of the standard normal CDF (PPND16 accuracy).
double normal_quantile(double p);

/// Standard normal CDF, accurate in both tails.
double normal_cdf(double x);

/// log of the standard normal pdf.
double normal_logpdf(double x);

}  // namespace damc

#endif  // DAMC_RNG_HPP
