#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace tnlab {

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
/// Block k of stream `seed` is philox(counter = k + 1, key = (seed, 0)),
/// which matches numpy.random.Philox(key=seed) word for word.
class Philox4x64 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  explicit Philox4x64(std::uint64_t seed = 0) : key_{seed, 0} {}

  static Block block(Block counter, Key key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  std::complex<double> uniform_disc(double radius);

 private:
  Key key_;
  Block counter_{0, 0, 0, 0};
  Block buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace tnlab
