#include "tnlab/random.hpp"

#include <cmath>

namespace tnlab {

namespace {

constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

Philox4x64::Block Philox4x64::block(Block ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

Philox4x64::result_type Philox4x64::operator()() {
  if (used_ == 4) {
    for (auto& word : counter_) {
      if (++word != 0) break;
    }
    buffer_ = block(counter_, key_);
    used_ = 0;
  }
  return buffer_[used_++];
}

double Philox4x64::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Philox4x64::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2 * std::log(u1));
  spare_ = r * std::sin(2 * M_PI * u2);
  has_spare_ = true;
  return r * std::cos(2 * M_PI * u2);
}

std::complex<double> Philox4x64::uniform_disc(double radius) {
  const double r = radius * std::sqrt(uniform());
  const double t = 2 * M_PI * uniform();
  return std::polar(r, t);
}

}  // namespace tnlab
