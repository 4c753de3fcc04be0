#ifndef PFBO_RNG_HPP
#define PFBO_RNG_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace pfbo {

/// Purpose tags used when splitting a master seed into independent streams.
/// Values are part of the reproducibility contract; do not renumber.
enum class StreamPurpose : std::uint64_t {
  simulate = 1,
  filter = 2,
  normalizer = 3,
  bo_eval = 4,
  loglik_stats = 5,
  experiment = 6,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a 64-bit stream key from a seed and an ordered list of
/// coordinates (purpose, cell, replicate, ...). Distinct coordinate tuples
/// give unrelated keys.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, StreamPurpose purpose,
                                 std::initializer_list<std::uint64_t> coords = {}) noexcept {
  std::uint64_t h = derive_seed(seed, {static_cast<std::uint64_t>(purpose)});
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// xoshiro256** 1.0 (Blackman and Vigna), a 64-bit generator with 256 bits
/// of state. Satisfies UniformRandomBitGenerator.
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256StarStar(std::uint64_t seed = 0) noexcept { seed_with(seed); }

  /// Fills the state with four consecutive SplitMix64 outputs.
  void seed_with(std::uint64_t seed) noexcept {
    std::uint64_t z = seed;
    for (auto& word : state_) {
      word = splitmix64(z);
      z += 0x9e3779b97f4a7c15ULL;
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

namespace detail {

/// Layer tables for a 128-layer ziggurat over the standard normal density
/// (Marsaglia and Tsang, in the formulation of Doornik's ZIGNOR).
struct ZigguratTables {
  static constexpr int kLayers = 128;
  static constexpr double kTailStart = 3.442619855899;
  static constexpr double kLayerArea = 9.91256303526217e-3;

  double x[kLayers + 1];
  double ratio[kLayers];

  ZigguratTables() noexcept {
    auto density = [](double v) { return std::exp(-0.5 * v * v); };
    double f = density(kTailStart);
    x[0] = kLayerArea / f;
    x[1] = kTailStart;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kLayerArea / x[i - 1] + f));
      f = density(x[i]);
    }
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }

  static const ZigguratTables& get() noexcept {
    static const ZigguratTables tables;
    return tables;
  }
};

}  // namespace detail

/// Deterministic random stream.
///
/// Engine: xoshiro256** seeded by SplitMix64 from the stream key (see
/// derive_seed for how keys are split per purpose). Uniforms take the top 53
/// bits of one engine word. Standard normals come from a 128-layer ziggurat: the low
/// 7 bits of a word pick the layer, bit 7 the sign and the top 53 bits the
/// abscissa; rejections and the tail (|z| > 3.4426) consume further words.
/// None of the implementation-defined <random> distributions are used.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : tables_(&detail::ZigguratTables::get()) { reseed(key); }

  void reseed(std::uint64_t key) noexcept { engine_.seed_with(key); }

  std::uint64_t bits() noexcept { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(static_cast<std::int64_t>(engine_() >> 11)) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() noexcept { return static_cast<double>(static_cast<std::int64_t>((engine_() >> 11) + 1)) * 0x1.0p-53; }

  double normal() noexcept {
    const std::uint64_t w = engine_();
    const int layer = static_cast<int>(w & 0x7f);
    const double u = static_cast<double>(static_cast<std::int64_t>(w >> 11)) * 0x1.0p-53;
    if (u < tables_->ratio[layer]) [[likely]] {
      // Bit 7 of w becomes the sign bit, branch-free.
      return std::bit_cast<double>(std::bit_cast<std::uint64_t>(u * tables_->x[layer]) ^ ((w & 0x80) << 56));
    }
    return normal_slow(w);
  }

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  /// Fills a contiguous range with standard normals.
  template <typename Derived>
  void fill_normal(Derived&& out) noexcept {
    const auto n = out.size();
    for (decltype(out.size()) i = 0; i < n; ++i) out[i] = normal();
  }

 private:
  // Wedge and tail cases of the ziggurat, entered with the word that missed
  // the rectangle test.
  [[gnu::noinline]] double normal_slow(std::uint64_t w) noexcept {
    const auto& z = *tables_;
    for (;;) {
      const int layer = static_cast<int>(w & 0x7f);
      const double sign = (w & 0x80) ? -1.0 : 1.0;
      const double u = static_cast<double>(static_cast<std::int64_t>(w >> 11)) * 0x1.0p-53;
      if (u < z.ratio[layer]) return sign * u * z.x[layer];
      const double xv = u * z.x[layer];
      if (layer == 0) {
        double a, b;
        do {
          a = -std::log(uniform_open0()) / detail::ZigguratTables::kTailStart;
          b = -std::log(uniform_open0());
        } while (b + b < a * a);
        return sign * (detail::ZigguratTables::kTailStart + a);
      }
      const double f_hi = std::exp(-0.5 * z.x[layer] * z.x[layer]);
      const double f_lo = std::exp(-0.5 * z.x[layer + 1] * z.x[layer + 1]);
      if (f_lo + uniform() * (f_hi - f_lo) < std::exp(-0.5 * xv * xv)) return sign * xv;
      w = engine_();
    }
  }

  Xoshiro256StarStar engine_;
  const detail::ZigguratTables* tables_;
};

}  // namespace pfbo

#endif  // PFBO_RNG_HPP
