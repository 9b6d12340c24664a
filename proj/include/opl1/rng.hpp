#ifndef OPL1_RNG_HPP_
#define OPL1_RNG_HPP_

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace opl1
{

//
// Self-contained 64-bit generator so that instances are reproducible on any
// platform; <random> distributions are implementation-defined.
//
//   SplitMix64   seeds and derives substreams
//   xoshiro256** draws
//
// A substream is fully determined by (seed, index): trials can run in any
// order or concurrently without changing their numbers.
//
class SplitMix64
{
public:
    explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

    constexpr std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

class Rng
{
public:
    explicit Rng(std::uint64_t seed)
    {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    // independent stream for trial `index` of a run seeded with `seed`
    static Rng stream(std::uint64_t seed, std::uint64_t index)
    {
        SplitMix64 base(seed);
        const std::uint64_t root = base.next();
        // odd multiplier: a bijection on the index, unrelated to the seed path
        SplitMix64 mix(root ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
        return Rng(mix.next());
    }

    // child stream; advances this generator by one draw
    Rng split() { return Rng(next_u64()); }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer on [lo, hi]
    int uniform_int(int lo, int hi)
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // log-uniform on [lo, hi], lo > 0
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    // standard normal, Box-Muller (one variate per call)
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // circular complex Gaussian with E|z|^2 = 1
    std::complex<double> complex_normal()
    {
        const double re = normal();
        const double im = normal();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace opl1

#endif
