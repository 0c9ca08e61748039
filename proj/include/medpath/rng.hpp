#pragma once

#include <cstdint>

namespace medpath {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so independent streams can be consumed in any
// order and replicate seeds are just seed + replicate index. The word
// function is the splitmix64 finalizer applied twice; normals come from
// the AS241 inverse-CDF, so sequences are identical across platforms.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream), counter_(0) {}

    // Raw 64-bit word for a given counter (stateless access).
    std::uint64_t word_at(std::uint64_t counter) const;

    // Sequential draws advance an internal counter.
    std::uint64_t next_word() { return word_at(counter_++); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform();

    // Uniform on open (0, 1); safe input for the inverse normal CDF.
    double uniform_open();

    // Standard normal via inverse CDF.
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Bernoulli(prob) in {0, 1}.
    int bernoulli(double prob) { return uniform() < prob ? 1 : 0; }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

// Quantile of the standard normal for u in (0,1). Wichura's AS241
// (PPND16), accurate to ~1e-16 relative in the central region.
double normal_quantile(double u);

}  // namespace medpath
