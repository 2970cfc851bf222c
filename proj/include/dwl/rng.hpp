#pragma once

#include <cstdint>
#include <random>

namespace dwl {

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard, so identical seeds produce identical
// streams on every platform. Derived draws consume engine outputs in a
// documented order:
//   - uniform():    1 engine draw, top 53 bits -> [0,1)
//   - uniform_u64:  1 engine draw, modulo reduction
//   - normal():     2 engine draws (Box-Muller, cosine branch only)
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n); n must be positive
    std::uint64_t uniform_u64(std::uint64_t n) { return next_u64() % n; }

    // Integer in [lo, hi], inclusive
    long long uniform_int(long long lo, long long hi) {
        return lo + static_cast<long long>(uniform_u64(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Standard normal
    double normal();

    // mean + std * normal()
    double normal(double mean, double std_dev) { return mean + std_dev * normal(); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace dwl
