#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "grnn/hash.hpp"

namespace grnn {

// Key for a deterministic random stream. Built by folding (seed, purpose tag,
// indices) through FNV-1a, so the same logical cell always yields the same
// stream no matter which thread or loop order touches it.
class RngKey {
public:
    explicit RngKey(std::uint64_t seed) : h_(fnv1a64_u64(seed)) {}

    RngKey& with(std::string_view tag) {
        h_ = fnv1a64(tag, h_);
        return *this;
    }
    RngKey& with(std::uint64_t v) {
        h_ = fnv1a64_u64(v, h_);
        return *this;
    }
    RngKey& with(int v) { return with(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    RngKey& with(double v) { return with(std::bit_cast<std::uint64_t>(v)); }

    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_;
};

// Minimal keyed RNG (splitmix64 core). Not cryptographic; chosen for exact
// reproducibility across runs and thread schedules.
class KeyedRng {
public:
    explicit KeyedRng(const RngKey& key) : state_(key.value()) {}
    explicit KeyedRng(std::uint64_t raw_key) : state_(raw_key) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // [lo, hi); returns lo exactly when lo == hi
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // standard normal via Box-Muller, one value per call (partner discarded
    // so draw counts stay predictable)
    double normal() {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace grnn
