#pragma once

// Portable seeded random streams. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the standard's distributions are not, so
// uniform and normal variates are derived here from the raw 64-bit output.

#include "srd/common.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

namespace srd {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class SeededSampler {
public:
    static constexpr const char* kAlgorithm = "mt19937_64/splitmix64";

    explicit SeededSampler(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), engine_(splitmix64(seed ^ splitmix64(stream + 1))) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Independent sampler for sub-stream `index` of this one.
    SeededSampler substream(std::uint64_t index) const {
        return SeededSampler(splitmix64(seed_ + 0x632be59bd9b4e019ULL * (stream_ + 1)), index);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Uniformly distributed unit vector in `dim` dimensions.
    Vector unit_direction(Eigen::Index dim) {
        Vector d(dim);
        double norm = 0.0;
        do {
            for (Eigen::Index k = 0; k < dim; ++k) d[k] = normal();
            norm = d.norm();
        } while (norm < 1e-300);
        return d / norm;
    }

    /// Uniform point in the box [lo, hi].
    Vector uniform_in_box(const Vector& lo, const Vector& hi) {
        Vector x(lo.size());
        for (Eigen::Index k = 0; k < lo.size(); ++k) x[k] = uniform(lo[k], hi[k]);
        return x;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace srd
