#pragma once

#include <cmath>
#include <cstdint>

#include "fraccaloric/point.hpp"

namespace fc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with substream seeding.  Every Monte-Carlo path owns
// Rng(seed, path_index), so ensembles are identical for any worker count
// and scheduling order.  All variates are derived from raw 64-bit words
// here rather than through std:: distributions, which keeps streams
// bit-reproducible across standard libraries.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t mix = seed;
        splitmix64(mix);
        mix ^= 0x8f1bbcdcbfa53e0bULL * (stream + 1);
        for (auto& word : s_) word = splitmix64(mix);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential() { return -std::log(uniform()); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform();
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Pt normal_vec(int d) {
        Pt z{0, 0, 0};
        for (int i = 0; i < d; ++i) z[i] = normal();
        return z;
    }

    // Uniform direction on S^{d-1}.
    Pt direction(int d) {
        if (d == 1) return {next() & 1u ? 1.0 : -1.0, 0, 0};
        Pt z = normal_vec(d);
        double n = norm(z);
        while (n == 0.0) {
            z = normal_vec(d);
            n = norm(z);
        }
        return (1.0 / n) * z;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fc
