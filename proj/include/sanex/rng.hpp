#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace sanex {

// Deterministic seedable generator: xoshiro256++ seeded via splitmix64.
// Normal variates use the classic Box-Muller transform with the second
// draw of each pair cached, so a given seed yields the same stream of
// values regardless of how they are requested.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64();

    // Uniform on [0, 1): top 53 bits of the raw output.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    int uniform_int(int n);
    // Standard normal draw.
    double normal();

    // Serializable state (4 words of generator state plus the Box-Muller cache).
    struct State {
        std::array<std::uint64_t, 4> s;
        bool has_spare;
        double spare;
    };
    State state() const;
    void set_state(const State& st);

private:
    std::array<std::uint64_t, 4> s_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Derives an independent stream seed from a master seed; used to give the
// training loop separate init/env/noise/batch streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// n i.i.d. standard-normal draws. Advances rng deterministically.
std::vector<double> standard_normal(Rng& rng, int n);

}  // namespace sanex
