#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dgan {

// Mixes a base seed with a stream id so each consumer gets an independent
// deterministic stream (splitmix64 finalizer).
uint64_t derive_seed(uint64_t base, uint64_t stream);

// The single randomness source of the artifact. Every stochastic draw flows
// through an Rng seeded (directly or via derive_seed) from the run seed;
// nothing samples ambient/global randomness. Gaussian draws use Box-Muller
// with no cached spare so the serialized engine state is the whole RNG state.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0,1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal();

    // [0,n)
    int uniform_int(int n);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::string serialize() const;
    static Rng deserialize(const std::string& s);

    bool operator==(const Rng& o) const { return eng_ == o.eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace dgan
