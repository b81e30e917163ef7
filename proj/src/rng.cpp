#include "dgan/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dgan {

uint64_t derive_seed(uint64_t base, uint64_t stream) {
    uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::normal() {
    // u1 in (0,1] keeps the log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

int Rng::uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
}

std::string Rng::serialize() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
}

Rng Rng::deserialize(const std::string& s) {
    Rng r;
    std::istringstream is(s);
    is >> r.eng_;
    if (is.fail()) throw std::runtime_error("rng state: malformed serialization");
    return r;
}

}  // namespace dgan
