#include "dwl/rng.hpp"

#include <cmath>
#include <numbers>

namespace dwl {

double SeededRng::normal() {
    // Box-Muller, cosine branch. u1 is shifted into (0,1] so log stays finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dwl
