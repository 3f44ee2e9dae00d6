#include "lhzqec/rng.hpp"

#include <cmath>

namespace lhzqec {

double Rng::exponential(double rate) { return -std::log(uniform_open()) / rate; }

}  // namespace lhzqec
