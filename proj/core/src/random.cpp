#include "crowdimpute/random.hpp"

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace crowdimpute {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

double Rng::uniform() {
  boost::random::uniform_01<double> dist;
  return dist(engine_);
}

double Rng::uniform(double lo, double hi) {
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine_);
}

std::size_t Rng::index(std::size_t n) {
  boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

double Rng::normal(double mean, double sd) {
  if (sd <= 0.0) return mean;
  boost::random::normal_distribution<double> dist(mean, sd);
  return dist(engine_);
}

double Rng::chi_squared(double dof) {
  boost::random::chi_squared_distribution<double> dist(dof);
  return dist(engine_);
}

}  // namespace crowdimpute
