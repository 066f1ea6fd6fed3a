#pragma once

#include <cstdint>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

#include "sqrtreg/model.hpp"

namespace sqrtreg {

using Engine = boost::random::mt19937_64;

// Independent random streams. Each (seed, stream, index) triple names one
// generator, so results do not depend on evaluation order.
enum class Stream : std::uint64_t {
    Design = 1,
    Noise = 2,
    CvShuffle = 3,
    Support = 4,
    Restarts = 5,
    Sampling = 6,
};

std::uint64_t splitmix64(std::uint64_t x);
Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

VectorXd standard_normal(Engine& gen, std::size_t size);
double uniform01(Engine& gen);
// Uniform integer in [0, bound).
std::size_t uniform_index(Engine& gen, std::size_t bound);
// Fisher-Yates permutation of {0..size-1}.
std::vector<std::size_t> random_permutation(Engine& gen, std::size_t size);

}  // namespace sqrtreg
