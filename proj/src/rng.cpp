#include "sqrtreg/rng.hpp"

#include <numeric>
#include <utility>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace sqrtreg {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ index);
    return Engine(h);
}

VectorXd standard_normal(Engine& gen, std::size_t size) {
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    VectorXd v(static_cast<Eigen::Index>(size));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(gen);
    return v;
}

double uniform01(Engine& gen) {
    boost::random::uniform_01<double> u;
    return u(gen);
}

std::size_t uniform_index(Engine& gen, std::size_t bound) {
    if (bound == 0) throw InvalidArgument("uniform_index: empty range");
    boost::random::uniform_int_distribution<std::size_t> dist(0, bound - 1);
    return dist(gen);
}

std::vector<std::size_t> random_permutation(Engine& gen, std::size_t size) {
    std::vector<std::size_t> perm(size);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = size; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(gen, i)]);
    return perm;
}

}  // namespace sqrtreg
