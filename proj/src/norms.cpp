#include "sqrtreg/norms.hpp"
#include "sqrtreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace sqrtreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_partition(const std::vector<IndexSet>& groups, std::size_t p) {
    std::vector<int> seen(p, 0);
    for (const auto& g : groups) {
        if (g.empty()) throw InvalidArgument("groups must be non-empty");
        for (auto j : g) {
            if (j >= p) throw InvalidArgument("group index " + std::to_string(j) + " out of range");
            if (seen[j]++) throw InvalidArgument("groups overlap at index " + std::to_string(j));
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        if (!seen[j]) throw InvalidArgument("groups do not cover index " + std::to_string(j));
}

// Pool-adjacent-violators for a non-increasing fit. Each element carries a
// statistic; a block's fitted value is value(sum of statistics, count).
template <class Value>
std::vector<double> pava_decreasing(const std::vector<double>& stat, Value value) {
    struct Block {
        double sum;
        double count;
        std::size_t start;
        double fitted;
    };
    std::vector<Block> stack;
    stack.reserve(stat.size());
    for (std::size_t i = 0; i < stat.size(); ++i) {
        Block b{stat[i], 1.0, i, value(stat[i], 1.0)};
        while (!stack.empty() && stack.back().fitted <= b.fitted) {
            b.sum += stack.back().sum;
            b.count += stack.back().count;
            b.start = stack.back().start;
            stack.pop_back();
            b.fitted = value(b.sum, b.count);
        }
        stack.push_back(b);
    }
    std::vector<double> out(stat.size());
    std::size_t end = stat.size();
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        for (std::size_t i = it->start; i < end; ++i) out[i] = it->fitted;
        end = it->start;
    }
    return out;
}

// Permutation sorting |v| in decreasing order; ties by original index.
std::vector<std::size_t> order_by_magnitude(const VectorXd& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(v(a)) > std::abs(v(b));
    });
    return idx;
}

double soft(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

// --- sorted l1 -------------------------------------------------------------

double sorted_l1_value(const VectorXd& lambda, const VectorXd& beta) {
    auto idx = order_by_magnitude(beta);
    double s = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) s += lambda(i) * std::abs(beta(idx[i]));
    return s;
}

double sorted_l1_dual(const VectorXd& lambda, const VectorXd& z) {
    auto idx = order_by_magnitude(z);
    double num = 0.0, den = 0.0, best = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        num += std::abs(z(idx[k]));
        den += lambda(k);
        best = std::max(best, num / den);
    }
    return best;
}

VectorXd sorted_l1_prox(const VectorXd& lambda, const VectorXd& v, double step) {
    const auto idx = order_by_magnitude(v);
    std::vector<double> stat(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) stat[i] = std::abs(v(idx[i])) - step * lambda(i);
    auto fitted = pava_decreasing(stat, [](double sum, double count) { return sum / count; });
    VectorXd out = VectorXd::Zero(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double mag = std::max(fitted[i], 0.0);
        out(idx[i]) = v(idx[i]) < 0 ? -mag : mag;
    }
    return out;
}

// --- group -----------------------------------------------------------------

double group_value(const std::vector<IndexSet>& groups, const VectorXd& beta) {
    double s = 0.0;
    for (const auto& g : groups) {
        double sq = 0.0;
        for (auto j : g) sq += beta(j) * beta(j);
        s += std::sqrt(static_cast<double>(g.size()) * sq);
    }
    return s;
}

double group_dual(const std::vector<IndexSet>& groups, const VectorXd& z) {
    double best = 0.0;
    for (const auto& g : groups) {
        double sq = 0.0;
        for (auto j : g) sq += z(j) * z(j);
        best = std::max(best, std::sqrt(sq / static_cast<double>(g.size())));
    }
    return best;
}

void group_shrink_inplace(const std::vector<IndexSet>& groups, VectorXd& v, double step) {
    for (const auto& g : groups) {
        double sq = 0.0;
        for (auto j : g) sq += v(j) * v(j);
        const double nrm = std::sqrt(sq);
        const double thr = step * std::sqrt(static_cast<double>(g.size()));
        const double scale = nrm > thr ? 1.0 - thr / nrm : 0.0;
        for (auto j : g) v(j) *= scale;
    }
}

// Dual of b -> l1 ||b||_1 + eta sqrt(|G|) ||b||_2 on one block: the t >= 0 with
// ||soft(z, t l1)||_2 = t eta sqrt(|G|).
double sparse_group_block_dual(const std::vector<double>& zabs, double l1, double eta) {
    double zmax = 0.0, znorm2 = 0.0;
    for (double a : zabs) {
        zmax = std::max(zmax, a);
        znorm2 += a * a;
    }
    if (zmax == 0.0) return 0.0;
    const double gw = eta * std::sqrt(static_cast<double>(zabs.size()));
    if (gw == 0.0) return zmax / l1;
    if (l1 == 0.0) return std::sqrt(znorm2) / gw;
    auto h = [&](double t) {
        double sq = 0.0;
        for (double a : zabs) {
            const double s = std::max(a - t * l1, 0.0);
            sq += s * s;
        }
        return std::sqrt(sq) - t * gw;
    };
    const double hi = zmax / l1;
    const double fhi = h(hi);
    if (fhi >= 0.0) return hi;
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(h, 0.0, hi, std::sqrt(znorm2), fhi,
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

double sparse_group_dual(const NormSpec::SparseGroup& sg, const VectorXd& z) {
    double best = 0.0;
    std::vector<double> buf;
    for (const auto& g : sg.groups) {
        buf.clear();
        for (auto j : g) buf.push_back(std::abs(z(j)));
        best = std::max(best, sparse_group_block_dual(buf, sg.l1_weight, sg.group_weight));
    }
    return best;
}

// --- structured: wedge -----------------------------------------------------

double wedge_value(const VectorXd& beta) {
    std::vector<double> sq(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) sq[j] = beta(j) * beta(j);
    // Optimal a is constant on blocks at the root-mean-square of beta there.
    auto a = pava_decreasing(sq, [](double sum, double count) { return std::sqrt(sum / count); });
    double s = 0.0;
    for (std::size_t j = 0; j < sq.size(); ++j)
        if (a[j] > 0.0) s += 0.5 * (sq[j] / a[j] + a[j]);
    return s;
}

double wedge_dual(const VectorXd& z) {
    double cum = 0.0, best = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        cum += z(k) * z(k);
        best = std::max(best, cum / static_cast<double>(k + 1));
    }
    return std::sqrt(best);
}

VectorXd wedge_prox(const VectorXd& v, double step) {
    std::vector<double> sq(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) sq[j] = v(j) * v(j);
    // Minimise sum_j v_j^2/(a_j+step) + a_j over the wedge; the bounded
    // solution is the unbounded isotonic fit clipped at zero.
    auto a = pava_decreasing(sq, [step](double sum, double count) {
        return std::sqrt(sum / count) - step;
    });
    VectorXd out(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double aj = std::max(a[j], 0.0);
        out(j) = aj > 0.0 ? v(j) * aj / (aj + step) : 0.0;
    }
    return out;
}

// --- structured: box-generated cone ---------------------------------------

constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;

double box_value(const ConeSpec::Box& box, const VectorXd& beta) {
    if (beta.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    const auto& l = box.lower;
    const auto& u = box.upper;
    auto g = [&](double t) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < beta.size(); ++j) {
            const double a = std::clamp(std::abs(beta(j)), t * l(j), t * u(j));
            s += 0.5 * (beta(j) * beta(j) / a + a);
        }
        return s;
    };
    const double t_lo =
        std::sqrt((beta.array().square() / u.array()).sum() / (u.sum() + l.sum()));
    const double t_hi = (beta.cwiseAbs().array() / l.array()).maxCoeff();
    std::uintmax_t iters = 500;
    auto r = boost::math::tools::brent_find_minima(g, t_lo, t_hi, kBrentBits, iters);
    return std::min({r.second, g(t_lo), g(t_hi)});
}

double box_dual(const ConeSpec::Box& box, const VectorXd& z) {
    // max over c in [l, u] of sum c_j z_j^2 / sum c_j: the top-k entries of
    // z^2 sit at the upper bound, the rest at the lower bound.
    const Eigen::Index p = z.size();
    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return z(a) * z(a) > z(b) * z(b); });
    double num = (box.lower.array() * z.array().square()).sum();
    double den = box.lower.sum();
    double best = num / den;
    for (auto j : idx) {
        num += (box.upper(j) - box.lower(j)) * z(j) * z(j);
        den += box.upper(j) - box.lower(j);
        best = std::max(best, num / den);
    }
    return std::sqrt(best);
}

VectorXd box_prox(const ConeSpec::Box& box, const VectorXd& v, double step) {
    const auto& l = box.lower;
    const auto& u = box.upper;
    const Eigen::Index p = v.size();
    auto a_at = [&](double t, Eigen::Index j) {
        return std::clamp(std::abs(v(j)) - step, t * l(j), t * u(j));
    };
    auto h = [&](double t) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double a = a_at(t, j);
            s += v(j) * v(j) / (a + step) + a;
        }
        return s;
    };
    const double t_hi = ((v.cwiseAbs().array() - step).max(0.0) / l.array()).maxCoeff();
    if (t_hi <= 0.0) return VectorXd::Zero(p);
    std::uintmax_t iters = 500;
    auto r = boost::math::tools::brent_find_minima(h, 0.0, t_hi, kBrentBits, iters);
    double t = r.first;
    if (h(0.0) <= r.second) t = 0.0;
    VectorXd out(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double a = a_at(t, j);
        out(j) = a > 0.0 ? v(j) * a / (a + step) : 0.0;
    }
    return out;
}

void check_dim(const NormSpec& spec, const VectorXd& v) {
    require_length(v, spec.dim(), "vector for norm");
}

}  // namespace

// --- construction ----------------------------------------------------------

NormSpec NormSpec::l1(std::size_t p, double weight) {
    if (p == 0) throw InvalidArgument("l1: dimension must be positive");
    if (!(weight > 0.0) || !std::isfinite(weight)) throw InvalidArgument("l1: weight must be > 0");
    return NormSpec(p, L1{weight});
}

NormSpec NormSpec::group(std::size_t p, std::vector<IndexSet> groups) {
    if (p == 0) throw InvalidArgument("group: dimension must be positive");
    for (auto& g : groups) std::sort(g.begin(), g.end());
    check_partition(groups, p);
    return NormSpec(p, Group{std::move(groups)});
}

NormSpec NormSpec::sorted_l1(VectorXd lambda) {
    if (lambda.size() == 0) throw InvalidArgument("sorted_l1: empty weight sequence");
    if (!lambda.allFinite()) throw InvalidArgument("sorted_l1: weights must be finite");
    for (Eigen::Index i = 1; i < lambda.size(); ++i)
        if (lambda(i) > lambda(i - 1))
            throw InvalidArgument("sorted_l1: weights must be non-increasing");
    if (!(lambda(lambda.size() - 1) > 0.0))
        throw InvalidArgument("sorted_l1: smallest weight must be > 0");
    const auto p = static_cast<std::size_t>(lambda.size());
    return NormSpec(p, SortedL1{std::move(lambda)});
}

NormSpec NormSpec::sparse_group(std::size_t p, double l1_weight, double group_weight,
                                std::vector<IndexSet> groups) {
    if (p == 0) throw InvalidArgument("sparse_group: dimension must be positive");
    if (!(l1_weight >= 0.0) || !(group_weight >= 0.0) || !std::isfinite(l1_weight) ||
        !std::isfinite(group_weight))
        throw InvalidArgument("sparse_group: weights must be finite and >= 0");
    if (l1_weight + group_weight <= 0.0)
        throw InvalidArgument("sparse_group: at least one weight must be positive");
    for (auto& g : groups) std::sort(g.begin(), g.end());
    check_partition(groups, p);
    return NormSpec(p, SparseGroup{l1_weight, group_weight, std::move(groups)});
}

NormSpec NormSpec::wedge(std::size_t p) {
    if (p == 0) throw InvalidArgument("wedge: dimension must be positive");
    return NormSpec(p, Structured{ConeSpec{ConeSpec::Wedge{}}});
}

NormSpec NormSpec::box(VectorXd lower, VectorXd upper) {
    if (lower.size() == 0 || lower.size() != upper.size())
        throw InvalidArgument("box: bounds must be non-empty and of equal length");
    if (!lower.allFinite() || !upper.allFinite()) throw InvalidArgument("box: bounds must be finite");
    if (!(lower.minCoeff() > 0.0)) throw InvalidArgument("box: lower bounds must be positive");
    if ((upper - lower).minCoeff() < 0.0) throw InvalidArgument("box: upper must be >= lower");
    const auto p = static_cast<std::size_t>(lower.size());
    return NormSpec(p, Structured{ConeSpec{ConeSpec::Box{std::move(lower), std::move(upper)}}});
}

std::string NormSpec::tag() const {
    return std::visit(overloaded{
                          [](const L1&) -> std::string { return "l1"; },
                          [](const Group&) -> std::string { return "group"; },
                          [](const SortedL1&) -> std::string { return "sorted_l1"; },
                          [](const SparseGroup&) -> std::string { return "sparse_group"; },
                          [](const Structured& s) -> std::string {
                              return std::holds_alternative<ConeSpec::Wedge>(s.cone.shape) ? "wedge"
                                                                                           : "box";
                          },
                      },
                      v_);
}

VectorXd linear_sequence(double first, double last, std::size_t p) {
    if (p == 0) throw InvalidArgument("linear_sequence: length must be positive");
    if (p == 1) return VectorXd::Constant(1, first);
    return VectorXd::LinSpaced(static_cast<Eigen::Index>(p), first, last);
}

std::vector<IndexSet> contiguous_groups(const std::vector<std::size_t>& sizes) {
    std::vector<IndexSet> groups;
    std::size_t next = 0;
    for (auto s : sizes) {
        IndexSet g(s);
        std::iota(g.begin(), g.end(), next);
        next += s;
        groups.push_back(std::move(g));
    }
    return groups;
}

// --- operations ------------------------------------------------------------

double norm_value(const NormSpec& spec, const VectorXd& beta) {
    check_dim(spec, beta);
    return std::visit(
        overloaded{
            [&](const NormSpec::L1& n) { return n.weight * beta.lpNorm<1>(); },
            [&](const NormSpec::Group& g) { return group_value(g.groups, beta); },
            [&](const NormSpec::SortedL1& s) { return sorted_l1_value(s.lambda, beta); },
            [&](const NormSpec::SparseGroup& sg) {
                return sg.l1_weight * beta.lpNorm<1>() + sg.group_weight * group_value(sg.groups, beta);
            },
            [&](const NormSpec::Structured& st) {
                if (const auto* box = std::get_if<ConeSpec::Box>(&st.cone.shape))
                    return box_value(*box, beta);
                return wedge_value(beta);
            },
        },
        spec.variant());
}

double dual_norm(const NormSpec& spec, const VectorXd& z) {
    check_dim(spec, z);
    return std::visit(
        overloaded{
            [&](const NormSpec::L1& n) { return z.lpNorm<Eigen::Infinity>() / n.weight; },
            [&](const NormSpec::Group& g) { return group_dual(g.groups, z); },
            [&](const NormSpec::SortedL1& s) { return sorted_l1_dual(s.lambda, z); },
            [&](const NormSpec::SparseGroup& sg) { return sparse_group_dual(sg, z); },
            [&](const NormSpec::Structured& st) {
                if (const auto* box = std::get_if<ConeSpec::Box>(&st.cone.shape))
                    return box_dual(*box, z);
                return wedge_dual(z);
            },
        },
        spec.variant());
}

VectorXd prox(const NormSpec& spec, const VectorXd& v, double step) {
    check_dim(spec, v);
    if (!(step > 0.0)) throw InvalidArgument("prox: step must be positive");
    return std::visit(
        overloaded{
            [&](const NormSpec::L1& n) -> VectorXd {
                return v.unaryExpr([t = step * n.weight](double x) { return soft(x, t); });
            },
            [&](const NormSpec::Group& g) -> VectorXd {
                VectorXd out = v;
                group_shrink_inplace(g.groups, out, step);
                return out;
            },
            [&](const NormSpec::SortedL1& s) -> VectorXd { return sorted_l1_prox(s.lambda, v, step); },
            [&](const NormSpec::SparseGroup& sg) -> VectorXd {
                VectorXd out = v.unaryExpr([t = step * sg.l1_weight](double x) { return soft(x, t); });
                group_shrink_inplace(sg.groups, out, step * sg.group_weight);
                return out;
            },
            [&](const NormSpec::Structured& st) -> VectorXd {
                if (const auto* box = std::get_if<ConeSpec::Box>(&st.cone.shape))
                    return box_prox(*box, v, step);
                return wedge_prox(v, step);
            },
        },
        spec.variant());
}

VectorXd project_ball(const NormSpec& spec, const VectorXd& x, double radius) {
    if (!(radius >= 0.0)) throw InvalidArgument("project_ball: radius must be >= 0");
    if (radius == 0.0) return VectorXd::Zero(x.size());
    const double nx = norm_value(spec, x);
    if (nx <= radius) return x;
    if (const auto* l1 = spec.as<NormSpec::L1>()) {
        // Sort-based projection onto the l1 ball of radius radius / weight.
        const double r = radius / l1->weight;
        std::vector<double> mag(x.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) mag[j] = std::abs(x(j));
        std::sort(mag.begin(), mag.end(), std::greater<>());
        double cum = 0.0, theta = 0.0;
        for (std::size_t k = 0; k < mag.size(); ++k) {
            cum += mag[k];
            const double cand = (cum - r) / static_cast<double>(k + 1);
            if (mag[k] > cand) theta = cand;
        }
        return x.unaryExpr([theta](double v) { return soft(v, theta); });
    }
    // The projection is prox_{mu Omega}(x) for the multiplier mu at which
    // Omega(prox) = radius; prox vanishes once mu >= Omega^*(x).
    const double mu_hi = dual_norm(spec, x);
    auto g = [&](double mu) { return norm_value(spec, prox(spec, x, mu)) - radius; };
    double lo = 0.0, hi = mu_hi;
    for (int it = 0; it < 100 && hi - lo > 1e-14 * mu_hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0) break;
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    VectorXd b = prox(spec, x, hi);
    const double nb = norm_value(spec, b);
    if (nb > radius) b *= radius / nb;
    return b;
}

double ell2_comparison_constant(const NormSpec& spec) {
    return std::visit(overloaded{
                          [](const NormSpec::L1& n) { return 1.0 / n.weight; },
                          [](const NormSpec::Group&) { return 1.0; },
                          [](const NormSpec::SortedL1& s) { return 1.0 / s.lambda(s.lambda.size() - 1); },
                          [](const NormSpec::SparseGroup& sg) {
                              return sg.l1_weight > 0.0 ? 1.0 / sg.l1_weight : 1.0 / sg.group_weight;
                          },
                          // 1/2 (b^2/a + a) >= |b| for every a > 0, so Omega >= ||.||_1 >= ||.||_2.
                          [](const NormSpec::Structured&) { return 1.0; },
                      },
                      spec.variant());
}

DualEstimate estimate_dual_norm(const NormSpec& spec, const VectorXd& z, int restarts,
                                std::uint64_t seed) {
    check_dim(spec, z);
    if (restarts < 1) throw InvalidArgument("estimate_dual_norm: restarts must be >= 1");
    DualEstimate est;
    est.restarts = restarts;
    const double zn = z.norm();
    if (zn == 0.0) return est;
    Engine gen = make_engine(seed, Stream::Restarts);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int r = 0; r < restarts; ++r) {
        VectorXd b = standard_normal(gen, spec.dim());
        b = project_ball(spec, b, 1.0);
        double best = z.dot(b);
        double step = 1.0 / zn;
        for (int it = 0; it < 60; ++it) {
            VectorXd cand = project_ball(spec, b + step * z, 1.0);
            const double val = z.dot(cand);
            if (val >= best) {
                best = val;
                b = std::move(cand);
            }
            step *= 1.5;
        }
        lo = std::min(lo, best);
        hi = std::max(hi, best);
    }
    est.value = hi;
    est.spread = hi - lo;
    return est;
}

bool is_allowed_set(const NormSpec& spec, const IndexSet& set) {
    const std::size_t p = spec.dim();
    IndexSet S = set;
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    if (!S.empty() && S.back() >= p) return false;
    return std::visit(overloaded{
                          [](const NormSpec::L1&) { return true; },
                          [&](const NormSpec::Group& g) {
                              for (const auto& grp : g.groups) {
                                  std::size_t inside = 0;
                                  for (auto j : grp)
                                      inside += std::binary_search(S.begin(), S.end(), j) ? 1 : 0;
                                  if (inside != 0 && inside != grp.size()) return false;
                              }
                              return true;
                          },
                          [](const NormSpec::SortedL1&) { return true; },
                          [](const NormSpec::SparseGroup& sg) { return sg.l1_weight > 0.0; },
                          [&](const NormSpec::Structured& st) {
                              if (std::holds_alternative<ConeSpec::Box>(st.cone.shape))
                                  return S.empty() || S.size() == p;
                              for (std::size_t i = 0; i < S.size(); ++i)
                                  if (S[i] != i) return false;
                              return true;
                          },
                      },
                      spec.variant());
}

ComplementNorm::ComplementNorm(NormSpec parent, IndexSet allowed_set)
    : parent_(std::move(parent)), S_(normalize_index_set(std::move(allowed_set), parent_.dim())) {
    if (!is_allowed_set(parent_, S_)) {
        std::string why;
        switch (parent_.variant().index()) {
            case 1: why = "S must be a union of groups"; break;
            case 3: why = "sparse-group complement needs a positive l1 weight"; break;
            case 4:
                why = parent_.tag() == "wedge" ? "wedge allows only prefix sets {0..k-1}"
                                               : "box cone allows only the empty or the full set";
                break;
            default: why = "set not allowed";
        }
        throw DisallowedSet("set not allowed for " + parent_.tag() + " norm: " + why);
    }
    Sc_ = complement(S_, parent_.dim());
    const std::size_t r = Sc_.size();
    if (r == 0) return;
    spec_ = std::visit(
        overloaded{
            [&](const NormSpec::L1& n) { return NormSpec::l1(r, n.weight); },
            [&](const NormSpec::Group& g) {
                std::vector<std::size_t> pos(parent_.dim(), 0);
                for (std::size_t i = 0; i < r; ++i) pos[Sc_[i]] = i;
                std::vector<IndexSet> groups;
                for (const auto& grp : g.groups) {
                    if (std::binary_search(S_.begin(), S_.end(), grp.front())) continue;
                    IndexSet mapped;
                    for (auto j : grp) mapped.push_back(pos[j]);
                    groups.push_back(std::move(mapped));
                }
                return NormSpec::group(r, std::move(groups));
            },
            [&](const NormSpec::SortedL1& s) {
                return NormSpec::sorted_l1(s.lambda.tail(static_cast<Eigen::Index>(r)));
            },
            [&](const NormSpec::SparseGroup& sg) { return NormSpec::l1(r, sg.l1_weight); },
            [&](const NormSpec::Structured&) {
                if (parent_.tag() == "box") return parent_;  // S is empty here
                return NormSpec::wedge(r);
            },
        },
        parent_.variant());
}

double ComplementNorm::value(const VectorXd& beta_sc) const {
    require_length(beta_sc, Sc_.size(), "beta_{S^c}");
    return spec_ ? norm_value(*spec_, beta_sc) : 0.0;
}

double ComplementNorm::dual(const VectorXd& z_sc) const {
    require_length(z_sc, Sc_.size(), "z_{S^c}");
    return spec_ ? dual_norm(*spec_, z_sc) : 0.0;
}

double complement_norm_value(const ComplementNorm& cn, const VectorXd& beta_sc) {
    return cn.value(beta_sc);
}

}  // namespace sqrtreg
