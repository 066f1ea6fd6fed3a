#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sqrtreg/model.hpp"

namespace sqrtreg {

/// Convex cone A in [0, inf)^p defining a structured-sparsity norm
///   Omega(beta; A) = min_{a in A} 1/2 sum_j (beta_j^2 / a_j + a_j).
///
/// Box is the cone generated by the box [lower, upper], i.e.
/// { t c : t >= 0, lower <= c <= upper }. Wedge is { a_1 >= a_2 >= ... >= a_p >= 0 }.
struct ConeSpec {
    struct Box {
        VectorXd lower;
        VectorXd upper;
    };
    struct Wedge {};
    std::variant<Box, Wedge> shape;
};

/// Tagged description of a penalty norm on R^p.
///
/// Instances are built through the named constructors, which validate the
/// parameters (partitions, monotone weights, positive bounds). An existing
/// NormSpec is always valid.
class NormSpec {
public:
    struct L1 {
        double weight = 1.0;  // Omega = weight * ||beta||_1
    };
    struct Group {
        std::vector<IndexSet> groups;  // partition of {0..p-1}; Omega = sum sqrt|G| ||beta_G||_2
    };
    struct SortedL1 {
        VectorXd lambda;  // lambda_1 >= ... >= lambda_p > 0
    };
    struct SparseGroup {
        double l1_weight = 0.0;
        double group_weight = 0.0;
        std::vector<IndexSet> groups;
    };
    struct Structured {
        ConeSpec cone;
    };
    using Variant = std::variant<L1, Group, SortedL1, SparseGroup, Structured>;

    static NormSpec l1(std::size_t p, double weight = 1.0);
    static NormSpec group(std::size_t p, std::vector<IndexSet> groups);
    static NormSpec sorted_l1(VectorXd lambda);
    static NormSpec sparse_group(std::size_t p, double l1_weight, double group_weight,
                                 std::vector<IndexSet> groups);
    static NormSpec wedge(std::size_t p);
    static NormSpec box(VectorXd lower, VectorXd upper);

    std::size_t dim() const noexcept { return p_; }
    const Variant& variant() const noexcept { return v_; }
    // Short tag: "l1", "group", "sorted_l1", "sparse_group", "wedge" or "box".
    std::string tag() const;

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&v_);
    }

private:
    NormSpec(std::size_t p, Variant v) : p_(p), v_(std::move(v)) {}

    std::size_t p_;
    Variant v_;
};

// Regular decreasing sequence from `first` to `last` with `p` entries.
VectorXd linear_sequence(double first, double last, std::size_t p);

// Groups of the given contiguous sizes, e.g. {1, 2} -> {{0}, {1, 2}}.
std::vector<IndexSet> contiguous_groups(const std::vector<std::size_t>& sizes);

double norm_value(const NormSpec& spec, const VectorXd& beta);

// Omega^*(z) = max { z^T b : Omega(b) <= 1 }, evaluated in closed form for every variant.
double dual_norm(const NormSpec& spec, const VectorXd& z);

// argmin_b 1/2 ||b - v||_2^2 + step * Omega(b).
VectorXd prox(const NormSpec& spec, const VectorXd& v, double step);

// Euclidean projection onto { b : Omega(b) <= radius }.
VectorXd project_ball(const NormSpec& spec, const VectorXd& x, double radius);

// Constant D with ||b||_2 <= D * Omega(b) for all b.
double ell2_comparison_constant(const NormSpec& spec);

/// Numeric estimate of the dual norm by projected-gradient maximisation of
/// z^T b over the unit ball, restarted from random points. `spread` is
/// max - min over restarts.
struct DualEstimate {
    double value = 0.0;
    double spread = 0.0;
    int restarts = 0;
};
DualEstimate estimate_dual_norm(const NormSpec& spec, const VectorXd& z, int restarts = 20,
                                std::uint64_t seed = 0);

// Whether S is an allowed set (weak decomposability holds with the complement norm below).
bool is_allowed_set(const NormSpec& spec, const IndexSet& S);

/// The complement norm Omega^{S^c} on R^{|S^c|} of a weakly decomposable norm,
/// so that Omega(beta) >= Omega(beta_S) + Omega^{S^c}(beta_{S^c}).
///
///   L1            the same l1 norm on S^c
///   Group         the group norm over the groups in S^c (S must be a union of groups)
///   SortedL1      sorted-l1 with the r = |S^c| smallest weights
///   SparseGroup   l1_weight * ||.||_1
///   Wedge         the wedge norm on the tail (S must be a prefix {0..k-1})
///   Box           S must be empty or everything
class ComplementNorm {
public:
    ComplementNorm(NormSpec parent, IndexSet allowed_set);

    const NormSpec& parent() const noexcept { return parent_; }
    const IndexSet& allowed_set() const noexcept { return S_; }
    const IndexSet& complement_set() const noexcept { return Sc_; }
    // Norm on R^{|S^c|}; empty when S^c is empty.
    const std::optional<NormSpec>& spec() const noexcept { return spec_; }

    double value(const VectorXd& beta_sc) const;
    double dual(const VectorXd& z_sc) const;

private:
    NormSpec parent_;
    IndexSet S_;
    IndexSet Sc_;
    std::optional<NormSpec> spec_;
};

double complement_norm_value(const ComplementNorm& cn, const VectorXd& beta_sc);

}  // namespace sqrtreg
