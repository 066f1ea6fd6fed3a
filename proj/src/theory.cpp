#include "sqrtreg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sqrtreg/rng.hpp"

namespace sqrtreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double noise_scale(const RegressionProblem& problem, const VectorXd& noise) {
    require_length(noise, problem.n(), "noise (n)");
    const double s = norm_n(noise);
    if (!(s > 0.0)) throw InvalidArgument("noise vector is zero: normalised levels are undefined");
    return s;
}

// Scale u so that Omega of its zero-padded version equals one.
bool retract(const NormSpec& spec, const IndexSet& S, VectorXd& u) {
    const double nu = norm_value(spec, scatter(u, S, spec.dim()));
    if (!(nu > 0.0) || !std::isfinite(nu)) return false;
    u /= nu;
    return true;
}

VectorXd project_complement(const ComplementNorm& cn, const VectorXd& v, double L) {
    if (v.size() == 0) return v;
    return project_ball(*cn.spec(), v, L);
}

struct EigenSearch {
    const NormSpec& spec;
    const ComplementNorm& cn;
    const IndexSet& S;
    MatrixXd XS;
    MatrixXd XSc;
    double n;
    double L;

    double value(const VectorXd& u, const VectorXd& v) const {
        VectorXd r = XS * u;
        if (v.size() > 0) r -= XSc * v;
        return 0.5 * r.squaredNorm() / n;
    }

    // Subgradient g of u -> Omega(pad u), scaled so that g^T u = 1. The dual-ball point
    // maximising g^T u is read off the prox at a large multiple of u.
    VectorXd subgradient(const VectorXd& u) const {
        const VectorXd x = scatter(u, S, spec.dim());
        const double t = 1e4 / std::max(x.cwiseAbs().maxCoeff(), 1e-300);
        const VectorXd g = gather(VectorXd(t * x - prox(spec, t * x, 1.0)), S);
        const double gu = g.dot(u);
        if (!(gu > 0.0) || !std::isfinite(gu)) return {};
        return g / gu;
    }

    void project(VectorXd& u, VectorXd& v, const VectorXd& g) const {
        const double gap = 1.0 - g.dot(u);
        if (gap > 0.0) u += gap / g.squaredNorm() * g;
        if (v.size() > 0) v = project_complement(cn, v, L);
    }

    // Convex-concave descent: Omega(u) >= 1 is replaced by g^T u >= 1 at a subgradient g,
    // the convex model is solved by projected FISTA, and the result is rescaled onto
    // Omega(u) = 1. Returns the final half squared distance.
    double descend(VectorXd& u, VectorXd& v, double lipschitz, int max_iter) const {
        double h = value(u, v);
        const double step = 1.0 / lipschitz;
        for (int outer = 0; outer < 100; ++outer) {
            const VectorXd g = subgradient(u);
            if (g.size() == 0) break;
            VectorXd xu = u, xv = v, yu = u, yv = v;
            project(xu, xv, g);
            yu = xu;
            yv = xv;
            double tk = 1.0;
            for (int it = 0; it < max_iter; ++it) {
                VectorXd r = XS * yu;
                if (yv.size() > 0) r -= XSc * yv;
                VectorXd nu = yu - step * (XS.transpose() * r) / n;
                VectorXd nv = yv.size() > 0 ? VectorXd(yv + step * (XSc.transpose() * r) / n) : yv;
                project(nu, nv, g);
                const double change = (nu - xu).squaredNorm() + (nv - xv).squaredNorm();
                const bool restart = (yu - nu).dot(nu - xu) + (yv - nv).dot(nv - xv) > 0.0;
                const double tn = restart ? 1.0 : 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
                const double mom = restart ? 0.0 : (tk - 1.0) / tn;
                yu = nu + mom * (nu - xu);
                yv = nv + mom * (nv - xv);
                xu = std::move(nu);
                xv = std::move(nv);
                tk = tn;
                if (change <= 1e-26 * (1.0 + xu.squaredNorm() + xv.squaredNorm())) break;
            }
            const double om = norm_value(spec, scatter(xu, S, spec.dim()));
            if (!(om > 0.0) || !std::isfinite(om)) break;
            xu /= om;
            if (om > 1.0) xv /= om;
            const double h_new = value(xu, xv);
            if (!(h_new < h)) break;
            const double gain = (h - h_new) / std::max(h, 1e-300);
            u = std::move(xu);
            v = std::move(xv);
            h = h_new;
            if (gain < 1e-13) break;
        }
        return h;
    }
};

}  // namespace

EmpiricalLevels empirical_levels(const RegressionProblem& problem, const NormSpec& spec,
                                 const IndexSet& S, const VectorXd& beta0, const VectorXd& noise,
                                 double lambda) {
    if (spec.dim() != problem.p()) throw DimensionError("norm dimension does not match p");
    require_length(beta0, problem.p(), "beta0 (p)");
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    const double s = noise_scale(problem, noise);
    const ComplementNorm cn(spec, S);
    const VectorXd w = problem.X().transpose() * noise / (static_cast<double>(problem.n()) * s);

    EmpiricalLevels lv;
    lv.f = lambda * norm_value(spec, beta0) / s;
    lv.lambda0 = dual_norm(spec, w);
    lv.lambdaS = dual_norm(spec, restrict_to(w, cn.allowed_set()));
    lv.lambdaSc = cn.dual(gather(w, cn.complement_set()));
    lv.lambdaM = std::max(lv.lambdaS, lv.lambdaSc);
    return lv;
}

EffectiveSparsity effective_sparsity(const RegressionProblem& problem, const NormSpec& spec,
                                     const IndexSet& S_in, double L,
                                     const EffectiveSparsityOptions& opts) {
    if (spec.dim() != problem.p()) throw DimensionError("norm dimension does not match p");
    if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("effective_sparsity: L must be positive");
    if (opts.restarts < 1) throw InvalidArgument("effective_sparsity: restarts must be >= 1");
    const ComplementNorm cn(spec, S_in);
    const IndexSet& S = cn.allowed_set();
    if (S.empty()) throw InvalidArgument("effective_sparsity: S is empty, so Omega(b_S) = 1 is infeasible");
    const IndexSet& Sc = cn.complement_set();

    EigenSearch search{spec, cn, S, columns(problem.X(), S), columns(problem.X(), Sc),
                       static_cast<double>(problem.n()), L};
    const double lipschitz = std::max(lipschitz_constant(problem.X()), 1e-300);

    EffectiveSparsity out;
    out.restarts = opts.restarts;
    double best = std::numeric_limits<double>::infinity();
    double worst = 0.0;
    VectorXd best_u, best_v;
    for (int r = 0; r < opts.restarts; ++r) {
        Engine gen = make_engine(opts.seed, Stream::Restarts, static_cast<std::uint64_t>(r));
        VectorXd u = standard_normal(gen, S.size());
        if (!retract(spec, S, u)) continue;
        VectorXd v = VectorXd::Zero(static_cast<Eigen::Index>(Sc.size()));
        if (r % 2 == 1 && !Sc.empty())
            v = project_complement(cn, standard_normal(gen, Sc.size()), L * uniform01(gen));
        const double h = search.descend(u, v, lipschitz, opts.max_iter);
        worst = std::max(worst, h);
        if (h < best) {
            best = h;
            best_u = u;
            best_v = v;
        }
    }
    if (!std::isfinite(best)) throw NumericalError("effective_sparsity: no restart produced a feasible point");
    double spread_lo = best;

    if (opts.dense_search && problem.p() <= opts.dense_max_dim && opts.dense_samples > 0) {
        Engine gen = make_engine(opts.seed, Stream::Sampling);
        double radius = 0.5;
        for (long k = 0; k < opts.dense_samples; ++k) {
            VectorXd u, v;
            if (k % 2 == 0) {
                u = standard_normal(gen, S.size());
                v = standard_normal(gen, Sc.size());
            } else {
                u = best_u + radius * standard_normal(gen, S.size());
                v = best_v + radius * standard_normal(gen, Sc.size());
            }
            if (!retract(spec, S, u)) continue;
            if (v.size() > 0) {
                const double target = k % 2 == 0 ? L * uniform01(gen) : L;
                const double nv = cn.value(v);
                if (k % 2 == 0) {
                    if (nv > 0.0) v *= target / nv;
                } else if (nv > L) {
                    v *= L / nv;
                }
            }
            const double h = search.value(u, v);
            if (h < best) {
                best = h;
                best_u = std::move(u);
                best_v = std::move(v);
            } else if (k % 2 == 1 && k % 2000 == 1) {
                radius = std::max(radius * 0.8, 1e-6);
            }
        }
        out.dense_samples = opts.dense_samples;
        // Polish the best sampled point.
        best = std::min(best, search.descend(best_u, best_v, lipschitz, opts.max_iter));
    }

    out.delta = std::sqrt(2.0 * best);
    out.delta_spread = std::sqrt(2.0 * worst) - std::sqrt(2.0 * std::min(spread_lo, worst));
    if (out.delta < 1e-10)
        throw DegenerateDesign("Omega-eigenvalue estimate " + std::to_string(out.delta) +
                               " is below 1e-10: the effective sparsity blows up for this design");
    out.gamma_sq = 1.0 / (out.delta * out.delta);
    return out;
}

OracleCertificate oracle_certificate(const RegressionProblem& problem, const NormSpec& spec,
                                     const IndexSet& S_in, const VectorXd& beta, const VectorXd& beta0,
                                     const VectorXd& noise, double lambda, double delta,
                                     const FitResult& fit, const EffectiveSparsityOptions& opts) {
    if (!(delta >= 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in [0, 1)");
    require_length(beta, problem.p(), "beta (p)");
    require_length(fit.beta_hat, problem.p(), "beta_hat (p)");
    const ComplementNorm cn(spec, S_in);
    const IndexSet& S = cn.allowed_set();
    for (auto j : support(beta))
        if (!std::binary_search(S.begin(), S.end(), j))
            throw InvalidArgument("support of beta is not contained in S (index " + std::to_string(j) + ")");

    OracleCertificate c;
    c.lambda = lambda;
    c.delta = delta;
    c.levels = empirical_levels(problem, spec, S, beta0, noise, lambda);
    const auto& lv = c.levels;
    const double f = lv.f;
    const double r0 = lv.lambda0 / lambda;
    c.lambda_star = lambda * (1.0 - r0 * (1.0 + 2.0 * f)) / (f + 2.0);
    c.lambda_tilde = lambda * (1.0 + f);
    c.a_const = 3.0 * (1.0 + f);
    c.assumption_one = r0 * (1.0 + 2.0 * f) < 1.0;
    c.assumptions_ok = c.assumption_one && c.a_const * lv.lambdaM < lambda;
    c.noise_norm_n = norm_n(noise);
    const double en = c.noise_norm_n;

    const MatrixXd& X = problem.X();
    const double n = static_cast<double>(problem.n());
    c.approximation = (X * (beta - beta0)).squaredNorm() / n;
    c.prediction = (X * (fit.beta_hat - beta0)).squaredNorm() / n;
    c.omega_S_error = norm_value(spec, restrict_to(fit.beta_hat, S) - beta);
    c.omega_Sc_error = cn.value(gather(fit.beta_hat, cn.complement_set()));
    c.lhs = c.prediction + 2.0 * delta * en *
                               ((c.lambda_star + lv.lambdaM) * c.omega_S_error +
                                (c.lambda_star - lv.lambdaM) * c.omega_Sc_error);
    c.residual_ratio = fit.residual_norm_n / en;

    if (c.lambda_star > lv.lambdaM) {
        c.L_S = (c.lambda_tilde + lv.lambdaM) / (c.lambda_star - lv.lambdaM) * (1.0 + delta) / (1.0 - delta);
        if (S.empty()) {
            // Omega(b_S) = 1 has no solution: the minimum is +inf and Gamma^2 = 0.
            c.sparsity.estimate = false;
            c.gamma_sq = 0.0;
        } else {
            c.sparsity = effective_sparsity(problem, spec, S, c.L_S, opts);
            c.gamma_sq = c.sparsity.gamma_sq;
        }
        const double k = (1.0 + delta) * (c.lambda_tilde + lv.lambdaM);
        c.rhs = c.approximation + en * en * k * k * c.gamma_sq;
        c.estimation_bound = c.rhs / (2.0 * delta * en * (c.lambda_star - lv.lambdaM));
    } else {
        c.L_S = kNaN;
        c.gamma_sq = kNaN;
        c.rhs = kNaN;
        c.estimation_bound = kNaN;
    }

    c.C = lv.lambdaM / lambda;
    const double q = c.C + f + 1.0;
    c.C1 = (1.0 + delta) * (1.0 + delta) * en * en * q * q;
    const double root = 1.0 - 2.0 * c.C * (1.0 + 2.0 * f);
    c.C2 = root >= 0.0 ? 1.0 / (2.0 * delta * en) / (std::sqrt(root) - c.C) : kNaN;
    c.corollary_prediction_bound = c.approximation + c.C1 * lambda * lambda * c.gamma_sq;
    c.corollary_estimation_bound = c.C2 * (c.approximation / lambda + c.C1 * lambda * c.gamma_sq);
    return c;
}

OracleCertificate oracle_certificate(const RegressionProblem& problem, const NormSpec& spec,
                                     const IndexSet& S, const VectorXd& beta, const VectorXd& beta0,
                                     const VectorXd& noise, double lambda, double delta,
                                     const EffectiveSparsityOptions& opts) {
    SolverConfig cfg;
    cfg.lambda = lambda;
    const FitResult fr = fit(problem, spec, cfg);
    if (!fr.converged)
        throw NumericalError("fit did not converge (KKT residual " + std::to_string(fr.kkt_residual) + ")");
    return oracle_certificate(problem, spec, S, beta, beta0, noise, lambda, delta, fr, opts);
}

double substituted_rhs(const OracleCertificate& cert, double sigma, double C) {
    const double k = (1.0 + cert.delta) * (cert.lambda_tilde + cert.levels.lambdaM);
    return cert.approximation + sigma * sigma * C * k * k * cert.gamma_sq;
}

// ---- calibration -----------------------------------------------------------

namespace {

double check_alpha_t(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    return std::sqrt(std::log(4.0 / alpha));
}

double boxed_delta(double t, std::size_t n) {
    if (n == 0) throw InvalidArgument("n must be positive");
    const double d2 = 1.0 - t * std::sqrt(2.0 / static_cast<double>(n));
    if (!(d2 > 0.0))
        throw InvalidArgument("Delta^2 = 1 - t sqrt(2/n) = " + std::to_string(d2) +
                              " is not positive; use a larger alpha or a larger n");
    return std::sqrt(d2);
}

double log_term(double count) { return std::sqrt(std::log(std::max(count, 1.0))); }

}  // namespace

double expected_dual_bound(const NormSpec& spec, std::size_t n) {
    if (n == 0) throw InvalidArgument("n must be positive");
    const double c = std::sqrt(2.0 / static_cast<double>(n));
    const double p = static_cast<double>(spec.dim());
    const double l1 = c * (2.0 + log_term(p));
    if (const auto* w = spec.as<NormSpec::L1>()) return l1 / w->weight;
    if (const auto* g = spec.as<NormSpec::Group>())
        return c * (2.0 + log_term(static_cast<double>(g->groups.size())));
    if (const auto* s = spec.as<NormSpec::SortedL1>()) {
        const double R2 = s->lambda.array().square().inverse().sum();
        return c * ((2.0 * std::sqrt(2.0) + 1.0) / std::sqrt(2.0) + log_term(R2));
    }
    if (const auto* sg = spec.as<NormSpec::SparseGroup>()) {
        double best = std::numeric_limits<double>::infinity();
        if (sg->l1_weight > 0.0) best = l1 / sg->l1_weight;
        if (sg->group_weight > 0.0)
            best = std::min(best, c * (2.0 + log_term(static_cast<double>(sg->groups.size()))) /
                                      sg->group_weight);
        return best;
    }
    // Structured norms dominate l1, so their duals are dominated by the sup norm.
    return l1;
}

ProbabilityBoundParams calibrate(const NormSpec& spec, std::size_t n, double alpha, Calibration cal) {
    ProbabilityBoundParams pb;
    pb.alpha = alpha;
    pb.t = check_alpha_t(alpha);
    if (cal == Calibration::Boxed) {
        pb.Delta = boxed_delta(pb.t, n);
    } else {
        const double d2 = 1.0 - 2.0 * pb.t / std::sqrt(static_cast<double>(n));
        if (!(d2 > 0.0))
            throw InvalidArgument("Delta^2 = 1 - 2t/sqrt(n) is not positive; use a larger alpha or a larger n");
        pb.Delta = std::sqrt(d2);
    }
    pb.D = ell2_comparison_constant(spec);
    pb.B2 = pb.D * pb.D;
    pb.EV_bound = expected_dual_bound(spec, n);
    pb.d = pb.t * std::sqrt(2.0 * pb.B2 / static_cast<double>(n)) / pb.Delta + pb.EV_bound;
    return pb;
}

namespace {
double bound_expression(const ProbabilityBoundParams& pb, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double gap = pb.d - pb.EV_bound;
    const double D2 = pb.Delta * pb.Delta;
    return 1.0 - 2.0 * std::exp(-gap * gap * D2 / (2.0 * pb.B2 / nn)) -
           2.0 * std::exp(-nn / 4.0 * (1.0 - D2) * (1.0 - D2));
}

void check_common(const ProbabilityBoundParams& pb, std::size_t n) {
    if (n == 0) throw InvalidArgument("n must be positive");
    if (!(pb.B2 > 0.0)) throw InvalidArgument("B2 must be positive");
    if (!(pb.d > pb.EV_bound)) throw InvalidArgument("requires d > E[V] bound");
}
}  // namespace

double probability_bound(const ProbabilityBoundParams& pb, std::size_t n) {
    check_common(pb, n);
    if (!(pb.Delta > 0.0)) throw InvalidArgument("requires Delta > 0");
    return bound_expression(pb, n);
}

double proposition_bound(const ProbabilityBoundParams& pb, std::size_t n) {
    check_common(pb, n);
    if (!(pb.Delta > 1.0)) throw InvalidArgument("requires Delta > 1");
    return bound_expression(pb, n);
}

NoiseNormBound noise_norm_bound(double sigma, std::size_t n, double x) {
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    if (!(x >= 0.0)) throw InvalidArgument("x must be non-negative");
    return {sigma * sigma * (1.0 + 2.0 * x + 2.0 * x * x),
            1.0 - std::exp(-static_cast<double>(n) * x * x)};
}

double noise_norm_probability_c(std::size_t n, double C) {
    if (!(C >= 1.0)) throw InvalidArgument("C must be >= 1");
    return 1.0 - std::exp(-static_cast<double>(n) / 2.0 * (C - std::sqrt(2.0 * C - 1.0)));
}

TheoreticalLambda theoretical_lambda(const NormSpec& spec, std::size_t n, double alpha,
                                     std::optional<StructuredLambdaInputs> structured) {
    TheoreticalLambda out;
    out.t = check_alpha_t(alpha);
    out.Delta = boxed_delta(out.t, n);
    const double c = std::sqrt(2.0 / static_cast<double>(n));
    const double td = out.t / out.Delta;
    const double p = static_cast<double>(spec.dim());
    const double lasso = c * (td + 2.0 + log_term(p));

    if (const auto* sg = spec.as<NormSpec::SparseGroup>()) {
        out.lambda = lasso;
        out.eta = c * (td + 2.0 + log_term(static_cast<double>(sg->groups.size())));
        return out;
    }
    if (spec.as<NormSpec::Structured>()) {
        if (structured) {
            if (!(structured->A_tilde > 0.0) || !(structured->extreme_points >= 1.0))
                throw InvalidArgument("structured lambda needs A_tilde > 0 and |E(A)| >= 1");
            out.lambda = c * (td * ell2_comparison_constant(spec) +
                              structured->A_tilde * (2.0 + log_term(structured->extreme_points)));
        } else {
            out.lambda = lasso;
            out.fallback = true;
        }
        return out;
    }
    out.lambda = c * td * ell2_comparison_constant(spec) + expected_dual_bound(spec, n);
    return out;
}

std::pair<VectorXd, bool> project_onto_support(const MatrixXd& X, const VectorXd& beta0, const IndexSet& S) {
    const auto p = static_cast<std::size_t>(X.cols());
    if (S.empty()) return {VectorXd::Zero(X.cols()), false};
    const MatrixXd XS = columns(X, S);
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(XS);
    const VectorXd coef = cod.solve(X * beta0);
    const bool deficient = cod.rank() < static_cast<Eigen::Index>(S.size());
    return {scatter(coef, S, p), deficient};
}

OraclePoint best_oracle_point(const RegressionProblem& problem, const NormSpec& spec,
                              const std::vector<IndexSet>& candidate_sets, const VectorXd& beta0,
                              const VectorXd& noise, double lambda, double delta, const FitResult& fit,
                              const EffectiveSparsityOptions& opts) {
    if (candidate_sets.empty()) throw InvalidArgument("best_oracle_point: no candidate sets");
    require_length(beta0, problem.p(), "beta0 (p)");
    std::optional<OraclePoint> best;
    for (const auto& cand : candidate_sets) {
        const IndexSet S = normalize_index_set(cand, problem.p());
        if (!is_allowed_set(spec, S)) throw DisallowedSet("candidate set is not allowed for the " + spec.tag() + " norm");
        auto [beta, deficient] = project_onto_support(problem.X(), beta0, S);
        OraclePoint pt{S, beta, oracle_certificate(problem, spec, S, beta, beta0, noise, lambda, delta, fit, opts),
                       deficient};
        const double v = std::isnan(pt.certificate.rhs) ? std::numeric_limits<double>::infinity()
                                                         : pt.certificate.rhs;
        const double b = !best ? std::numeric_limits<double>::infinity()
                               : (std::isnan(best->certificate.rhs) ? std::numeric_limits<double>::infinity()
                                                                    : best->certificate.rhs);
        if (!best || v < b) best = std::move(pt);
    }
    return *best;
}

}  // namespace sqrtreg
