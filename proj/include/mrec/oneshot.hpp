#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mrec/entropies.hpp"
#include "mrec/linalg.hpp"
#include "mrec/typicality.hpp"

namespace mrec {

/// Optimal test for D_H^ε(ρ‖σ) with a matching dual certificate.
///   primal = tr(Qσ)/ε,  dual = μ(1 - tr(Y)/ε) with μ(ρ - Y) ≤ σ, Y ≥ 0.
struct HypothesisTestResult {
    double value_bits = 0.0;
    Matrix Q;
    double dual_mu = 0.0;
    Matrix dual_Y;
    double primal = 0.0;
    double dual = 0.0;
    double duality_gap = 0.0;  // (primal - dual) / primal
    double threshold = 0.0;
};

namespace detail {

/// tr(P_{>0}(ρ - tσ) ρ).
inline double positive_part_mass(const Matrix& rho, const Matrix& sigma, double t) {
    SpectralDecomposition e = hermitian_eig(hermitian_part(rho - t * sigma));
    double scale = std::max(1.0, std::abs(e.max_eigenvalue()));
    double m = 0.0;
    for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i)
        if (e.eigenvalues(i) > 1e-14 * scale) m += (e.eigenvectors.col(i).adjoint() * rho * e.eigenvectors.col(i))(0, 0).real();
    return m;
}

/// Neyman-Pearson test at threshold t: the eigenvectors of ρ - tσ are taken in
/// decreasing eigenvalue order until their ρ-weight reaches ε, the last one
/// fractionally.
inline Matrix threshold_test(const Matrix& rho, const Matrix& sigma, double t, double eps) {
    SpectralDecomposition e = hermitian_eig(hermitian_part(rho - t * sigma));
    const Eigen::Index d = rho.rows();
    Matrix q = Matrix::Zero(d, d);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d && acc < eps; ++i) {
        Vector v = e.eigenvectors.col(i);
        double w = (v.adjoint() * rho * v)(0, 0).real();
        if (w <= 0.0) continue;
        double p = std::min(1.0, (eps - acc) / w);
        q += p * v * v.adjoint();
        acc += p * w;
    }
    return q;
}

inline Matrix positive_part(const Matrix& m) {
    return matrix_function(m, [](double x) { return x > 0.0 ? x : 0.0; }, Domain::Real);
}

} // namespace detail

inline HypothesisTestResult hypothesis_divergence(const Matrix& rho, const Matrix& sigma, double eps) {
    require_square(rho, "hypothesis_divergence");
    if (sigma.rows() != rho.rows() || sigma.cols() != rho.cols())
        fail(ErrorKind::DimMismatch, "hypothesis_divergence: operand sizes differ");
    detail::nonnegative_eig(rho, "hypothesis_divergence");
    SpectralDecomposition es = detail::nonnegative_eig(sigma, "hypothesis_divergence");
    const double tr_rho = real_trace(rho);
    if (!(eps > 0.0) || eps > tr_rho * (1.0 + 1e-12))
        fail(ErrorKind::EpsilonOutOfRange, "hypothesis_divergence: need 0 < eps <= tr(rho)");
    if (es.max_eigenvalue() <= 0.0) fail(ErrorKind::InvalidState, "hypothesis_divergence: sigma is zero");
    eps = std::min(eps, tr_rho);
    const Eigen::Index d = rho.rows();
    HypothesisTestResult r;

    // Weight of ρ outside supp(σ) can be accepted at zero cost.
    Matrix kernel = Matrix::Identity(d, d) - support_projector(sigma);
    double free_mass = real_trace(kernel * rho);
    if (free_mass >= eps * (1.0 - 1e-12)) {
        r.value_bits = kInfinity;
        r.Q = kernel;
        r.dual_Y = Matrix::Zero(d, d);
        r.threshold = kInfinity;
        return r;
    }

    const double tol = 1e-12 * tr_rho;
    auto accepts = [&](double t) { return detail::positive_part_mass(rho, sigma, t) >= eps - tol; };
    double lo = 1.0, hi = 1.0;
    if (accepts(1.0)) {
        while (accepts(hi) && hi < 1e300) hi *= 2.0;
        lo = hi / 2.0;
    } else {
        while (!accepts(lo) && lo > 1e-300) lo /= 2.0;
        hi = lo * 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (accepts(mid) ? lo : hi) = mid;
    }

    r.threshold = hi;
    r.Q = detail::threshold_test(rho, sigma, hi, eps);
    r.primal = real_trace(r.Q * sigma) / eps;
    r.value_bits = r.primal > 0.0 ? -std::log2(r.primal) : kInfinity;

    // Dual certificate: μ = 1/t, Y = (ρ - tσ)_+, evaluated at both bracket ends.
    double best = -kInfinity;
    for (double t : {lo, hi}) {
        Matrix y = detail::positive_part(hermitian_part(rho - t * sigma));
        double val = (1.0 / t) * (1.0 - real_trace(y) / eps);
        if (val > best) {
            best = val;
            r.dual_mu = 1.0 / t;
            r.dual_Y = y;
        }
    }
    r.dual = best;
    r.duality_gap = r.primal > 0.0 ? (r.primal - r.dual) / r.primal : 0.0;
    return r;
}

/// log2 of the smallest λ with ρ ≤ λσ; +inf when supp(ρ) ⊄ supp(σ).
inline double max_divergence(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows()) fail(ErrorKind::DimMismatch, "max_divergence: operand sizes differ");
    SpectralDecomposition es = detail::nonnegative_eig(sigma, "max_divergence");
    detail::nonnegative_eig(rho, "max_divergence");
    Matrix kernel = Matrix::Identity(rho.rows(), rho.rows()) -
                    matrix_function(es, [](double) { return 1.0; }, Domain::Support);
    if (real_trace(kernel * rho) > 1e-9 * real_trace(rho)) return kInfinity;
    Matrix inv = matrix_function(es, [](double x) { return 1.0 / std::sqrt(x); }, Domain::Support);
    double lam = max_eigenvalue(hermitian_part(inv * rho * inv));
    return lam > 0.0 ? std::log2(lam) : -kInfinity;
}

namespace detail {

/// Classical smoothing program in log form over weighted outcomes:
///   minimise λ  s.t.  x_i ≤ λ q_i,  Σ x_i ≤ 1,  Σ √(x_i p_i) ≥ √(1 - ε²).
/// For fixed λ the optimal x is x_i = min(λ q_i, κ p_i) (water filling).
/// Returns log2 λ.
inline double smooth_max_log(const std::vector<double>& log2p, const std::vector<double>& log2q, double eps) {
    const std::size_t m = log2p.size();
    const double target = std::sqrt(std::max(0.0, 1.0 - eps * eps));
    double dmax = -kInfinity;
    double support_p = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(log2p[i])) continue;
        if (!std::isfinite(log2q[i])) continue;
        dmax = std::max(dmax, log2p[i] - log2q[i]);
        support_p += std::exp2(log2p[i]);
    }
    bool violation = false;
    for (std::size_t i = 0; i < m; ++i)
        if (std::isfinite(log2p[i]) && !std::isfinite(log2q[i])) violation = true;
    if (eps == 0.0) return violation ? kInfinity : dmax;

    // F(λ) for a given log2 λ.
    auto fid = [&](double loglam) {
        struct Item { double brk; double c; double p; };
        std::vector<Item> items;
        double cap_total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (!std::isfinite(log2p[i]) || !std::isfinite(log2q[i])) continue;
            double logc = loglam + log2q[i];
            items.push_back({logc - log2p[i], std::exp2(std::min(logc, 1000.0)), std::exp2(log2p[i])});
            cap_total += items.back().c;
        }
        // Σ min(c_i, κ p_i) as κ grows; find κ with Σ = 1, or cap everything.
        std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.brk < b.brk; });
        double log_kappa = kInfinity;
        if (cap_total > 1.0) {
            double capped = 0.0;
            double free_p = 0.0;
            for (const auto& it : items) free_p += it.p;
            for (std::size_t j = 0; j < items.size(); ++j) {
                // κ below breakpoint j: Σ = capped + κ free_p
                double kappa = (1.0 - capped) / free_p;
                if (free_p > 0.0 && std::log2(kappa) <= items[j].brk) {
                    log_kappa = std::log2(kappa);
                    break;
                }
                capped += items[j].c;
                free_p -= items[j].p;
            }
        }
        double f = 0.0;
        for (const auto& it : items) {
            double logx = std::min(it.brk, log_kappa) + std::log2(it.p);  // min(c, κ p) in log form
            f += std::exp2(0.5 * (logx + std::log2(it.p)));
        }
        return f;
    };

    if (std::sqrt(support_p) < target) return kInfinity;
    double hi = dmax;
    for (int k = 0; fid(hi) < target; ++k) {
        if (k > 2000) return kInfinity;
        hi += 1.0;
    }
    double lo = hi - 1.0;
    while (fid(lo) >= target) {
        double width = hi - lo;
        hi = lo;
        lo -= 2.0 * width;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        (fid(mid) >= target ? hi : lo) = mid;
    }
    return hi;
}

/// Joint eigenbasis spectra of commuting ρ, σ; NotApplicable otherwise.
inline void commuting_spectra(const Matrix& rho, const Matrix& sigma, std::vector<double>& p, std::vector<double>& q) {
    if (rho.rows() != sigma.rows()) fail(ErrorKind::DimMismatch, "commuting_spectra: operand sizes differ");
    double scale = std::max({1.0, max_abs(rho), max_abs(sigma)});
    if (max_abs(rho * sigma - sigma * rho) > 1e-9 * scale * scale)
        fail(ErrorKind::NotApplicable, "classical path requires commuting operators");
    SpectralDecomposition er = hermitian_eig(rho);
    Matrix s = er.eigenvectors.adjoint() * sigma * er.eigenvectors;
    const Eigen::Index d = rho.rows();
    p.assign(d, 0.0);
    q.assign(d, 0.0);
    Eigen::Index start = 0;
    const double tol = 1e-9 * std::max(1.0, std::abs(er.max_eigenvalue()));
    while (start < d) {
        Eigen::Index end = start + 1;
        while (end < d && std::abs(er.eigenvalues(end) - er.eigenvalues(start)) <= tol) ++end;
        RealVector block = hermitian_eigenvalues(s.block(start, start, end - start, end - start));
        for (Eigen::Index i = start; i < end; ++i) {
            p[i] = std::max(0.0, er.eigenvalues(i));
            q[i] = std::max(0.0, block(i - start));
        }
        start = end;
    }
}

inline std::vector<double> log2_vector(const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v) out.push_back(x > 0.0 ? std::log2(x) : -kInfinity);
    return out;
}

} // namespace detail

/// D_max^ε for commuting (probability-vector) arguments, solved exactly.
inline double smooth_max_divergence_classical(const std::vector<double>& p, const std::vector<double>& q, double eps) {
    if (p.size() != q.size()) fail(ErrorKind::DimMismatch, "smooth_max_divergence_classical: sizes differ");
    if (!(eps >= 0.0 && eps < 1.0)) fail(ErrorKind::EpsilonOutOfRange, "smooth_max_divergence_classical: need 0 <= eps < 1");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] < 0.0 || q[i] < 0.0) fail(ErrorKind::InvalidState, "smooth_max_divergence_classical: negative entry");
    return detail::smooth_max_log(detail::log2_vector(p), detail::log2_vector(q), eps);
}

inline double smooth_max_divergence_classical(const Matrix& rho, const Matrix& sigma, double eps) {
    std::vector<double> p, q;
    detail::commuting_spectra(rho, sigma, p, q);
    return smooth_max_divergence_classical(p, q, eps);
}

struct UpperBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// D_H^ε(ρ‖σ) ≤ log2 λ - log2(1 - Δ(ρ, ρ̄)/ε) for ρ̄ ≤ λσ.
inline UpperBoundCheck dh_upper_bound_check(const Matrix& rho, const Matrix& rho_bar, const Matrix& sigma, double lambda,
                                            double eps) {
    if (!(lambda > 0.0)) fail(ErrorKind::PreconditionViolated, "dh_upper_bound_check: lambda must be positive");
    if (min_eigenvalue(hermitian_part(lambda * sigma - rho_bar)) < -1e-8)
        fail(ErrorKind::PreconditionViolated, "dh_upper_bound_check: rho_bar is not below lambda sigma");
    double delta = trace_distance(rho, rho_bar);
    if (!(delta < eps)) fail(ErrorKind::PreconditionViolated, "dh_upper_bound_check: need distance below eps");
    UpperBoundCheck c;
    c.lhs = hypothesis_divergence(rho, sigma, eps).value_bits;
    c.rhs = std::log2(lambda) - std::log2(1.0 - delta / eps);
    c.holds = c.lhs <= c.rhs + 1e-8;
    return c;
}

// ---- asymptotic behaviour ----

struct AepRow {
    int n = 0;
    double value_bits = 0.0;  // D_H^ε(ρ^{⊗n}‖σ^{⊗n}) / n
    double d_limit = 0.0;     // D(ρ‖σ)
    double epsilon = 0.0;
};

namespace detail {

/// Joint outcomes (p_i, q_i) with identical pairs merged.
struct JointAlphabet {
    std::vector<double> log2p, log2q;
    std::vector<int> multiplicity;
};

inline JointAlphabet merge_outcomes(const std::vector<double>& p, const std::vector<double>& q) {
    JointAlphabet a;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0 && q[i] <= 0.0) continue;
        double lp = p[i] > 0.0 ? std::log2(p[i]) : -kInfinity;
        double lq = q[i] > 0.0 ? std::log2(q[i]) : -kInfinity;
        bool merged = false;
        for (std::size_t j = 0; j < a.log2p.size(); ++j) {
            auto same = [](double x, double y) {
                return (!std::isfinite(x) && !std::isfinite(y)) || std::abs(x - y) <= 1e-12;
            };
            if (same(a.log2p[j], lp) && same(a.log2q[j], lq)) {
                ++a.multiplicity[j];
                merged = true;
                break;
            }
        }
        if (!merged) {
            a.log2p.push_back(lp);
            a.log2q.push_back(lq);
            a.multiplicity.push_back(1);
        }
    }
    return a;
}

struct TypeMasses {
    std::vector<double> log2P, log2Q;  // total probability of each type class
};

inline TypeMasses type_masses(const JointAlphabet& a, int n) {
    const int k = static_cast<int>(a.log2p.size());
    if (type_count(k, n) > kMaxTypes) fail(ErrorKind::TooManyTypes, "aep: more than 1e7 type classes");
    TypeMasses tm;
    for_each_composition(k, n, [&](const std::vector<int>& c) {
        double base = log2_multinomial(n, c);
        double lp = base, lq = base;
        for (int s = 0; s < k; ++s) {
            if (c[s] == 0) continue;
            double lm = std::log2(static_cast<double>(a.multiplicity[s]));
            lp += c[s] * (a.log2p[s] + lm);
            lq += c[s] * (a.log2q[s] + lm);
        }
        tm.log2P.push_back(std::isnan(lp) ? -kInfinity : lp);
        tm.log2Q.push_back(std::isnan(lq) ? -kInfinity : lq);
    });
    return tm;
}

/// Classical Neyman-Pearson over type classes: accept types in decreasing
/// likelihood ratio until the P-weight reaches ε. Returns D_H^ε in bits.
inline double classical_dh_types(const TypeMasses& tm, double eps) {
    std::vector<std::size_t> order(tm.log2P.size());
    std::iota(order.begin(), order.end(), 0);
    auto ratio = [&](std::size_t i) {
        if (!std::isfinite(tm.log2P[i])) return -kInfinity;
        if (!std::isfinite(tm.log2Q[i])) return kInfinity;
        return tm.log2P[i] - tm.log2Q[i];
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratio(a) > ratio(b); });
    double acc = 0.0;
    double log_cost = -kInfinity;  // log2 Σ accepted Q-weight
    auto add_log = [](double a, double b) {
        if (!std::isfinite(a)) return b;
        if (!std::isfinite(b)) return a;
        double m = std::max(a, b);
        return m + std::log2(std::exp2(a - m) + std::exp2(b - m));
    };
    for (std::size_t i : order) {
        if (acc >= eps) break;
        if (!std::isfinite(tm.log2P[i])) continue;
        double w = std::exp2(tm.log2P[i]);
        double frac = std::min(1.0, (eps - acc) / w);
        if (std::isfinite(tm.log2Q[i])) log_cost = add_log(log_cost, std::log2(frac) + tm.log2Q[i]);
        acc += frac * w;
    }
    if (!std::isfinite(log_cost)) return kInfinity;
    return -(log_cost - std::log2(eps));
}

} // namespace detail

/// (1/n) D_H^ε(ρ^{⊗n}‖σ^{⊗n}). Commuting pairs use type classes; otherwise the
/// tensor powers are formed explicitly (d^n ≤ 4096).
inline double aep_value(const Matrix& rho, const Matrix& sigma, double eps, int n) {
    if (n < 1) fail(ErrorKind::OutOfRange, "aep: n must be positive");
    if (!(eps > 0.0 && eps <= 1.0)) fail(ErrorKind::EpsilonOutOfRange, "aep: need 0 < eps <= 1");
    double scale = std::max({1.0, max_abs(rho), max_abs(sigma)});
    if (max_abs(rho * sigma - sigma * rho) <= 1e-9 * scale * scale) {
        std::vector<double> p, q;
        detail::commuting_spectra(rho, sigma, p, q);
        detail::JointAlphabet a = detail::merge_outcomes(p, q);
        return detail::classical_dh_types(detail::type_masses(a, n), eps) / n;
    }
    double total = std::pow(static_cast<double>(rho.rows()), n);
    if (total > 4096.0) fail(ErrorKind::TooLarge, "aep: d^n exceeds 4096 for a non-commuting pair");
    return hypothesis_divergence(kron_power(rho, n), kron_power(sigma, n), eps).value_bits / n;
}

inline std::vector<AepRow> aep_trace(const Matrix& rho, const Matrix& sigma, double eps, const std::vector<int>& ns) {
    double d = relative_entropy(rho, sigma);
    std::vector<AepRow> rows;
    for (int n : ns) rows.push_back({n, aep_value(rho, sigma, eps, n), d, eps});
    return rows;
}

/// (1/n) D_max^ε(p^{⊗n}‖q^{⊗n}) for probability vectors, via type classes.
inline double smooth_max_iid(const std::vector<double>& p, const std::vector<double>& q, double eps, int n) {
    detail::JointAlphabet a = detail::merge_outcomes(p, q);
    detail::TypeMasses tm = detail::type_masses(a, n);
    return detail::smooth_max_log(tm.log2P, tm.log2Q, eps) / n;
}

} // namespace mrec
