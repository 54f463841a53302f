#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace mrec;
using namespace mrec::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::OutOfRange;
}

/// Grid search for the classical D_max^ε over subnormalized ρ̄ = (a, b): for each a
/// the smallest feasible b is optimal, since the objective max(a/q0, b/q1) grows with b.
double smooth_max_grid(const std::vector<double>& p, const std::vector<double>& q, double eps) {
    double target = std::sqrt(1.0 - eps * eps);
    double best = kInfinity;
    for (int i = 0; i <= 10000; ++i) {
        double a = i * 1e-4;
        double need = target - std::sqrt(a * p[0]);
        double b = need > 0.0 ? need * need / p[1] : 0.0;
        if (a + b > 1.0 + 1e-12) continue;
        best = std::min(best, std::max(a / q[0], b / q[1]));
    }
    return std::log2(best);
}

/// Exhaustive search over threshold tests in a common eigenbasis (with one
/// fractional entry), the classical Neyman-Pearson oracle.
double dh_classical_oracle(const std::vector<double>& p, const std::vector<double>& q, double eps) {
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] * q[b] > p[b] * q[a]; });
    double acc = 0.0, cost = 0.0;
    for (std::size_t i : idx) {
        if (acc + p[i] >= eps) {
            cost += q[i] * (eps - acc) / p[i];
            break;
        }
        acc += p[i];
        cost += q[i];
    }
    return -std::log2(cost / eps);
}

} // namespace

TEST(HypothesisDivergence, EqualStatesGiveZero) {
    Rng rng(1);
    Matrix rho = random_state(3, rng);
    for (double eps : {0.1, 0.5, 1.0}) EXPECT_NEAR(hypothesis_divergence(rho, rho, eps).value_bits, 0.0, 1e-9);
}

TEST(HypothesisDivergence, DiagonalExample) {
    HypothesisTestResult r = hypothesis_divergence(diag({0.5, 0.5}), diag({0.75, 0.25}), 0.5);
    EXPECT_NEAR(r.value_bits, 1.0, 1e-9);
    EXPECT_NEAR(r.value_bits, dh_classical_oracle({0.5, 0.5}, {0.75, 0.25}, 0.5), 1e-9);
    EXPECT_LE(max_abs(r.Q - diag({0.0, 1.0})), 1e-9);
}

TEST(HypothesisDivergence, MatchesClassicalOracle) {
    Rng rng(2);
    for (int i = 0; i < 30; ++i) {
        std::vector<double> p(4), q(4);
        double sp = 0, sq = 0;
        for (int k = 0; k < 4; ++k) sp += p[k] = rng.uniform() + 0.01, sq += q[k] = rng.uniform() + 0.01;
        for (int k = 0; k < 4; ++k) p[k] /= sp, q[k] /= sq;
        double eps = 0.05 + 0.9 * rng.uniform();
        Matrix rho = Matrix::Zero(4, 4), sigma = Matrix::Zero(4, 4);
        for (int k = 0; k < 4; ++k) rho(k, k) = p[k], sigma(k, k) = q[k];
        EXPECT_NEAR(hypothesis_divergence(rho, sigma, eps).value_bits, dh_classical_oracle(p, q, eps), 1e-8);
    }
}

TEST(HypothesisDivergence, CertificatesAreFeasible) {
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
        int d = 2 + i % 7;
        Rng r = rng.split(i);
        Matrix rho = random_state(d, r.split(1), 1 + i % d), sigma = random_state(d, r.split(2));
        double eps = 0.05 + 0.9 * r.uniform();
        HypothesisTestResult h = hypothesis_divergence(rho, sigma, eps);
        Matrix id = Matrix::Identity(d, d);
        EXPECT_GE(min_eigenvalue(hermitian_part(h.Q)), -1e-8);
        EXPECT_GE(min_eigenvalue(hermitian_part(id - h.Q)), -1e-8);
        EXPECT_GE(real_trace(h.Q * rho), eps - 1e-8);
        EXPECT_GE(min_eigenvalue(h.dual_Y), -1e-8);
        EXPECT_GE(min_eigenvalue(hermitian_part(sigma - h.dual_mu * (rho - h.dual_Y))), -1e-8);
        EXPECT_LE(h.dual, h.primal * (1.0 + 1e-12));
        EXPECT_LE(h.duality_gap, 1e-6);
    }
}

TEST(HypothesisDivergence, RescalingAndMonotonicity) {
    Rng rng(4);
    Matrix rho = random_state(3, rng.split(1)), sigma = random_state(3, rng.split(2));
    double base = hypothesis_divergence(rho, sigma, 0.3).value_bits;
    EXPECT_NEAR(hypothesis_divergence(rho, 4.0 * sigma, 0.3).value_bits, base - 2.0, 1e-9);
    double prev = kInfinity;
    for (double eps : {0.05, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        double v = hypothesis_divergence(rho, sigma, eps).value_bits;
        EXPECT_LE(v, prev + 1e-9);
        prev = v;
    }
}

TEST(HypothesisDivergence, Errors) {
    Matrix rho = diag({0.5, 0.5});
    EXPECT_EQ(kind_of([&] { hypothesis_divergence(rho, rho, 0.0); }), ErrorKind::EpsilonOutOfRange);
    EXPECT_EQ(kind_of([&] { hypothesis_divergence(rho, rho, 1.5); }), ErrorKind::EpsilonOutOfRange);
    EXPECT_TRUE(std::isinf(hypothesis_divergence(diag({0.0, 1.0}), diag({1.0, 0.0}), 0.5).value_bits));
}

TEST(MaxDivergence, Examples) {
    Rng rng(5);
    Matrix rho = random_state(3, rng.split(1));
    EXPECT_NEAR(max_divergence(rho, rho), 0.0, 1e-9);
    EXPECT_NEAR(max_divergence(diag({1.0, 0.0}), diag({0.5, 0.5})), 1.0, 1e-12);
    EXPECT_TRUE(std::isinf(max_divergence(diag({0.5, 0.5}), diag({1.0, 0.0}))));
    for (int i = 0; i < 10; ++i) {
        Matrix a = random_state(3, rng.split(10 + i)), b = random_state(3, rng.split(50 + i));
        double lam = std::exp2(max_divergence(a, b));
        EXPECT_GE(min_eigenvalue(hermitian_part(lam * b - a)), -1e-8);
        double scale = 0.1 + 9.9 * rng.uniform();
        EXPECT_NEAR(max_divergence(a, scale * b), std::log2(lam) - std::log2(scale), 1e-8);
    }
}

TEST(SmoothMax, EdgeCases) {
    std::vector<double> p{0.5, 0.5}, q{0.75, 0.25};
    EXPECT_NEAR(smooth_max_divergence_classical(p, q, 0.0), max_divergence(diag({0.5, 0.5}), diag({0.75, 0.25})), 1e-9);
    // ρ̄ ≤ λp caps the overlap at √λ, so the optimum is λ = 1 - ε²
    for (double eps : {0.0, 0.2, 0.6})
        EXPECT_NEAR(smooth_max_divergence_classical(p, p, eps), std::log2(1.0 - eps * eps), 1e-9);
}

TEST(SmoothMax, AgreesWithGridOracle) {
    std::vector<double> p{0.5, 0.5}, q{0.75, 0.25};
    EXPECT_NEAR(smooth_max_divergence_classical(p, q, 0.3), smooth_max_grid(p, q, 0.3), 1e-3);
    std::vector<double> p2{0.8, 0.2}, q2{0.3, 0.7};
    for (double eps : {0.1, 0.4}) EXPECT_NEAR(smooth_max_divergence_classical(p2, q2, eps), smooth_max_grid(p2, q2, eps), 1e-3);
}

TEST(SmoothMax, MonotoneInEpsilonAndBelowDmax) {
    std::vector<double> p{0.6, 0.3, 0.1}, q{0.2, 0.3, 0.5};
    double dmax = std::log2(3.0);
    double prev = kInfinity;
    for (double eps : {0.0, 0.1, 0.2, 0.4, 0.7, 0.9}) {
        double v = smooth_max_divergence_classical(p, q, eps);
        EXPECT_LE(v, prev + 1e-9);
        EXPECT_LE(v, dmax + 1e-9);
        prev = v;
    }
}

TEST(SmoothMax, NonCommutingRejected) {
    Matrix plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    EXPECT_EQ(kind_of([&] { smooth_max_divergence_classical(plus, diag({0.7, 0.3}), 0.1); }), ErrorKind::NotApplicable);
}

TEST(UpperBound, TrivialAndMixedTowardSigma) {
    Rng rng(6);
    Matrix rho = random_state(3, rng.split(1)), sigma = random_state(3, rng.split(2));
    double lam = std::exp2(max_divergence(rho, sigma)) * (1.0 + 1e-9);
    UpperBoundCheck c = dh_upper_bound_check(rho, rho, sigma, lam, 0.4);
    EXPECT_NEAR(c.rhs, std::log2(lam), 1e-12);
    EXPECT_TRUE(c.holds);
    for (int i = 0; i < 20; ++i) {
        Rng r = rng.split(100 + i);
        Matrix a = random_state(3, r.split(1)), b = random_state(3, r.split(2));
        double t = 0.05 + 0.3 * r.uniform();
        Matrix bar = (1.0 - t) * a + t * b;
        double l = std::exp2(max_divergence(bar, b)) * (1.0 + 1e-9);
        double eps = std::min(1.0, trace_distance(a, bar) + 0.1 + 0.5 * r.uniform());
        EXPECT_TRUE(dh_upper_bound_check(a, bar, b, l, eps).holds);
    }
    EXPECT_EQ(kind_of([&] { dh_upper_bound_check(rho, rho, sigma, 0.5 * lam, 0.4); }), ErrorKind::PreconditionViolated);
}

TEST(UpperBound, DhBelowSmoothMaxPlusLog) {
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        Rng r = rng.split(i);
        std::vector<double> p(3), q(3);
        double sp = 0, sq = 0;
        for (int k = 0; k < 3; ++k) sp += p[k] = r.uniform() + 0.01, sq += q[k] = r.uniform() + 0.01;
        Matrix rho = Matrix::Zero(3, 3), sigma = Matrix::Zero(3, 3);
        for (int k = 0; k < 3; ++k) p[k] /= sp, q[k] /= sq, rho(k, k) = p[k], sigma(k, k) = q[k];
        double eps = 0.2 + 0.7 * r.uniform(), eps1 = eps * r.uniform() * 0.9;
        double lhs = hypothesis_divergence(rho, sigma, eps).value_bits;
        double rhs = smooth_max_divergence_classical(p, q, eps1) + std::log2(eps / (eps - eps1));
        EXPECT_LE(lhs, rhs + 1e-8);
    }
}

TEST(Aep, EqualStatesAndConvergence) {
    Matrix p = diag({0.5, 0.5}), q = diag({0.75, 0.25});
    for (const AepRow& row : aep_trace(p, p, 0.5, {10, 100})) EXPECT_NEAR(row.value_bits, 0.0, 1e-9);
    double limit = relative_entropy(p, q);
    EXPECT_NEAR(limit, 1.0 - 0.5 * std::log2(3.0), 1e-12);
    auto rows = aep_trace(p, q, 0.5, {100, 1000, 10000});
    EXPECT_LE(std::abs(rows[2].value_bits - limit), 0.02);
    EXPECT_GE(std::abs(rows[0].value_bits - limit), std::abs(rows[1].value_bits - limit));
    EXPECT_GE(std::abs(rows[1].value_bits - limit), std::abs(rows[2].value_bits - limit));
}

TEST(Aep, QuantumPathMatchesDirectComputation) {
    Rng rng(8);
    Matrix rho = random_state(2, rng.split(1)), sigma = random_state(2, rng.split(2));
    double direct = hypothesis_divergence(kron_power(rho, 3), kron_power(sigma, 3), 0.4).value_bits / 3;
    EXPECT_NEAR(aep_value(rho, sigma, 0.4, 3), direct, 1e-12);
    EXPECT_EQ(kind_of([&] { aep_value(rho, sigma, 0.4, 13); }), ErrorKind::TooLarge);
    // commuting type-class path against the explicit tensor power
    Matrix p = diag({0.6, 0.4}), q = diag({0.3, 0.7});
    double explicit_value = hypothesis_divergence(kron_power(p, 6), kron_power(q, 6), 0.3).value_bits / 6;
    EXPECT_NEAR(aep_value(p, q, 0.3, 6), explicit_value, 1e-9);
}

TEST(Aep, MonotoneInEpsilon) {
    Matrix p = diag({0.5, 0.5}), q = diag({0.75, 0.25});
    double prev = kInfinity;
    for (double eps : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        double v = aep_value(p, q, eps, 200);
        EXPECT_LE(v, prev + 1e-12);
        prev = v;
    }
}

TEST(Aep, SmoothMaxIidMatchesExplicitProduct) {
    std::vector<double> p{0.5, 0.5}, q{0.75, 0.25};
    std::vector<double> pn{1.0}, qn{1.0};
    for (int n = 1; n <= 10; ++n) {
        std::vector<double> a, b;
        for (std::size_t i = 0; i < pn.size(); ++i)
            for (std::size_t j = 0; j < p.size(); ++j) {
                a.push_back(pn[i] * p[j]);
                b.push_back(qn[i] * q[j]);
            }
        pn = a;
        qn = b;
        for (double eps : {0.1, 0.5})
            EXPECT_NEAR(smooth_max_iid(p, q, eps, n), smooth_max_divergence_classical(pn, qn, eps) / n, 1e-9) << n;
    }
}

TEST(Aep, SmoothMaxUpperShape) {
    std::vector<double> p{0.5, 0.5}, q{0.75, 0.25};
    const double eps = 0.5, d = 1.0 - 0.5 * std::log2(3.0);
    auto root = [&](int n) { return std::sqrt(std::log2(2.0 / (eps * eps)) / n); };
    double c = std::max(0.0, (smooth_max_iid(p, q, eps, 100) - d) / root(100));
    for (int n : {400, 1600, 6400}) EXPECT_LE(smooth_max_iid(p, q, eps, n), d + c * root(n) + 1e-9) << n;
}
