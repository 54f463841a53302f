#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace mrec;
using namespace mrec::testing;

namespace {

/// Σ_k C(n,k) p^k (1-p)^{n-k} over k whose eigenvalue p^k (1-p)^{n-k} is δ-typical.
double binary_typical_oracle(double p, int n, double delta) {
    double h = shannon({p, 1.0 - p});
    double mass = 0.0;
    for (int k = 0; k <= n; ++k) {
        double log_ev = k * std::log2(p) + (n - k) * std::log2(1.0 - p);
        if (log_ev < -n * (h + delta) - 1e-9 || log_ev > -n * (h - delta) + 1e-9) continue;
        double log_c = (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) / std::log(2.0);
        mass += std::exp2(log_c + log_ev);
    }
    return mass;
}

} // namespace

TEST(Types, MaximallyMixedHasSingleClass) {
    auto types = spectrum_types(Matrix::Identity(2, 2) / 2.0, 5);
    ASSERT_EQ(types.size(), 1u);
    EXPECT_NEAR(types[0].mass(), 1.0, 1e-12);
}

TEST(Types, BinaryExpansion) {
    auto types = spectrum_types(diag({0.9, 0.1}), 2);
    ASSERT_EQ(types.size(), 3u);
    std::vector<double> masses;
    for (const auto& t : types) masses.push_back(t.mass());
    std::sort(masses.begin(), masses.end(), std::greater<>());
    EXPECT_NEAR(masses[0], 0.81, 1e-12);
    EXPECT_NEAR(masses[1], 0.18, 1e-12);
    EXPECT_NEAR(masses[2], 0.01, 1e-12);
}

TEST(Types, CountBound) {
    Matrix rho = diag({0.5, 0.3, 0.2});
    EXPECT_EQ(spectrum_types(rho, 6).size(), 28u);
    EXPECT_LE(distinct_eigenvalue_count(rho, 6), 343u);
    EXPECT_DOUBLE_EQ(type_count(3, 6), 28.0);
}

TEST(Types, MassNormalizationAndSizeBound) {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        int d = 2 + i % 3, n = 1 + 3 * i;
        double scale = 0.5 + rng.uniform();
        Matrix rho = scale * random_state(d, rng.split(i), 1 + i % d);
        double total = 0.0;
        for (const auto& t : spectrum_types(rho, n)) total += t.mass();
        EXPECT_NEAR(total, std::pow(real_trace(rho), n), 1e-9 * std::pow(real_trace(rho), n));
        int rank = group_spectrum(rho).rank();
        EXPECT_LE(static_cast<double>(distinct_eigenvalue_count(rho, n)), std::pow(n + 1.0, rank));
    }
}

TEST(Types, TooManyTypes) {
    Matrix rho = Matrix::Zero(12, 12);
    for (int i = 0; i < 12; ++i) rho(i, i) = (i + 1) / 78.0;
    try {
        spectrum_types(rho, 200);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TooManyTypes);
    }
}

TEST(TypicalMass, MaximallyMixedIsOne) {
    for (int n : {1, 7, 50}) EXPECT_NEAR(typical_mass(Matrix::Identity(3, 3) / 3.0, n, 0.01), 1.0, 1e-9);
}

TEST(TypicalMass, MatchesBinomialOracleAndGrows) {
    Matrix rho = diag({0.9, 0.1});
    double prev = 0.0;
    for (int n : {10, 100, 400}) {
        double m = typical_mass(rho, n, 0.1);
        EXPECT_NEAR(m, binary_typical_oracle(0.9, n, 0.1), 1e-9);
        EXPECT_GT(m, prev);
        prev = m;
    }
    EXPECT_GT(prev, 0.9);
}

TEST(TypicalMass, ComplementDecaysExponentially) {
    auto rows = typical_table(diag({0.9, 0.1}), {50, 100, 200, 400}, 0.1);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].complement_log2, rows[i - 1].complement_log2);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) EXPECT_LT(rows[i].complement_log2 / rows[i].n, -0.005);
    EXPECT_GT(fit_decay_rate(rows), 0.0);
}

TEST(TypicalMass, NonDecreasingInDelta) {
    Matrix rho = diag({0.6, 0.3, 0.1});
    double prev = 0.0;
    for (double delta : {0.02, 0.05, 0.1, 0.3}) {
        double m = typical_mass(rho, 60, delta);
        EXPECT_GE(m, prev - 1e-12);
        prev = m;
    }
}

TEST(PairMasses, ProductConsistency) {
    Rng rng(2);
    Matrix rb = random_state(2, rng.split(1)), rc = random_state(2, rng.split(2));
    SystemDims dims({2, 2}, {"B", "C"});
    ProjectorPairMasses m = projector_pair_masses(rb, kron(rb, rc), dims, 30, 0.2, 0.2);
    EXPECT_NEAR(m.mass_b, typical_mass(rb, 30, 0.2), 1e-12);
    EXPECT_NEAR(m.mass_bc, typical_mass(kron(rb, rc), 30, 0.2), 1e-12);
}

TEST(PairMasses, SmallestNForRandomPair) {
    Rng rng(3);
    MultipartiteState bc = random_density(SystemDims({2, 2}, {"B", "C"}), rng);
    Matrix rb = partial_trace(bc.matrix, bc.dims, {"B"});
    PairThreshold t = smallest_typical_n(rb, bc.matrix, bc.dims, 0.2, 0.2, 0.1);
    ASSERT_TRUE(t.found);
    EXPECT_GE(t.masses.mass_b, 0.9);
    EXPECT_GE(t.masses.mass_bc, 0.9);
}

TEST(PairMasses, MarginalMismatch) {
    SystemDims dims({2, 2}, {"B", "C"});
    try {
        projector_pair_masses(diag({0.9, 0.1}), Matrix::Identity(4, 4) / 4.0, dims, 5, 0.1, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MarginalMismatch);
    }
}
