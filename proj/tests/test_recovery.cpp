#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace mrec;
using namespace mrec::testing;

namespace {

Matrix eye(long long d) { return Matrix::Identity(d, d); }

MultipartiteState markov_state(std::uint64_t seed) {
    return qcq_markov_reconstruction(random_qcq(2, 2, 2, Rng(seed)));
}

} // namespace

TEST(ApplyChannel, IdentityAndDepolarizing) {
    Rng rng(1);
    MultipartiteState ab = random_density(SystemDims({2, 3}), rng);
    MultipartiteState same = apply_channel(identity_channel(3, "B"), ab, "B");
    EXPECT_LE(max_abs(same.matrix - ab.matrix), 1e-14);
    MultipartiteState dep = apply_channel(depolarizing_channel(3, "B"), ab, "B");
    EXPECT_LE(max_abs(dep.matrix - kron(partial_trace(ab.matrix, ab.dims, {"A"}), eye(3) / 3.0)), 1e-14);
}

TEST(ApplyChannel, RandomChannelGivesState) {
    Rng rng(2);
    MultipartiteState ab = random_density(SystemDims({2, 2}), rng.split(1));
    QuantumChannel ch = random_channel(2, SystemDims({3, 2}, {"X", "Y"}), 4, rng.split(2));
    EXPECT_NO_THROW(ch.validate());
    MultipartiteState out = apply_channel(ch, ab, "B");
    EXPECT_EQ(out.dims.labels(), (std::vector<std::string>{"A", "X", "Y"}));
    EXPECT_NEAR(real_trace(out.matrix), 1.0, 1e-9);
    EXPECT_GE(min_eigenvalue(out.matrix), -1e-12);
}

TEST(ApplyChannel, DimMismatch) {
    MultipartiteState ab = random_density(SystemDims({2, 3}), Rng(3));
    try {
        apply_channel(identity_channel(2), ab, "B");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimMismatch);
    }
}

TEST(Petz, ProductCaseAppendsRhoC) {
    Rng rng(4);
    Matrix rb = random_state(2, rng.split(1)), rc = random_state(3, rng.split(2));
    QuantumChannel p = petz_map(kron(rb, rc), SystemDims({2, 3}));
    for (int i = 0; i < 5; ++i) {
        Matrix x = rng.split(10 + i).ginibre(2, 2);
        EXPECT_LE(max_abs(p(x) - kron(x, rc)), 1e-10);
    }
}

TEST(Petz, ReconstructsQcqMarkovChain) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        MultipartiteState sigma = markov_state(s);
        EXPECT_NEAR(recovery_fidelity(sigma, rotated_petz_for(sigma, {eye(2), eye(4)})), 1.0, 1e-8);
    }
}

TEST(Petz, OutputIsStateAndTracePreserving) {
    Rng rng(5);
    MultipartiteState rho = random_tripartite(2, 2, 2, rng);
    QuantumChannel p = rotated_petz_for(rho, {eye(2), eye(4)});
    EXPECT_NO_THROW(p.validate(1e-7));
    MultipartiteState s = recovered_state(rho, p);
    EXPECT_NO_THROW(s.validate());
    double f = recovery_fidelity(rho, p);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-12);
}

TEST(Petz, RankDeficientMarginalStillTracePreserving) {
    Rng rng(6);
    MultipartiteState rho = random_tripartite(2, 3, 2, rng, 2);
    Matrix rho_bc = partial_trace(rho.matrix, rho.dims, {"B", "C"});
    SystemDims bc({3, 2}, {"B", "C"});
    QuantumChannel p = petz_map(rho_bc, bc);
    EXPECT_NO_THROW(p.validate(1e-7));
}

TEST(Petz, FixedPointMarginal) {
    Rng rng(7);
    for (int i = 0; i < 10; ++i) {
        MultipartiteState rho = random_tripartite(2, 2, 2, rng.split(i), 1 + i % 8);
        Matrix rho_bc = partial_trace(rho.matrix, rho.dims, {"B", "C"});
        SystemDims bc({2, 2}, {"B", "C"});
        Matrix rho_b = partial_trace(rho_bc, bc, {"B"});
        Matrix sigma_bc = petz_map(rho_bc, bc)(rho_b);
        Matrix sigma_b = partial_trace(sigma_bc, bc, {"B"});
        EXPECT_GE(min_eigenvalue(hermitian_part(rho_b - sigma_b)), -1e-8);
    }
}

TEST(RotatedPetz, IdentityParamsEqualPetz) {
    Rng rng(8);
    MultipartiteState rho = random_tripartite(2, 2, 2, rng);
    Matrix rho_bc = partial_trace(rho.matrix, rho.dims, {"B", "C"});
    SystemDims bc({2, 2}, {"B", "C"});
    EXPECT_LE(max_abs(choi(rotated_petz_map(rho_bc, bc, eye(2), eye(4))) - choi(petz_map(rho_bc, bc))), 1e-9);
}

TEST(RotatedPetz, TracePreservingForRandomUnitaries) {
    Rng rng(9);
    for (int i = 0; i < 10; ++i) {
        Rng r = rng.split(i);
        MultipartiteState rho = random_tripartite(2, 2, 2, r.split(1), 1 + i % 8);
        Matrix u = haar_unitary(2, r), v = haar_unitary(4, r);
        QuantumChannel ch = rotated_petz_for(rho, {u, v});
        EXPECT_LE(max_abs(ch.kraus_sum() - eye(2)), 1e-7);
    }
}

TEST(RotatedPetz, CommutingVLeavesRecoveredMarginalFixed) {
    Rng rng(10);
    MultipartiteState rho = random_tripartite(2, 2, 2, rng);
    Matrix rho_bc = partial_trace(rho.matrix, rho.dims, {"B", "C"});
    SystemDims bc({2, 2}, {"B", "C"});
    Matrix rho_b = partial_trace(rho_bc, bc, {"B"});
    Matrix v = exp_i_hermitian(rho_bc * 3.7 + rho_bc * rho_bc);
    Matrix out = rotated_petz_map(rho_bc, bc, eye(2), v)(rho_b);
    EXPECT_LE(max_abs(out - rho_bc), 1e-10);
}

TEST(RotatedPetz, Errors) {
    Rng rng(11);
    MultipartiteState rho = random_tripartite(2, 2, 2, rng);
    Matrix rho_bc = partial_trace(rho.matrix, rho.dims, {"B", "C"});
    SystemDims bc({2, 2}, {"B", "C"});
    try {
        rotated_petz_map(rho_bc, bc, 2.0 * eye(2), eye(4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonUnitaryParams);
    }
    try {
        rotated_petz_map(diag({1.0, 0.5, 0.2, -0.7}), bc, eye(2), eye(4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidState);
    }
}

TEST(RecoveryFidelity, ProductIsOne) {
    Rng rng(12);
    Matrix a = random_state(2, rng.split(1)), b = random_state(2, rng.split(2)), c = random_state(2, rng.split(3));
    MultipartiteState rho(kron(kron(a, b), c), SystemDims({2, 2, 2}));
    EXPECT_NEAR(recovery_fidelity(rho, rotated_petz_for(rho, {eye(2), eye(4)})), 1.0, 1e-8);
}

TEST(Optimizer, GhzReachesTarget) {
    RecoveryResult r = optimize_recovery(canonical_state("ghz"), 3, 200, 1);
    EXPECT_GE(r.achieved_fidelity, std::pow(2.0, -0.5) - 1e-6);
    EXPECT_NEAR(r.certificate.cmi_bits, 1.0, 1e-9);
}

TEST(Optimizer, MarkovInputIsRecoveredExactly) {
    RecoveryResult r = optimize_recovery(markov_state(3), 2, 50, 3);
    EXPECT_GE(r.achieved_fidelity, 1.0 - 1e-7);
    EXPECT_GE(r.certificate.slack, -1e-7);
}

TEST(Optimizer, RandomStatesMeetBoundAndCertificate) {
    Rng rng(13);
    for (int i = 0; i < 4; ++i) {
        MultipartiteState rho = random_tripartite(2, 2, 2, rng.split(i));
        RecoveryResult r = optimize_recovery(rho, 2, 150, 50 + i);
        EXPECT_GE(r.certificate.slack, -1e-6);
        EXPECT_GE(r.achieved_fidelity, r.petz_fidelity - 1e-12);
        // the parameters reproduce the reported fidelity
        EXPECT_NEAR(recovery_fidelity(rho, rotated_petz_for(rho, r.params)), r.achieved_fidelity, 1e-9);
        auto j = r.certificate.to_json();
        for (const char* key : {"cmi_bits", "target_fidelity", "achieved_fidelity", "slack", "restarts", "seed"})
            EXPECT_TRUE(j.contains(key)) << key;
        MultipartiteState sigma = recovered_state(rho, rotated_petz_for(rho, r.params));
        double delta = trace_distance(rho.matrix, sigma.matrix);
        double i_abc = r.certificate.cmi_bits;
        EXPECT_LE(delta * delta / std::log(2.0), i_abc + 1e-6);
        // I(A:C|B)_ρ ≤ H(A|BC)_σ - H(A|BC)_ρ
        double gap = conditional_entropy(sigma.matrix, sigma.dims, {"A"}, {"B", "C"}) -
                     conditional_entropy(rho.matrix, rho.dims, {"A"}, {"B", "C"});
        EXPECT_LE(i_abc, gap + 1e-6);
    }
}

TEST(Optimizer, DeterministicPerSeed) {
    MultipartiteState rho = random_tripartite(2, 2, 2, Rng(14));
    RecoveryResult a = optimize_recovery(rho, 2, 40, 9), b = optimize_recovery(rho, 2, 40, 9);
    EXPECT_EQ(a.achieved_fidelity, b.achieved_fidelity);
}

TEST(Optimizer, BudgetZero) {
    try {
        optimize_recovery(canonical_state("ghz"), 0, 10, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BudgetZero);
    }
}

TEST(Choi, IdentityIsMaximallyEntangled) {
    Matrix j = choi(identity_channel(2));
    Vector phi = Vector::Zero(4);
    phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
    EXPECT_LE(max_abs(j - outer(phi)), 1e-15);
}

TEST(Choi, RoundTripAndReducedState) {
    Rng rng(15);
    QuantumChannel ch = random_channel(2, SystemDims({3}), 3, rng);
    Matrix j = choi(ch);
    QuantumChannel back = channel_from_choi(j, 2, SystemDims({3}));
    EXPECT_LE(max_abs(choi(back) - j), 1e-9);
    EXPECT_LE(max_abs(partial_trace(j, SystemDims({2, 3}), {"A"}) - eye(2) / 2.0), 1e-12);
}

TEST(Choi, NotCP) {
    try {
        channel_from_choi(diag({0.6, -0.1, 0.3, 0.2}), 2, SystemDims({2}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotCP);
    }
}
