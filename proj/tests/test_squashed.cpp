#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace mrec;
using namespace mrec::testing;

namespace {

Matrix identity(long long d) { return Matrix::Identity(d, d); }

/// qcq Markov chain A - E - C, reordered to A, C, E.
MultipartiteState markov_ace(std::uint64_t seed) {
    MultipartiteState aec = qcq_markov_reconstruction(random_qcq(2, 2, 2, Rng(seed)));
    Matrix m = permute_systems(aec.matrix, aec.dims, {0, 2, 1});
    return {m, SystemDims({2, 2, 2}, {"A", "C", "E"}), true};
}

QuantumChannel petz_ace(const MultipartiteState& rho) {
    int de = rho.dims.dim(2), dc = rho.dims.dim(1);
    return recovery_channel_ace(rho, {identity(de), identity(dc * de)});
}

} // namespace

TEST(Ladder, MarkovChainIsReproducedExactly) {
    MultipartiteState rho = markov_ace(1);
    EXPECT_NEAR(cmi_ace(rho), 0.0, 1e-9);
    ExtensionLadder ladder = build_extension_ladder(rho, 3, petz_ace(rho));
    ASSERT_EQ(ladder.k(), 3);
    EXPECT_LE(ladder.max_step(), 1e-7);
    for (int i = 1; i <= 3; ++i) EXPECT_LE(max_abs(ladder.slice(i).matrix - rho.matrix), 1e-7);
    SymmetrizedExtension sym = symmetrized_extension(ladder);
    EXPECT_LE(trace_distance(sym.omega_ac.matrix, rho.marginal({"A", "C"}).matrix), 1e-7);
}

TEST(Ladder, StatesAreValidAndGrow) {
    MultipartiteState rho = random_density(SystemDims({2, 2, 2}, {"A", "C", "E"}), Rng(2));
    ExtensionLadder ladder = build_extension_ladder(rho, 3, petz_ace(rho));
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(ladder.states[i].dims.size(), static_cast<std::size_t>(3 + i));
        EXPECT_NO_THROW(ladder.states[i].validate());
        EXPECT_EQ(ladder.states[i].dims.labels().back(), "E");
    }
    EXPECT_NEAR(ladder.delta, std::sqrt(std::log(2.0) * ladder.cmi_bits), 1e-15);
}

TEST(Ladder, OptimizedStepsAndTelescoping) {
    MultipartiteState rho = random_density(SystemDims({2, 2, 2}, {"A", "C", "E"}), Rng(3));
    RecoveryResult opt = optimize_recovery(ace_to_aec(rho), 3, 200, 3);
    ExtensionLadder ladder = build_extension_ladder(rho, 3, recovery_channel_ace(rho, opt.params));
    EXPECT_LE(ladder.max_step(), ladder.delta + 1e-7);
    for (int j = 2; j <= 3; ++j)
        EXPECT_LE(trace_distance(ladder.slice(1).matrix, ladder.slice(j).matrix), (j - 1) * ladder.delta + 1e-6);
}

TEST(Ladder, Errors) {
    MultipartiteState rho = random_density(SystemDims({2, 2, 2}, {"A", "C", "E"}), Rng(4));
    try {
        build_extension_ladder(rho, 2, identity_channel(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimMismatch);
    }
    try {
        build_extension_ladder(rho, 12, petz_ace(rho));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
    }
}

TEST(Symmetrization, SingleCopyIsIdentity) {
    MultipartiteState rho = random_density(SystemDims({2, 2, 2}, {"A", "C", "E"}), Rng(5));
    SymmetrizedExtension sym = symmetrized_extension(build_extension_ladder(rho, 1, petz_ace(rho)));
    EXPECT_LE(max_abs(sym.omega_ac.matrix - rho.marginal({"A", "C"}).matrix), 1e-14);
}

TEST(Symmetrization, ExtensionIsExchangeable) {
    MultipartiteState rho = random_density(SystemDims({2, 2, 2}, {"A", "C", "E"}), Rng(6));
    SymmetrizedExtension sym = symmetrized_extension(build_extension_ladder(rho, 3, petz_ace(rho)));
    auto margs = extension_marginals(sym.omega_bar);
    ASSERT_EQ(margs.size(), 3u);
    for (const auto& m : margs) EXPECT_LE(max_abs(m - margs[0]), 1e-12);
    EXPECT_NO_THROW(sym.omega_bar.validate());
}

TEST(Trial, RandomStatesSatisfyBound) {
    for (std::uint64_t seed : {10u, 11u}) {
        for (int k : {2, 3}) {
            SquashedRow row = squashed_trial(seed, k, 2, 120);
            EXPECT_TRUE(row.extendible);
            EXPECT_LE(row.final_distance, row.bound + 1e-6) << seed << " " << k;
            EXPECT_TRUE(row.holds);
        }
    }
}

TEST(SquashedUpperBound, SeparableClassicalExtension) {
    Rng rng(7);
    Matrix a0 = random_state(2, rng.split(1)), a1 = random_state(2, rng.split(2));
    Matrix c0 = random_state(2, rng.split(3)), c1 = random_state(2, rng.split(4));
    Matrix ace = 0.3 * kron(kron(a0, c0), ket_bra(2, 0, 0)) + 0.7 * kron(kron(a1, c1), ket_bra(2, 1, 1));
    MultipartiteState ext(ace, SystemDims({2, 2, 2}, {"A", "C", "E"}));
    MultipartiteState ac = ext.marginal({"A", "C"});
    EXPECT_GT(mutual_information(ac.matrix, ac.dims), 1e-3);
    EXPECT_NEAR(squashed_upper_bound(ac, {ext}), 0.0, 1e-9);
}

TEST(SquashedUpperBound, ProductAndSinglet) {
    Rng rng(8);
    MultipartiteState prod(kron(random_state(2, rng.split(1)), random_state(2, rng.split(2))), SystemDims({2, 2}, {"A", "C"}));
    EXPECT_NEAR(squashed_upper_bound(prod, {}), 0.0, 1e-9);
    MultipartiteState singlet = canonical_state("singlet");
    singlet.dims = SystemDims({2, 2}, {"A", "C"});
    EXPECT_NEAR(squashed_upper_bound(singlet, {}), 1.0, 1e-9);
    MultipartiteState bad(kron(Matrix(identity(4) / 4.0), Matrix(identity(2) / 2.0)), SystemDims({2, 2, 2}, {"A", "C", "E"}));
    try {
        squashed_upper_bound(singlet, {bad});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MarginalMismatch);
    }
}

TEST(Bounds, Arithmetic) {
    const double ln2 = std::log(2.0);
    EXPECT_NEAR(extendibility_distance_bound(0.5, 3), 2.0 * std::sqrt(ln2 / 4.0), 1e-12);
    EXPECT_EQ(extendibility_distance_bound(0.7, 1), 0.0);
    SeparabilityBound b = separability_distance_bound(0.01, 2);
    EXPECT_NEAR(b.closed_form, 4.0 * std::pow(0.02 * ln2, 0.25), 1e-12);
    EXPECT_NEAR(b.closed_form, 1.3725, 1e-4);
    EXPECT_TRUE(b.capped);
    EXPECT_EQ(b.reported, 1.0);
    EXPECT_EQ(b.k_used, static_cast<long long>(std::ceil(2.0 * std::pow(8.0 / (0.01 * ln2), 0.25))));
    EXPECT_LE(b.combined, b.closed_form + 1e-12);
    EXPECT_TRUE(separability_distance_bound(0.0, 2).exact_separable);
}

TEST(Antisymmetric, OverlapAndLowerBound) {
    AntisymmetricReport r = antisymmetric_check(2, 1000, 9);
    EXPECT_LE(r.max_overlap, 0.5 + 1e-9);
    EXPECT_NEAR(r.mixed_overlap, 0.25, 1e-12);
    EXPECT_GE(r.lower_bound, 0.25 - 1e-9);
    Matrix pas = antisymmetric_projector(2);
    EXPECT_LE(max_abs(pas * pas - pas), 1e-15);
    EXPECT_NEAR(real_trace(pas), 1.0, 1e-15);
}
