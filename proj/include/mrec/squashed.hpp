#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mrec/definetti.hpp"
#include "mrec/entropies.hpp"
#include "mrec/linalg.hpp"
#include "mrec/recovery.hpp"
#include "mrec/rng.hpp"
#include "mrec/states.hpp"

namespace mrec {

inline std::string c_label(int i) { return "C" + std::to_string(i); }

/// δ = sqrt(ln 2 · I(A:C|E)), clamped at zero for tiny negative CMI.
inline double reconstruction_delta(double cmi_bits) { return std::sqrt(std::log(2.0) * std::max(cmi_bits, 0.0)); }

/// I(A:C|E) for a state ordered A, C, E.
inline double cmi_ace(const MultipartiteState& rho_ace) {
    if (rho_ace.dims.size() != 3) fail(ErrorKind::DimMismatch, "expected subsystems A, C, E");
    const auto& l = rho_ace.dims.labels();
    return cmi(rho_ace.matrix, rho_ace.dims, {l[0]}, {l[2]}, {l[1]}).cmi;
}

/// Reorders a state on A, C, E into A, E, C, the B-in-the-middle layout the
/// recovery module expects.
inline MultipartiteState ace_to_aec(const MultipartiteState& rho_ace) {
    if (rho_ace.dims.size() != 3) fail(ErrorKind::DimMismatch, "expected subsystems A, C, E");
    return {permute_systems(rho_ace.matrix, rho_ace.dims, {0, 2, 1}), rho_ace.dims.permuted({0, 2, 1}),
            rho_ace.normalized};
}

/// Turns a channel E -> (E, C) into E -> (C, E) with output labels "C", "E".
inline QuantumChannel output_c_first(const QuantumChannel& ch) {
    if (ch.out.size() != 2) fail(ErrorKind::DimMismatch, "output_c_first: expected two output factors");
    QuantumChannel r{{}, ch.dim_in, SystemDims({ch.out.dim(1), ch.out.dim(0)}, {"C", "E"}), ch.trace_preserving};
    auto map = permutation_index_map(ch.out, {1, 0});
    for (const Matrix& k : ch.kraus) {
        Matrix p(k.rows(), k.cols());
        for (Eigen::Index i = 0; i < k.rows(); ++i) p.row(i) = k.row(map[i]);
        r.kraus.push_back(p);
    }
    return r;
}

/// Rotated Petz channel E -> C E for rho_ACE with the given parameters
/// (U on E, V on E C).
inline QuantumChannel recovery_channel_ace(const MultipartiteState& rho_ace, const RotatedPetzParams& p) {
    return output_c_first(rotated_petz_for(ace_to_aec(rho_ace), p));
}

struct ExtensionLadder {
    std::vector<MultipartiteState> states;  // ρ^i on A, C1..Ci, E
    QuantumChannel recovery;
    std::vector<double> step_distances;     // Δ(ρ^i_{AC_iE}, ρ^{i+1}_{AC_{i+1}E})
    double cmi_bits = 0.0;
    double delta = 0.0;

    int k() const { return static_cast<int>(states.size()); }

    double max_step() const {
        double m = 0.0;
        for (double s : step_distances) m = std::max(m, s);
        return m;
    }

    /// ρ^i_{A C_i E} relabelled to A, C, E.
    MultipartiteState slice(int i) const {
        const auto& s = states.at(i - 1);
        const auto& l = s.dims.labels();
        MultipartiteState m = s.marginal({l.front(), c_label(i), l.back()});
        m.dims = SystemDims(m.dims.dims(), {l.front(), "C", l.back()});
        return m;
    }
};

/// ρ^1 = ρ_ACE, ρ^{i+1} = (I ⊗ T_{E -> C_{i+1} E})(ρ^i).
inline ExtensionLadder build_extension_ladder(const MultipartiteState& rho_ace, int k, const QuantumChannel& recovery) {
    if (rho_ace.dims.size() != 3) fail(ErrorKind::DimMismatch, "build_extension_ladder: expected A, C, E");
    if (k < 1) fail(ErrorKind::OutOfRange, "build_extension_ladder: k must be positive");
    const int da = rho_ace.dims.dim(0), dc = rho_ace.dims.dim(1), de = rho_ace.dims.dim(2);
    if (recovery.dim_in != de || recovery.out.size() != 2 || recovery.out.dim(0) != dc || recovery.out.dim(1) != de)
        fail(ErrorKind::DimMismatch, "build_extension_ladder: recovery must map E to C ⊗ E");
    if (static_cast<double>(da) * std::pow(dc, k) * de > kMaxDenseDim)
        fail(ErrorKind::TooLarge, "build_extension_ladder: dim A · dim C^k · dim E exceeds 4096");
    ExtensionLadder ladder;
    ladder.recovery = recovery;
    ladder.cmi_bits = cmi_ace(rho_ace);
    ladder.delta = reconstruction_delta(ladder.cmi_bits);
    const std::string a = rho_ace.dims.label(0), e = rho_ace.dims.label(2);
    MultipartiteState first(rho_ace.matrix, SystemDims({da, dc, de}, {a, c_label(1), e}), rho_ace.normalized);
    ladder.states.push_back(first);
    QuantumChannel ch = recovery;
    for (int i = 1; i < k; ++i) {
        ch.out = SystemDims({dc, de}, {c_label(i + 1), e});
        ladder.states.push_back(apply_channel(ch, ladder.states.back(), e));
        ladder.step_distances.push_back(trace_distance(ladder.slice(i).matrix, ladder.slice(i + 1).matrix));
    }
    return ladder;
}

struct SymmetrizedExtension {
    MultipartiteState omega_ac;      // ω̄_{AC_1}, labels A, C
    MultipartiteState omega_bar;     // on A, C1..Ck
};

/// ω̄ = (1/k!) Σ_π ρ^k_{A C_π(1) ... C_π(k)}.
inline SymmetrizedExtension symmetrized_extension(const ExtensionLadder& ladder) {
    if (ladder.states.empty()) fail(ErrorKind::OutOfRange, "symmetrized_extension: empty ladder");
    const int k = ladder.k();
    const MultipartiteState& top = ladder.states.back();
    std::vector<std::string> keep(top.dims.labels().begin(), top.dims.labels().end() - 1);
    MultipartiteState ac = top.marginal(keep);
    Matrix acc = Matrix::Zero(ac.dim(), ac.dim());
    auto perms = all_permutations(k);
    for (const auto& p : perms) {
        std::vector<int> sys{0};
        for (int j = 0; j < k; ++j) sys.push_back(1 + p(j));
        acc += permute_systems(ac.matrix, ac.dims, sys);
    }
    SymmetrizedExtension out;
    out.omega_bar = {hermitian_part(acc / static_cast<double>(perms.size())), ac.dims, ac.normalized};
    MultipartiteState first = out.omega_bar.marginal({keep[0], c_label(1)});
    first.dims = SystemDims(first.dims.dims(), {keep[0], "C"});
    out.omega_ac = first;
    return out;
}

/// ω̄_{A C_i} for i = 1..k, each relabelled A, C.
inline std::vector<Matrix> extension_marginals(const MultipartiteState& omega_bar) {
    std::vector<Matrix> out;
    const auto& l = omega_bar.dims.labels();
    for (std::size_t i = 1; i < l.size(); ++i) out.push_back(partial_trace(omega_bar.matrix, omega_bar.dims, {l[0], l[i]}));
    return out;
}

/// min over the supplied extensions (each ordered A, C, E) and the trivial one
/// of I(A:C|E)/2.
inline double squashed_upper_bound(const MultipartiteState& rho_ac, const std::vector<MultipartiteState>& extensions) {
    if (rho_ac.dims.size() != 2) fail(ErrorKind::DimMismatch, "squashed_upper_bound: expected A, C");
    double best = 0.5 * mutual_information(rho_ac.matrix, rho_ac.dims);
    for (const auto& ext : extensions) {
        if (ext.dims.size() != 3) fail(ErrorKind::DimMismatch, "squashed_upper_bound: extension must be A, C, E");
        const auto& l = ext.dims.labels();
        Matrix m = partial_trace(ext.matrix, ext.dims, {l[0], l[1]});
        if (m.rows() != rho_ac.dim() || max_abs(m - rho_ac.matrix) > 1e-7)
            fail(ErrorKind::MarginalMismatch, "squashed_upper_bound: extension does not reduce to rho_AC");
        best = std::min(best, 0.5 * cmi_ace(ext));
    }
    return best;
}

/// (k-1) sqrt(ln 2 / 2 · E_sq).
inline double extendibility_distance_bound(double esq, int k) {
    if (esq < 0.0 || k < 1) fail(ErrorKind::OutOfRange, "extendibility_distance_bound: need E_sq >= 0, k >= 1");
    return (k - 1) * std::sqrt(std::log(2.0) / 2.0 * esq);
}

struct SeparabilityBound {
    double closed_form = 0.0;  // 2 dim C (2 ln 2 E_sq)^{1/4}
    double combined = 0.0;     // (k-1) sqrt(ln2/2 E_sq) + 2 dimC^2 / k at the chosen k
    long long k_used = 0;      // 0 when E_sq = 0
    bool exact_separable = false;
    double reported = 0.0;     // closed_form capped at 1
    bool capped = false;
};

inline SeparabilityBound separability_distance_bound(double esq, int dim_c) {
    if (esq < 0.0 || dim_c < 1) fail(ErrorKind::OutOfRange, "separability_distance_bound: need E_sq >= 0, dim C >= 1");
    SeparabilityBound b;
    if (esq == 0.0) {
        b.exact_separable = true;
        return b;
    }
    const double ln2 = std::log(2.0);
    b.closed_form = 2.0 * dim_c * std::pow(2.0 * ln2 * esq, 0.25);
    b.k_used = static_cast<long long>(std::ceil(std::pow(8.0 / (ln2 * esq), 0.25) * dim_c));
    b.combined = (b.k_used - 1) * std::sqrt(ln2 / 2.0 * esq) + 2.0 * dim_c * dim_c / static_cast<double>(b.k_used);
    b.capped = b.closed_form > 1.0;
    b.reported = std::min(b.closed_form, 1.0);
    return b;
}

struct AntisymmetricReport {
    int d = 2;
    int trials = 0;
    double max_overlap = 0.0;     // max tr((σ_A ⊗ σ_C) Π_as)
    double lower_bound = 0.0;     // ½(1 - max_overlap)
    double mixed_overlap = 0.0;   // value at σ_A = σ_C = I/d
};

/// Samples product states (pure on even trials, full-rank mixed on odd) and
/// records their overlap with the antisymmetric projector.
inline AntisymmetricReport antisymmetric_check(int d, int trials, std::uint64_t seed) {
    if (d < 2) fail(ErrorKind::OutOfRange, "antisymmetric_check: d must be at least 2");
    if (static_cast<long long>(d) * d * d * d > kMaxDenseDim) fail(ErrorKind::TooLarge, "antisymmetric_check: d^4 exceeds 4096");
    Matrix pas = antisymmetric_projector(d);
    AntisymmetricReport r;
    r.d = d;
    r.trials = trials;
    Matrix mm = Matrix::Identity(d, d) / static_cast<double>(d);
    r.mixed_overlap = real_trace(kron(mm, mm) * pas);
    Rng root(seed);
    for (int t = 0; t < trials; ++t) {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        Matrix sa, sc;
        if (t % 2 == 0) {
            sa = outer(haar_vector(d, rng));
            sc = outer(haar_vector(d, rng));
        } else {
            sa = random_density(d, d, rng.split(1), SystemDims({d})).matrix;
            sc = random_density(d, d, rng.split(2), SystemDims({d})).matrix;
        }
        r.max_overlap = std::max(r.max_overlap, real_trace(kron(sa, sc) * pas));
    }
    r.lower_bound = 0.5 * (1.0 - r.max_overlap);
    return r;
}

struct SquashedRow {
    std::uint64_t seed = 0;
    int k = 0;
    double cmi_bits = 0.0;
    double delta = 0.0;
    double ladder_max_step = 0.0;
    double final_distance = 0.0;
    double bound = 0.0;
    bool holds = false;
    bool extendible = false;   // max deviation between ω̄_{AC_i} below 1e-10
};

/// One trial: random 2×2×2 ρ_ACE from seed, optimized recovery, ladder, and
/// symmetrized extension. bound = (k-1)/2 · δ.
inline SquashedRow squashed_trial(std::uint64_t seed, int k, int restarts, int iterations, int dim = 2) {
    Rng rng(seed);
    SystemDims dims({dim, dim, dim}, {"A", "C", "E"});
    MultipartiteState rho = random_density(dims, rng.split(0));
    QuantumChannel ch;
    if (restarts > 0) {
        RecoveryResult opt = optimize_recovery(ace_to_aec(rho), restarts, iterations, seed);
        ch = recovery_channel_ace(rho, opt.params);
    } else {
        ch = recovery_channel_ace(rho, {Matrix::Identity(dim, dim), Matrix::Identity(dim * dim, dim * dim)});
    }
    ExtensionLadder ladder = build_extension_ladder(rho, k, ch);
    SymmetrizedExtension sym = symmetrized_extension(ladder);
    SquashedRow row;
    row.seed = seed;
    row.k = k;
    row.cmi_bits = ladder.cmi_bits;
    row.delta = ladder.delta;
    row.ladder_max_step = ladder.max_step();
    row.final_distance = trace_distance(rho.marginal({"A", "C"}).matrix, sym.omega_ac.matrix);
    row.bound = 0.5 * (k - 1) * ladder.delta;
    auto margs = extension_marginals(sym.omega_bar);
    double dev = 0.0;
    for (const auto& m : margs) dev = std::max(dev, max_abs(m - margs.front()));
    row.extendible = dev <= 1e-10;
    row.holds = row.final_distance <= row.bound + 1e-6 && row.ladder_max_step <= row.delta + 1e-7 && row.extendible;
    return row;
}

} // namespace mrec
