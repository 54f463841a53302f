#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mrec/linalg.hpp"
#include "mrec/rng.hpp"
#include "mrec/states.hpp"

namespace mrec {

inline constexpr long long kMaxDenseDim = 4096;

/// Permutation π of {0..n-1}; P_π moves the content of tensor slot j to slot π(j),
/// so that P_σ P_π = P_{σ∘π}.
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<int> image) : image_(std::move(image)) {
        std::vector<int> seen(image_.size(), 0);
        for (int v : image_)
            if (v < 0 || v >= static_cast<int>(image_.size()) || seen[v]++)
                fail(ErrorKind::DimMismatch, "Permutation: not a permutation");
    }

    static Permutation identity(int n) {
        std::vector<int> v(n);
        std::iota(v.begin(), v.end(), 0);
        return Permutation(v);
    }

    int size() const { return static_cast<int>(image_.size()); }
    int operator()(int j) const { return image_[j]; }
    const std::vector<int>& image() const { return image_; }

    /// (this ∘ other)(j) = this(other(j)).
    Permutation compose(const Permutation& other) const {
        std::vector<int> v(image_.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = image_[other.image_[j]];
        return Permutation(v);
    }

    Permutation inverse() const {
        std::vector<int> v(image_.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[image_[j]] = static_cast<int>(j);
        return Permutation(v);
    }

    int cycles() const {
        std::vector<bool> seen(image_.size(), false);
        int c = 0;
        for (std::size_t j = 0; j < image_.size(); ++j) {
            if (seen[j]) continue;
            ++c;
            for (std::size_t k = j; !seen[k]; k = image_[k]) seen[k] = true;
        }
        return c;
    }

    bool operator==(const Permutation& o) const { return image_ == o.image_; }

    /// Basis index of P_π |x_0 ... x_{n-1}> on (C^d)^{⊗n}.
    long long apply_index(long long x, int d) const {
        const int n = size();
        std::vector<int> digits(n);
        for (int j = n - 1; j >= 0; --j) {
            digits[j] = static_cast<int>(x % d);
            x /= d;
        }
        std::vector<int> out(n);
        for (int j = 0; j < n; ++j) out[image_[j]] = digits[j];
        long long y = 0;
        for (int j = 0; j < n; ++j) y = y * d + out[j];
        return y;
    }

    /// Index map x -> P_π x over all basis states.
    std::vector<long long> index_map(int d) const {
        long long total = 1;
        for (int j = 0; j < size(); ++j) total *= d;
        std::vector<long long> m(total);
        for (long long x = 0; x < total; ++x) m[x] = apply_index(x, d);
        return m;
    }

    Matrix matrix(int d) const {
        auto m = index_map(d);
        const long long total = static_cast<long long>(m.size());
        if (total > kMaxDenseDim) fail(ErrorKind::TooLarge, "Permutation::matrix: d^n exceeds 4096");
        Matrix p = Matrix::Zero(total, total);
        for (long long x = 0; x < total; ++x) p(m[x], x) = 1.0;
        return p;
    }

private:
    std::vector<int> image_;
};

/// All permutations of n elements, identity first.
inline std::vector<Permutation> all_permutations(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    std::vector<Permutation> out;
    do {
        out.emplace_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

inline long long int_pow(long long base, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline long long binomial(long long n, long long k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long r = 1;
    for (long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Gram matrix d^{#cycles(σ^{-1}π)} of the permutation operators and its
/// (pseudo-)inverse, the Weingarten matrix.
struct WeingartenTable {
    int n = 1;
    int d = 1;
    std::vector<Permutation> perms;
    Eigen::MatrixXd gram;
    Eigen::MatrixXd inverse_gram;

    WeingartenTable(int n_, int d_) : n(n_), d(d_) {
        if (n < 1 || d < 1) fail(ErrorKind::OutOfRange, "WeingartenTable: n and d must be positive");
        if (n > 6) fail(ErrorKind::TooLarge, "WeingartenTable: n! too large");
        perms = all_permutations(n);
        const int m = static_cast<int>(perms.size());
        gram.resize(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                gram(i, j) = std::pow(static_cast<double>(d), perms[i].inverse().compose(perms[j]).cycles());
        if (d >= n) {
            inverse_gram = gram.inverse();
        } else {
            // singular Gram matrix: least-squares solution on its range
            inverse_gram = gram.completeOrthogonalDecomposition().pseudoInverse();
        }
    }

    std::size_t size() const { return perms.size(); }
};

inline long long sym_dimension(int d, int n) { return binomial(n + d - 1, n); }

/// (1/n!) Σ_π P_π on (C^d)^{⊗n}.
inline Matrix sym_projector(int d, int n) {
    if (static_cast<double>(std::pow(d, n)) > kMaxDenseDim) fail(ErrorKind::TooLarge, "sym_projector: d^n exceeds 4096");
    auto perms = all_permutations(n);
    const long long total = int_pow(d, n);
    Matrix p = Matrix::Zero(total, total);
    for (const auto& pi : perms) {
        auto m = pi.index_map(d);
        for (long long x = 0; x < total; ++x) p(m[x], x) += 1.0;
    }
    return p / static_cast<double>(perms.size());
}

/// tr(P_σ^† X) = Σ_x X(σ(x), x).
inline Complex perm_overlap(const Matrix& x, const std::vector<long long>& map) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) s += x(map[i], static_cast<Eigen::Index>(i));
    return s;
}

/// Σ_π c_π P_π as a dense matrix.
inline Matrix perm_combination(const WeingartenTable& table, const Eigen::VectorXcd& c) {
    const long long total = int_pow(table.d, table.n);
    Matrix out = Matrix::Zero(total, total);
    for (std::size_t k = 0; k < table.size(); ++k) {
        auto m = table.perms[k].index_map(table.d);
        for (long long x = 0; x < total; ++x) out(m[x], x) += c(k);
    }
    return out;
}

/// ∫ U^{⊗n} X U^{†⊗n} dU, computed as the projection onto span{P_π}.
inline Matrix haar_twirl(const Matrix& x, const WeingartenTable& table) {
    const long long total = int_pow(table.d, table.n);
    if (x.rows() != total || x.cols() != total) fail(ErrorKind::DimMismatch, "haar_twirl: operator size");
    Eigen::VectorXcd b(table.size());
    for (std::size_t k = 0; k < table.size(); ++k) b(k) = perm_overlap(x, table.perms[k].index_map(table.d));
    Eigen::VectorXcd c = table.inverse_gram.cast<Complex>() * b;
    return perm_combination(table, c);
}

namespace detail {

/// Subsystem permutation taking interleaved (D E)^{⊗n} to D^{⊗n} E^{⊗n}.
inline std::vector<int> deinterleave(int n) {
    std::vector<int> perm;
    for (int j = 0; j < n; ++j) perm.push_back(2 * j);
    for (int j = 0; j < n; ++j) perm.push_back(2 * j + 1);
    return perm;
}

inline std::vector<int> inverse_perm(const std::vector<int>& p) {
    std::vector<int> inv(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) inv[p[j]] = static_cast<int>(j);
    return inv;
}

inline SystemDims interleaved_dims(int dd, int de, int n) {
    std::vector<int> dims;
    std::vector<std::string> labels;
    for (int j = 0; j < n; ++j) {
        dims.push_back(dd);
        labels.push_back("D" + std::to_string(j + 1));
        dims.push_back(de);
        labels.push_back("E" + std::to_string(j + 1));
    }
    return SystemDims(dims, labels);
}

} // namespace detail

inline Matrix to_blocked(const Matrix& x, int dd, int de, int n) {
    return permute_systems(x, detail::interleaved_dims(dd, de, n), detail::deinterleave(n));
}

inline Matrix to_interleaved(const Matrix& x, int dd, int de, int n) {
    SystemDims blocked = detail::interleaved_dims(dd, de, n).permuted(detail::deinterleave(n));
    return permute_systems(x, blocked, detail::inverse_perm(detail::deinterleave(n)));
}

/// Twirl of the E factors of an operator on interleaved (D ⊗ E)^{⊗n} by U_E^{⊗n},
/// identity on D^{⊗n}.
inline Matrix bystander_twirl(const Matrix& x, int dim_d, const WeingartenTable& table) {
    const int n = table.n;
    const int de = table.d;
    const long long nd = int_pow(dim_d, n);
    const long long ne = int_pow(de, n);
    if (x.rows() != nd * ne || x.cols() != nd * ne) fail(ErrorKind::DimMismatch, "bystander_twirl: operator size");
    if (nd * ne > kMaxDenseDim) fail(ErrorKind::TooLarge, "bystander_twirl: dimension exceeds 4096");
    Matrix blocked = to_blocked(x, dim_d, de, n);
    const std::size_t m = table.size();
    std::vector<std::vector<long long>> maps;
    for (const auto& p : table.perms) maps.push_back(p.index_map(de));
    // Z_σ(a, b) = tr(P_σ^† X_ab)
    std::vector<Matrix> z(m, Matrix::Zero(nd, nd));
    for (long long a = 0; a < nd; ++a)
        for (long long b = 0; b < nd; ++b)
            for (std::size_t s = 0; s < m; ++s) {
                Complex acc = 0.0;
                for (long long e = 0; e < ne; ++e) acc += blocked(a * ne + maps[s][e], b * ne + e);
                z[s](a, b) = acc;
            }
    Matrix out = Matrix::Zero(nd * ne, nd * ne);
    for (std::size_t p = 0; p < m; ++p) {
        Matrix coeff = Matrix::Zero(nd, nd);
        for (std::size_t s = 0; s < m; ++s) coeff += table.inverse_gram(p, s) * z[s];
        for (long long e = 0; e < ne; ++e) {
            long long f = maps[p][e];
            for (long long a = 0; a < nd; ++a)
                for (long long b = 0; b < nd; ++b) out(a * ne + f, b * ne + e) += coeff(a, b);
        }
    }
    return to_interleaved(out, dim_d, de, n);
}

/// Σ_i |i>_D |i>_E (unnormalized).
inline Vector theta_vector(int d) {
    Vector v = Vector::Zero(d * d);
    for (int i = 0; i < d; ++i) v(i * d + i) = 1.0;
    return v;
}

struct WitnessTrial {
    int trial = 0;
    double min_eigenvalue = 0.0;      // of bound_constant·τ - ρ
    double bound_constant = 0.0;
    double sym_min_eigenvalue = 0.0;  // same with the constant dim Sym^n
    double sym_constant = 0.0;
    int n = 0;
    int d = 0;
};

struct WitnessReport {
    std::vector<WitnessTrial> trials;
    double worst() const {
        double w = kInfinityLocal();
        for (const auto& t : trials) w = std::min(w, t.min_eigenvalue);
        return w;
    }
    double worst_sym() const {
        double w = kInfinityLocal();
        for (const auto& t : trials) w = std::min(w, t.sym_min_eigenvalue);
        return w;
    }

private:
    static double kInfinityLocal() { return std::numeric_limits<double>::infinity(); }
};

namespace detail {

/// Smallest eigenvalue of c·τ - ρ, evaluated on the support of τ so that a
/// huge c does not swamp the comparison. Weight of ρ outside supp(τ) is
/// reported as a negative value.
inline double bound_gap(const SpectralDecomposition& tau, double c, const Matrix& rho) {
    const double mx = tau.max_eigenvalue();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < tau.eigenvalues.size(); ++i)
        if (tau.eigenvalues(i) > 1e-10 * mx) keep.push_back(i);
    const Eigen::Index k = static_cast<Eigen::Index>(keep.size());
    const Eigen::Index n = tau.eigenvalues.size();
    Matrix v(n, k);
    RealVector lam(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        v.col(j) = tau.eigenvectors.col(keep[j]);
        lam(j) = tau.eigenvalues(keep[j]);
    }
    Matrix perp = Matrix::Identity(n, n) - v * v.adjoint();
    double leak = k < n ? max_eigenvalue(hermitian_part(perp * rho * perp)) : 0.0;
    if (leak > 1e-12) return -leak;
    Matrix inner = c * lam.cast<Complex>().asDiagonal().toDenseMatrix() - v.adjoint() * rho * v;
    double m = min_eigenvalue(hermitian_part(inner));
    return k < n ? std::min(0.0, m) : m;
}

inline Matrix symmetric_hermitian(int d, int n, Rng& rng) {
    const long long total = int_pow(d, n);
    Matrix g = rng.ginibre(total, total);
    Matrix h = hermitian_part(g);
    Matrix acc = Matrix::Zero(total, total);
    for (const auto& p : all_permutations(n)) {
        Matrix pm = p.matrix(d);
        acc += pm * h * pm.adjoint();
    }
    return acc / static_cast<double>(acc.rows() ? all_permutations(n).size() : 1);
}

inline void check_sigma(const Matrix& sigma_d) {
    MultipartiteState(sigma_d, SystemDims({static_cast<int>(sigma_d.rows())})).validate();
}

} // namespace detail

/// τ = (σ^{⊗n} ⊗ id)^{1/2} T (σ^{⊗n} ⊗ id)^{1/2} with T the E-twirl of |θ><θ|^{⊗n}.
inline Matrix definetti_tau(const Matrix& sigma_d, int n) {
    const int d = static_cast<int>(sigma_d.rows());
    if (int_pow(d * d, n) > kMaxDenseDim) fail(ErrorKind::TooLarge, "definetti: (d^2)^n exceeds 4096");
    WeingartenTable table(n, d);
    Vector th = kron_power(theta_vector(d), n);
    Matrix t = bystander_twirl(outer(th), d, table);
    Matrix s = kron_power(kron(sqrtm(sigma_d), Matrix::Identity(d, d)), n);
    return hermitian_part(s * t * s);
}

/// Checks ρ ≤ (n+1)^{d²-1} τ for permutation-invariant purifications ρ of σ^{⊗n}.
/// Each trial uses |Ψ> = (σ^{1/2 ⊗n} ⊗ W)|θ>^{⊗n} with W = V^{⊗n} (V Haar), or,
/// when entangled is set, W = V^{⊗n} exp(iH) with H permutation invariant.
inline WitnessReport definetti_witness(const Matrix& sigma_d, int n, std::uint64_t seed, int trials,
                                       bool entangled = false) {
    detail::check_sigma(sigma_d);
    const int d = static_cast<int>(sigma_d.rows());
    if (n < 1) fail(ErrorKind::OutOfRange, "definetti_witness: n must be positive");
    if (int_pow(d * d, n) > kMaxDenseDim) fail(ErrorKind::TooLarge, "definetti_witness: (d^2)^n exceeds 4096");
    SpectralDecomposition tau = hermitian_eig(definetti_tau(sigma_d, n));
    const double constant = std::pow(n + 1.0, d * d - 1.0);
    const double sym_constant = static_cast<double>(sym_dimension(d * d, n));
    Matrix sq = sqrtm(sigma_d);
    Vector th = kron_power(theta_vector(d), n);
    Matrix s = kron_power(kron(sq, Matrix::Identity(d, d)), n);
    Rng root(seed);
    WitnessReport report;
    for (int t = 0; t < trials; ++t) {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        Matrix v = haar_unitary(d, rng);
        Matrix w = kron_power(v, n);
        if (entangled) w = w * exp_i_hermitian(detail::symmetric_hermitian(d, n, rng));
        // W acts on E^{⊗n}; lift it to the interleaved ordering
        Matrix lifted = to_interleaved(kron(Matrix::Identity(int_pow(d, n), int_pow(d, n)), w), d, d, n);
        Vector psi = s * lifted * th;
        Matrix rho = outer(psi);
        WitnessTrial row;
        row.trial = t;
        row.n = n;
        row.d = d;
        row.bound_constant = constant;
        row.sym_constant = sym_constant;
        row.min_eigenvalue = detail::bound_gap(tau, constant, rho);
        row.sym_min_eigenvalue = detail::bound_gap(tau, sym_constant, rho);
        report.trials.push_back(row);
    }
    return report;
}

/// Closed form of tr_{R^n} τ' where τ' is the pure-case operator with E
/// replaced by E ⊗ R (dim R = dim_r), on interleaved (D ⊗ E)^{⊗n}:
///   Σ_{π,σ} Wg_{πσ}(d_E d_R) d_R^{#cycles(π)} (σ^{1/2})^{⊗n} P_σ (σ^{1/2})^{⊗n} ⊗ P_π.
inline Matrix mixed_tau(const Matrix& sigma_d, int dim_e, int dim_r, int n) {
    const int dd = static_cast<int>(sigma_d.rows());
    const long long nd = int_pow(dd, n), ne = int_pow(dim_e, n);
    if (nd * ne > kMaxDenseDim) fail(ErrorKind::TooLarge, "mixed_tau: dimension exceeds 4096");
    const int dprime = std::max(dd, dim_e * dim_r);
    WeingartenTable table(n, dprime);
    Matrix sq = kron_power(sqrtm(sigma_d), n);
    Matrix out = Matrix::Zero(nd * ne, nd * ne);
    for (std::size_t p = 0; p < table.size(); ++p) {
        Matrix coeff = Matrix::Zero(nd, nd);
        for (std::size_t s = 0; s < table.size(); ++s)
            coeff += table.inverse_gram(p, s) * table.perms[s].matrix(dd);
        coeff *= std::pow(static_cast<double>(dim_r), table.perms[p].cycles());
        out += kron(sq * coeff * sq, table.perms[p].matrix(dim_e));
    }
    return hermitian_part(to_interleaved(out, dd, dim_e, n));
}

/// Checks ρ ≤ (n+1)^{d²-1} τ_mixed with d = dim(D)·dim(E)², for permutation-
/// invariant extensions ρ of σ^{⊗n} obtained by tracing R out of a
/// permutation-invariant purification on (D ⊗ E ⊗ R)^{⊗n}, dim R = dim(D)·dim(E).
/// The lemma constant with d' = max(dim D, dim E·dim R) is recorded as sym_constant's
/// companion in the report (sym_constant = dim Sym^n of the enlarged space).
inline WitnessReport mixed_extension_witness(const Matrix& sigma_d, int n, std::uint64_t seed, int trials,
                                             bool entangled = false, int dim_e = 0) {
    detail::check_sigma(sigma_d);
    const int dd = static_cast<int>(sigma_d.rows());
    const int de = dim_e ? dim_e : dd;
    const int dr = dd * de;
    const int der = de * dr;
    if (n < 1) fail(ErrorKind::OutOfRange, "mixed_extension_witness: n must be positive");
    if (int_pow(dd * der, n) > kMaxDenseDim)
        fail(ErrorKind::TooLarge, "mixed_extension_witness: (dim D·dim E·dim R)^n exceeds 4096");
    SpectralDecomposition tau = hermitian_eig(mixed_tau(sigma_d, de, dr, n));
    const double dcor = static_cast<double>(dd) * de * de;
    const double constant = std::pow(n + 1.0, dcor * dcor - 1.0);
    const int dprime = std::max(dd, der);
    const double sym_constant = static_cast<double>(sym_dimension(dprime * dprime, n));
    Matrix sq = sqrtm(sigma_d);
    Rng root(seed);
    WitnessReport report;
    for (int t = 0; t < trials; ++t) {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        Matrix v = haar_isometry(der, dd, rng);
        // single-copy purification on D ⊗ (E R)
        Vector phi = Vector::Zero(dd * der);
        for (int i = 0; i < dd; ++i) {
            Vector ei = Vector::Zero(dd);
            ei(i) = 1.0;
            phi += kron(Vector(sq * ei), Vector(v.col(i)));
        }
        Vector psi = kron_power(phi, n);  // interleaved (D (E R))^{⊗n}
        if (entangled) {
            Matrix w = exp_i_hermitian(detail::symmetric_hermitian(der, n, rng));
            const long long nd = int_pow(dd, n), ner = int_pow(der, n);
            Matrix lifted = to_interleaved(kron(Matrix::Identity(nd, nd), w), dd, der, n);
            (void)ner;
            psi = lifted * psi;
        }
        // trace out the R factors: split each (E R) slot
        std::vector<int> dims;
        std::vector<std::string> labels, keep;
        for (int j = 0; j < n; ++j) {
            dims.insert(dims.end(), {dd, de, dr});
            labels.insert(labels.end(), {"D" + std::to_string(j), "E" + std::to_string(j), "R" + std::to_string(j)});
            keep.insert(keep.end(), {"D" + std::to_string(j), "E" + std::to_string(j)});
        }
        Matrix rho = partial_trace(outer(psi), SystemDims(dims, labels), keep);
        WitnessTrial row;
        row.trial = t;
        row.n = n;
        row.d = static_cast<int>(dcor);
        row.bound_constant = constant;
        row.sym_constant = sym_constant;
        row.min_eigenvalue = detail::bound_gap(tau, constant, rho);
        row.sym_min_eigenvalue = detail::bound_gap(tau, sym_constant, rho);
        report.trials.push_back(row);
    }
    return report;
}

} // namespace mrec
