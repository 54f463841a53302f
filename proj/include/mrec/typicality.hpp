#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mrec/entropies.hpp"
#include "mrec/linalg.hpp"

namespace mrec {

inline constexpr double kMaxTypes = 1e7;

/// Distinct non-zero eigenvalues with their multiplicities.
struct DistinctSpectrum {
    std::vector<double> values;  // descending
    std::vector<int> multiplicity;

    std::size_t size() const { return values.size(); }
    int rank() const {
        int r = 0;
        for (int m : multiplicity) r += m;
        return r;
    }
};

/// Groups eigenvalues that agree to within rel_tol * max; eigenvalues at or
/// below cutoff * max are treated as zero and dropped.
inline DistinctSpectrum group_spectrum(const RealVector& eigenvalues, double rel_tol = 1e-9,
                                       double cutoff = kSupportCutoff) {
    std::vector<double> ev(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    std::sort(ev.begin(), ev.end(), std::greater<>());
    DistinctSpectrum out;
    if (ev.empty()) return out;
    const double mx = ev.front();
    double group_sum = 0.0;
    for (double x : ev) {
        if (x <= cutoff * mx) break;
        if (!out.values.empty() && std::abs(x - out.values.back()) <= rel_tol * mx) {
            int& m = out.multiplicity.back();
            group_sum += x;
            ++m;
            out.values.back() = group_sum / m;
        } else {
            out.values.push_back(x);
            out.multiplicity.push_back(1);
            group_sum = x;
        }
    }
    return out;
}

inline DistinctSpectrum group_spectrum(const Matrix& rho) {
    return group_spectrum(detail::nonnegative_eig(rho, "group_spectrum").eigenvalues);
}

inline double log2_multinomial(int n, const std::vector<int>& counts) {
    double v = std::lgamma(n + 1.0);
    for (int c : counts) v -= std::lgamma(c + 1.0);
    return v / std::log(2.0);
}

/// Number of compositions of n into k non-negative parts.
inline double type_count(int k, int n) {
    if (k <= 0) return n == 0 ? 1.0 : 0.0;
    return std::round(std::exp(std::lgamma(n + k) - std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(k))));
}

/// Calls visit(counts) for every composition of n into k parts, in
/// lexicographically decreasing order of counts.
inline void for_each_composition(int k, int n, const std::function<void(const std::vector<int>&)>& visit) {
    if (k <= 0) return;
    std::vector<int> counts(k, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == k - 1) {
            counts[pos] = left;
            visit(counts);
            return;
        }
        for (int c = left; c >= 0; --c) {
            counts[pos] = c;
            rec(pos + 1, left - c);
        }
    };
    rec(0, n);
}

/// A type class of rho^{⊗n}: counts n_r over the distinct eigenvalues r.
struct TypeClass {
    std::vector<int> counts;
    double log2_eigenvalue = 0.0;  // log2 Π r^{n_r}
    double log2_mass = 0.0;        // log2 of multinomial · Π (d_r r)^{n_r}

    double eigenvalue() const { return std::exp2(log2_eigenvalue); }
    double mass() const { return std::exp2(log2_mass); }
};

inline TypeClass make_type(const DistinctSpectrum& spec, int n, const std::vector<int>& counts) {
    TypeClass t;
    t.counts = counts;
    t.log2_mass = log2_multinomial(n, counts);
    for (std::size_t r = 0; r < counts.size(); ++r) {
        if (counts[r] == 0) continue;
        double l = std::log2(spec.values[r]);
        t.log2_eigenvalue += counts[r] * l;
        t.log2_mass += counts[r] * (l + std::log2(static_cast<double>(spec.multiplicity[r])));
    }
    return t;
}

inline void for_each_type(const DistinctSpectrum& spec, int n, const std::function<void(const TypeClass&)>& visit) {
    if (n < 1) fail(ErrorKind::OutOfRange, "types: n must be positive");
    if (type_count(static_cast<int>(spec.size()), n) > kMaxTypes)
        fail(ErrorKind::TooManyTypes, "types: more than 1e7 type classes");
    for_each_composition(static_cast<int>(spec.size()), n,
                         [&](const std::vector<int>& c) { visit(make_type(spec, n, c)); });
}

inline std::vector<TypeClass> spectrum_types(const Matrix& rho, int n) {
    DistinctSpectrum spec = group_spectrum(rho);
    std::vector<TypeClass> out;
    for_each_type(spec, n, [&](const TypeClass& t) { out.push_back(t); });
    return out;
}

/// Number of distinct eigenvalues of rho^{⊗n}, merging products that agree to
/// a relative 1e-12.
inline std::size_t distinct_eigenvalue_count(const Matrix& rho, int n) {
    DistinctSpectrum spec = group_spectrum(rho);
    std::vector<double> logs;
    for_each_type(spec, n, [&](const TypeClass& t) { logs.push_back(t.log2_eigenvalue); });
    std::sort(logs.begin(), logs.end());
    const double tol = std::log2(1.0 + 1e-12);
    std::size_t count = 0;
    double rep = 0.0;
    for (double l : logs) {
        if (count == 0 || l - rep > tol) {
            ++count;
            rep = l;
        }
    }
    return count;
}

namespace detail {

inline double typical_mass_for(const DistinctSpectrum& spec, double entropy, int n, double delta) {
    const double lo = -n * (entropy + delta);
    const double hi = -n * (entropy - delta);
    const double tol = 1e-10 * std::max(1.0, static_cast<double>(n));
    double mass = 0.0;
    for_each_type(spec, n, [&](const TypeClass& t) {
        if (t.log2_eigenvalue >= lo - tol && t.log2_eigenvalue <= hi + tol) mass += t.mass();
    });
    return mass;
}

} // namespace detail

/// Weight of rho^{⊗n} on eigenvalues in [2^{-n(H+δ)}, 2^{-n(H-δ)}].
inline double typical_mass(const Matrix& rho, int n, double delta) {
    if (!(delta > 0.0)) fail(ErrorKind::OutOfRange, "typical_mass: delta must be positive");
    SpectralDecomposition e = detail::nonnegative_eig(rho, "typical_mass");
    DistinctSpectrum spec = group_spectrum(e.eigenvalues);
    return detail::typical_mass_for(spec, entropy_of_spectrum(e.eigenvalues), n, delta);
}

struct ProjectorPairMasses {
    double mass_b = 0.0;
    double mass_bc = 0.0;
};

namespace detail {

inline void check_marginal(const Matrix& rho_b, const Matrix& rho_bc, const SystemDims& dims_bc) {
    if (dims_bc.size() != 2 || rho_bc.rows() != dims_bc.total() || rho_b.rows() != dims_bc.dim(0))
        fail(ErrorKind::DimMismatch, "projector_pair_masses: dims do not match");
    Matrix tr_c = partial_trace(rho_bc, dims_bc, {dims_bc.label(0)});
    if (max_abs(tr_c - rho_b) > 1e-8)
        fail(ErrorKind::MarginalMismatch, "projector_pair_masses: rho_B is not the marginal of rho_BC");
}

} // namespace detail

inline ProjectorPairMasses projector_pair_masses(const Matrix& rho_b, const Matrix& rho_bc, const SystemDims& dims_bc,
                                                 int n, double delta_b, double delta_bc) {
    detail::check_marginal(rho_b, rho_bc, dims_bc);
    return {typical_mass(rho_b, n, delta_b), typical_mass(rho_bc, n, delta_bc)};
}

struct PairThreshold {
    bool found = false;
    int n = 0;
    ProjectorPairMasses masses;
};

/// First n in [1, n_max] at which both typical masses reach 1 - eta.
inline PairThreshold smallest_typical_n(const Matrix& rho_b, const Matrix& rho_bc, const SystemDims& dims_bc,
                                        double delta_b, double delta_bc, double eta, int n_max = 2000) {
    detail::check_marginal(rho_b, rho_bc, dims_bc);
    if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::OutOfRange, "smallest_typical_n: eta must lie in (0,1)");
    SpectralDecomposition eb = detail::nonnegative_eig(rho_b, "smallest_typical_n");
    SpectralDecomposition ebc = detail::nonnegative_eig(rho_bc, "smallest_typical_n");
    DistinctSpectrum sb = group_spectrum(eb.eigenvalues), sbc = group_spectrum(ebc.eigenvalues);
    double hb = entropy_of_spectrum(eb.eigenvalues), hbc = entropy_of_spectrum(ebc.eigenvalues);
    PairThreshold out;
    for (int n = 1; n <= n_max; ++n) {
        double mb = detail::typical_mass_for(sb, hb, n, delta_b);
        if (mb < 1.0 - eta) continue;
        double mbc = detail::typical_mass_for(sbc, hbc, n, delta_bc);
        if (mbc >= 1.0 - eta) {
            out = {true, n, {mb, mbc}};
            break;
        }
    }
    return out;
}

struct TypicalRow {
    int n = 0;
    double delta = 0.0;
    double mass = 0.0;
    double complement_log2 = 0.0;  // log2(1 - mass)
};

inline std::vector<TypicalRow> typical_table(const Matrix& rho, const std::vector<int>& ns, double delta) {
    std::vector<TypicalRow> rows;
    for (int n : ns) {
        double m = typical_mass(rho, n, delta);
        double c = 1.0 - m;
        rows.push_back({n, delta, m, c > 0.0 ? std::log2(c) : -kInfinity});
    }
    return rows;
}

/// Least-squares slope κ of log2(1 - mass) ≈ a - κ n.
inline double fit_decay_rate(const std::vector<TypicalRow>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& r : rows) {
        if (!std::isfinite(r.complement_log2)) continue;
        sx += r.n;
        sy += r.complement_log2;
        sxx += static_cast<double>(r.n) * r.n;
        sxy += r.n * r.complement_log2;
        ++k;
    }
    if (k < 2) return kInfinity;
    double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    return -slope;
}

} // namespace mrec
