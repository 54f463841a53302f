#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mrec/linalg.hpp"
#include "mrec/states.hpp"

namespace mrec {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kFidelityClamp = 1e-10;

namespace detail {

/// Eigen-data of a non-negative operator. Eigenvalues slightly below zero are
/// set to zero; larger negative parts raise InvalidState.
inline SpectralDecomposition nonnegative_eig(const Matrix& m, const char* what) {
    SpectralDecomposition e;
    try {
        e = hermitian_eig(m);
    } catch (const Error& err) {
        fail(ErrorKind::InvalidState, std::string(what) + ": " + err.what());
    }
    double scale = e.eigenvalues.size() ? std::max(std::abs(e.eigenvalues(0)), std::abs(e.min_eigenvalue())) : 0.0;
    for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) {
        if (e.eigenvalues(i) < -kNegativeTolerance * std::max(scale, 1e-300))
            fail(ErrorKind::InvalidState, std::string(what) + ": operator is not non-negative");
        if (e.eigenvalues(i) < 0.0) e.eigenvalues(i) = 0.0;
    }
    return e;
}

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

} // namespace detail

/// Entropy in bits of the eigenvalue list; values at or below cutoff*max are dropped.
inline double entropy_of_spectrum(const RealVector& ev, double cutoff = kSupportCutoff) {
    double mx = ev.size() ? ev.maxCoeff() : 0.0;
    double h = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > cutoff * mx) h -= ev(i) * std::log2(ev(i));
    return h;
}

inline double von_neumann_entropy(const Matrix& rho) {
    return entropy_of_spectrum(detail::nonnegative_eig(rho, "von_neumann_entropy").eigenvalues);
}

struct EntropyReport {
    double H_ABC = 0.0;
    double H_AB = 0.0;
    double H_BC = 0.0;
    double H_B = 0.0;
    double cmi = 0.0;
};

/// I(A:C|B) where each of A, B, C is a group of labelled subsystems. B may be empty.
inline EntropyReport cmi(const Matrix& rho, const SystemDims& dims, const std::vector<std::string>& a,
                         const std::vector<std::string>& b, const std::vector<std::string>& c) {
    auto join = [](std::vector<std::string> x, const std::vector<std::string>& y) {
        x.insert(x.end(), y.begin(), y.end());
        return x;
    };
    EntropyReport r;
    r.H_ABC = von_neumann_entropy(partial_trace(rho, dims, join(join(a, b), c)));
    r.H_AB = von_neumann_entropy(partial_trace(rho, dims, join(a, b)));
    r.H_BC = von_neumann_entropy(partial_trace(rho, dims, join(b, c)));
    r.H_B = b.empty() ? 0.0 : von_neumann_entropy(partial_trace(rho, dims, b));
    r.cmi = r.H_AB + r.H_BC - r.H_B - r.H_ABC;
    return r;
}

/// I(A:C|B) for a tripartite operator ordered A, B, C.
inline EntropyReport cmi(const Matrix& rho, const SystemDims& dims) {
    if (dims.size() != 3) fail(ErrorKind::DimMismatch, "cmi: expected exactly three subsystems");
    return cmi(rho, dims, {dims.label(0)}, {dims.label(1)}, {dims.label(2)});
}

inline EntropyReport cmi(const MultipartiteState& s) { return cmi(s.matrix, s.dims); }

/// I(A:C) for a bipartite operator.
inline double mutual_information(const Matrix& rho, const SystemDims& dims) {
    if (dims.size() != 2) fail(ErrorKind::DimMismatch, "mutual_information: expected two subsystems");
    return cmi(rho, dims, {dims.label(0)}, {}, {dims.label(1)}).cmi;
}

/// H(A|B) = H(AB) - H(B) over label groups.
inline double conditional_entropy(const Matrix& rho, const SystemDims& dims, const std::vector<std::string>& a,
                                  const std::vector<std::string>& b) {
    std::vector<std::string> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    double hab = von_neumann_entropy(partial_trace(rho, dims, ab));
    double hb = b.empty() ? 0.0 : von_neumann_entropy(partial_trace(rho, dims, b));
    return hab - hb;
}

/// D(rho||sigma) in bits, including the 1/tr(rho) prefactor; +inf on support violation.
inline double relative_entropy(const Matrix& rho, const Matrix& sigma) {
    require_square(rho, "relative_entropy");
    if (rho.rows() != sigma.rows() || sigma.rows() != sigma.cols())
        fail(ErrorKind::DimMismatch, "relative_entropy: operand sizes differ");
    SpectralDecomposition er = detail::nonnegative_eig(rho, "relative_entropy");
    SpectralDecomposition es = detail::nonnegative_eig(sigma, "relative_entropy");
    double tr_rho = er.eigenvalues.sum();
    if (tr_rho <= 0.0) fail(ErrorKind::InvalidState, "relative_entropy: rho is zero");
    const double smax = es.max_eigenvalue();
    // diagonal of rho in sigma's eigenbasis
    Matrix rho_s = es.eigenvectors.adjoint() * rho * es.eigenvectors;
    double outside = 0.0;
    double cross = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k) {
        double w = rho_s(k, k).real();
        if (es.eigenvalues(k) > kSupportCutoff * smax) cross += w * std::log2(es.eigenvalues(k));
        else outside += w;
    }
    if (outside > 1e-9 * tr_rho) return kInfinity;
    double self = 0.0;
    const double rmax = er.max_eigenvalue();
    for (Eigen::Index k = 0; k < er.eigenvalues.size(); ++k)
        if (er.eigenvalues(k) > kSupportCutoff * rmax) self += detail::xlog2x(er.eigenvalues(k));
    return (self - cross) / tr_rho;
}

/// F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1 via the spectrum of sqrt(rho) sigma sqrt(rho).
inline double fidelity(const Matrix& rho, const Matrix& sigma) {
    require_square(rho, "fidelity");
    if (rho.rows() != sigma.rows() || sigma.rows() != sigma.cols())
        fail(ErrorKind::DimMismatch, "fidelity: operand sizes differ");
    // √ρ restricted to its support, as columns U_i √λ_i. Eigenvalues at roundoff
    // level count as zero so that their square roots do not leak into F.
    auto root_factor = [](const Matrix& m) {
        SpectralDecomposition e;
        try {
            e = hermitian_eig(m);
        } catch (const Error& err) {
            fail(ErrorKind::InvalidState, std::string("fidelity: ") + err.what());
        }
        double top = std::max(e.max_eigenvalue(), 0.0);
        if (e.min_eigenvalue() < -kFidelityClamp * std::max({top, -e.min_eigenvalue(), 1e-300}))
            fail(ErrorKind::InvalidState, "fidelity: negative spectrum");
        double floor = 4.0 * static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon() * top;
        Eigen::Index r = 0;
        while (r < e.eigenvalues.size() && e.eigenvalues(r) > floor) ++r;
        Matrix f = e.eigenvectors.leftCols(r);
        for (Eigen::Index i = 0; i < r; ++i) f.col(i) *= std::sqrt(e.eigenvalues(i));
        return f;
    };
    Matrix a = root_factor(rho), b = root_factor(sigma);
    if (a.cols() == 0 || b.cols() == 0) return 0.0;
    // singular values of √ρ√σ are √eig(√ρ σ √ρ)
    Matrix core = a.adjoint() * b;
    return Eigen::JacobiSVD<Matrix>(core).singularValues().sum();
}

inline double trace_distance(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        fail(ErrorKind::DimMismatch, "trace_distance: operand sizes differ");
    Matrix d = hermitian_part(rho - sigma);
    RealVector ev = hermitian_eigenvalues(d);
    return 0.5 * ev.cwiseAbs().sum() + 0.5 * std::abs(ev.sum());
}

/// max(tr Y+, tr Y-) for Y = rho - sigma.
inline double trace_distance_positive_part(const Matrix& rho, const Matrix& sigma) {
    RealVector ev = hermitian_eigenvalues(hermitian_part(rho - sigma));
    double pos = 0.0, neg = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) (ev(i) > 0 ? pos : neg) += std::abs(ev(i));
    return std::max(pos, neg);
}

/// -2 log2(F(rho,sigma)/tr rho); +inf when the fidelity vanishes.
inline double renyi_half_divergence(const Matrix& rho, const Matrix& sigma) {
    double f = fidelity(rho, sigma);
    double t = real_trace(rho);
    if (f <= 0.0) return kInfinity;
    return -2.0 * std::log2(f / t);
}

struct ConverseBounds {
    double af_bound = 0.0;
    double simplified_bound = kInfinity;
    bool simplified_applicable = false;
    bool af_holds = false;
    bool simplified_holds = true;
};

/// Upper bounds on I(A:C|B) in terms of the distance to a reconstructed state:
/// 8Δ log2 dA - 4Δ log2(2Δ) - 2(1-2Δ) log2(1-2Δ) and, for Δ <= 1/11, 7 log2(dA) sqrt(Δ).
inline ConverseBounds converse_bounds(double cmi_bits, double delta, int dim_a, double tol = 0.0) {
    if (!(delta >= 0.0 && delta <= 0.5)) fail(ErrorKind::OutOfRange, "converse_bounds: need 0 <= delta <= 1/2");
    if (dim_a < 1) fail(ErrorKind::OutOfRange, "converse_bounds: dim A must be positive");
    ConverseBounds r;
    const double la = std::log2(static_cast<double>(dim_a));
    // 4Δ log2(2Δ) = 2 · (2Δ) log2(2Δ)
    r.af_bound = 8.0 * delta * la - 2.0 * detail::xlog2x(2.0 * delta) - 2.0 * detail::xlog2x(1.0 - 2.0 * delta);
    r.af_holds = cmi_bits <= r.af_bound + tol;
    if (delta <= 1.0 / 11.0) {
        r.simplified_applicable = true;
        r.simplified_bound = 7.0 * la * std::sqrt(delta);
        r.simplified_holds = cmi_bits <= r.simplified_bound + tol;
    }
    return r;
}

/// Uhlmann partner: given a purification psi of rho on D⊗R (D first), returns a
/// purification of sigma whose overlap with psi equals F(rho, sigma). rho is
/// regularized as rho + eps*I with eps = 1e-10 ||rho||.
inline Vector uhlmann_partner(const Matrix& rho_d, const Matrix& sigma_d, const Vector& psi, long long dim_r) {
    const long long nd = rho_d.rows();
    if (sigma_d.rows() != nd || psi.size() != nd * dim_r)
        fail(ErrorKind::DimMismatch, "uhlmann_partner: dimensions do not match");
    double eps = 1e-10 * std::max(operator_norm(rho_d), 1e-300);
    Matrix rho_reg = hermitian_part(rho_d) + eps * Matrix::Identity(nd, nd);
    Matrix rho_inv_sqrt = inv_sqrtm(rho_reg);
    Matrix rho_sqrt = sqrtm(rho_reg);
    Matrix sigma_sqrt = sqrtm(sigma_d);
    // psi viewed as an nd x dim_r matrix: (X ⊗ I) psi  <->  X * Psi
    Matrix psi_mat(nd, dim_r);
    for (long long i = 0; i < nd; ++i)
        for (long long r = 0; r < dim_r; ++r) psi_mat(i, r) = psi(i * dim_r + r);
    Matrix omega = rho_inv_sqrt * psi_mat;
    Eigen::JacobiSVD<Matrix> svd(rho_sqrt * sigma_sqrt, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix phi_mat = sigma_sqrt * svd.matrixV() * svd.matrixU().adjoint() * omega;
    Vector phi(nd * dim_r);
    for (long long i = 0; i < nd; ++i)
        for (long long r = 0; r < dim_r; ++r) phi(i * dim_r + r) = phi_mat(i, r);

    Matrix marginal = phi_mat * phi_mat.adjoint();
    double scale = std::max(1.0, operator_norm(sigma_d));
    if (max_abs(marginal - sigma_d) > 1e-7 * scale)
        fail(ErrorKind::SingularInput, "uhlmann_partner: partner does not reproduce sigma");
    double overlap = std::abs(psi.dot(phi));
    if (std::abs(overlap - fidelity(rho_d, sigma_d)) > 1e-7 * scale)
        fail(ErrorKind::SingularInput, "uhlmann_partner: overlap differs from fidelity");
    return phi;
}

} // namespace mrec
