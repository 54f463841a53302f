#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrec/error.hpp"

namespace mrec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kSupportCutoff = 1e-12;
inline constexpr double kHermitianTolerance = 1e-9;
inline constexpr double kNegativeTolerance = 1e-9;

inline bool all_finite(const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

/// Largest absolute entry.
inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols())
        fail(ErrorKind::DimMismatch, std::string(what) + ": matrix is not square");
}

inline Matrix hermitian_part(const Matrix& m) {
    return (m + m.adjoint()) * 0.5;
}

inline bool is_hermitian(const Matrix& m, double tol = kHermitianTolerance) {
    if (m.rows() != m.cols()) return false;
    double scale = std::max(1.0, max_abs(m));
    return max_abs(m - m.adjoint()) <= tol * scale;
}

struct SpectralDecomposition {
    RealVector eigenvalues;  // descending
    Matrix eigenvectors;     // columns

    Matrix reconstruct() const {
        return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
    }

    double max_eigenvalue() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
    double min_eigenvalue() const {
        return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0;
    }
};

inline SpectralDecomposition hermitian_eig(const Matrix& m) {
    require_square(m, "hermitian_eig");
    if (!all_finite(m)) fail(ErrorKind::NonFinite, "hermitian_eig: non-finite entry");
    if (!is_hermitian(m)) fail(ErrorKind::NotHermitian, "hermitian_eig: asymmetry exceeds tolerance");
    const Eigen::Index n = m.rows();
    SpectralDecomposition out;
    if (n == 0) return out;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m));
    if (solver.info() != Eigen::Success)
        fail(ErrorKind::NonFinite, "hermitian_eig: solver did not converge");
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

inline RealVector hermitian_eigenvalues(const Matrix& m) {
    require_square(m, "hermitian_eigenvalues");
    if (!all_finite(m)) fail(ErrorKind::NonFinite, "hermitian_eigenvalues: non-finite entry");
    if (!is_hermitian(m)) fail(ErrorKind::NotHermitian, "hermitian_eigenvalues: asymmetry exceeds tolerance");
    if (m.rows() == 0) return RealVector();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().reverse();
}

/// How matrix_function treats the spectrum.
///   Real:        f is applied to every eigenvalue.
///   NonNegative: eigenvalues below -cutoff*max raise NegativeEigenvalue; small
///                negatives are clamped to zero before f.
///   Support:     as NonNegative, and eigenvalues at or below cutoff*max are
///                mapped to 0 instead of f(lambda) (kernel convention).
enum class Domain { Real, NonNegative, Support };

template <class F>
Matrix matrix_function(const SpectralDecomposition& eig, F f, Domain domain,
                       double cutoff = kSupportCutoff) {
    const Eigen::Index n = eig.eigenvalues.size();
    double scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(eig.eigenvalues(i)));
    const double threshold = cutoff * scale;
    Eigen::VectorXcd values(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double lambda = eig.eigenvalues(i);
        if (domain != Domain::Real) {
            if (lambda < -threshold && lambda < -kNegativeTolerance * scale)
                fail(ErrorKind::NegativeEigenvalue, "matrix_function: operator is not non-negative");
            if (lambda < 0.0) lambda = 0.0;
            if (domain == Domain::Support && lambda <= threshold) {
                values(i) = 0.0;
                continue;
            }
        }
        values(i) = Complex(f(lambda));
    }
    return eig.eigenvectors * values.asDiagonal() * eig.eigenvectors.adjoint();
}

template <class F>
Matrix matrix_function(const Matrix& m, F f, Domain domain, double cutoff = kSupportCutoff) {
    return matrix_function(hermitian_eig(m), f, domain, cutoff);
}

inline Matrix sqrtm(const Matrix& m) {
    return matrix_function(m, [](double x) { return std::sqrt(x); }, Domain::NonNegative);
}

/// Pseudo-inverse square root on the support.
inline Matrix inv_sqrtm(const Matrix& m, double cutoff = kSupportCutoff) {
    return matrix_function(m, [](double x) { return 1.0 / std::sqrt(x); }, Domain::Support, cutoff);
}

inline Matrix log2m(const Matrix& m, double cutoff = kSupportCutoff) {
    return matrix_function(m, [](double x) { return std::log2(x); }, Domain::Support, cutoff);
}

/// Projector onto the eigenvectors with eigenvalue above cutoff*max.
inline Matrix support_projector(const Matrix& m, double cutoff = kSupportCutoff) {
    return matrix_function(m, [](double) { return 1.0; }, Domain::Support, cutoff);
}

/// exp(i h) for Hermitian h.
inline Matrix exp_i_hermitian(const Matrix& h) {
    SpectralDecomposition eig = hermitian_eig(h);
    Eigen::VectorXcd phases(eig.eigenvalues.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::polar(1.0, eig.eigenvalues(i));
    return eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline Matrix kron_power(const Matrix& a, int n) {
    Matrix out = Matrix::Identity(1, 1);
    for (int i = 0; i < n; ++i) out = kron(out, a);
    return out;
}

inline Vector kron_power(const Vector& a, int n) {
    Vector out = Vector::Ones(1);
    for (int i = 0; i < n; ++i) out = kron(out, a);
    return out;
}

inline Matrix outer(const Vector& v) { return v * v.adjoint(); }

/// Ordered subsystem dimensions with labels. Composite indices are row-major
/// over the listed order, so the first subsystem varies slowest.
class SystemDims {
public:
    SystemDims() = default;

    explicit SystemDims(std::vector<int> dims) : dims_(std::move(dims)) {
        for (std::size_t i = 0; i < dims_.size(); ++i) labels_.push_back(default_label(i));
        check();
    }

    SystemDims(std::vector<int> dims, std::vector<std::string> labels)
        : dims_(std::move(dims)), labels_(std::move(labels)) {
        check();
    }

    static std::string default_label(std::size_t i) {
        std::string s(1, static_cast<char>('A' + i % 26));
        if (i >= 26) s += std::to_string(i / 26);
        return s;
    }

    const std::vector<int>& dims() const { return dims_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return dims_.size(); }
    int dim(std::size_t i) const { return dims_.at(i); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }

    long long total() const {
        long long t = 1;
        for (int d : dims_) t *= d;
        return t;
    }

    bool has(const std::string& label) const {
        return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
    }

    std::size_t index_of(const std::string& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) fail(ErrorKind::DimMismatch, "unknown subsystem label '" + label + "'");
        return static_cast<std::size_t>(it - labels_.begin());
    }

    int dim_of(const std::string& label) const { return dims_[index_of(label)]; }

    long long dim_of(const std::vector<std::string>& labels) const {
        long long t = 1;
        for (const auto& l : labels) t *= dim_of(l);
        return t;
    }

    /// Keeps the listed subsystems in their original order.
    SystemDims subset(const std::vector<std::string>& keep) const {
        std::vector<int> d;
        std::vector<std::string> l;
        for (std::size_t i = 0; i < dims_.size(); ++i)
            if (std::find(keep.begin(), keep.end(), labels_[i]) != keep.end()) {
                d.push_back(dims_[i]);
                l.push_back(labels_[i]);
            }
        if (l.size() != keep.size()) fail(ErrorKind::DimMismatch, "subset: unknown or repeated label");
        return SystemDims(d, l);
    }

    /// Output subsystem j is input subsystem perm[j].
    SystemDims permuted(const std::vector<int>& perm) const {
        std::vector<int> d;
        std::vector<std::string> l;
        for (int p : perm) {
            d.push_back(dims_.at(p));
            l.push_back(labels_.at(p));
        }
        return SystemDims(d, l);
    }

    /// Replaces one subsystem by an ordered list of new ones.
    SystemDims replaced(const std::string& target, const std::vector<int>& new_dims,
                        const std::vector<std::string>& new_labels) const {
        std::size_t pos = index_of(target);
        std::vector<int> d;
        std::vector<std::string> l;
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (i == pos) {
                d.insert(d.end(), new_dims.begin(), new_dims.end());
                l.insert(l.end(), new_labels.begin(), new_labels.end());
            } else {
                d.push_back(dims_[i]);
                l.push_back(labels_[i]);
            }
        }
        return SystemDims(d, l);
    }

    bool operator==(const SystemDims& o) const { return dims_ == o.dims_ && labels_ == o.labels_; }

private:
    void check() const {
        if (dims_.size() != labels_.size()) fail(ErrorKind::DimMismatch, "dims and labels differ in length");
        for (int d : dims_)
            if (d < 1) fail(ErrorKind::DimMismatch, "subsystem dimension must be positive");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                if (labels_[i] == labels_[j]) fail(ErrorKind::DimMismatch, "duplicate label '" + labels_[i] + "'");
    }

    std::vector<int> dims_;
    std::vector<std::string> labels_;
};

namespace detail {

inline std::vector<long long> strides(const std::vector<int>& dims) {
    std::vector<long long> s(dims.size(), 1);
    for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * dims[i + 1];
    return s;
}

/// All composite offsets spanned by the given subsystem positions, enumerated
/// row-major over those positions.
inline std::vector<long long> offsets(const std::vector<int>& dims, const std::vector<std::size_t>& positions) {
    auto st = strides(dims);
    std::vector<long long> out{0};
    for (std::size_t p : positions) {
        std::vector<long long> next;
        next.reserve(out.size() * dims[p]);
        for (long long base : out)
            for (int k = 0; k < dims[p]; ++k) next.push_back(base + k * st[p]);
        out.swap(next);
    }
    return out;
}

inline void require_dims(const Matrix& m, const SystemDims& dims, const char* what) {
    if (m.rows() != dims.total() || m.cols() != dims.total())
        fail(ErrorKind::DimMismatch, std::string(what) + ": matrix size does not match subsystem dims");
}

} // namespace detail

/// Traces out every subsystem not listed in keep. The result is ordered as the
/// kept subsystems appear in dims.
inline Matrix partial_trace(const Matrix& m, const SystemDims& dims, const std::vector<std::string>& keep) {
    detail::require_dims(m, dims, "partial_trace");
    std::vector<std::size_t> kept, traced;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (std::find(keep.begin(), keep.end(), dims.label(i)) != keep.end()) kept.push_back(i);
        else traced.push_back(i);
    }
    if (kept.size() != keep.size()) fail(ErrorKind::DimMismatch, "partial_trace: unknown or repeated label");
    auto ko = detail::offsets(dims.dims(), kept);
    auto to = detail::offsets(dims.dims(), traced);
    const Eigen::Index n = static_cast<Eigen::Index>(ko.size());
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            Complex acc = 0.0;
            for (long long t : to) acc += m(ko[i] + t, ko[j] + t);
            out(i, j) = acc;
        }
    return out;
}

/// Index map of the subsystem permutation: new index -> old index.
inline std::vector<long long> permutation_index_map(const SystemDims& dims, const std::vector<int>& perm) {
    if (perm.size() != dims.size()) fail(ErrorKind::DimMismatch, "permute_systems: permutation length");
    std::vector<int> seen(perm.size(), 0);
    for (int p : perm) {
        if (p < 0 || p >= static_cast<int>(perm.size()) || seen[p]++)
            fail(ErrorKind::DimMismatch, "permute_systems: not a permutation");
    }
    std::vector<std::size_t> positions(perm.begin(), perm.end());
    return detail::offsets(dims.dims(), positions);
}

/// Reorders tensor factors: output subsystem j is input subsystem perm[j].
inline Matrix permute_systems(const Matrix& m, const SystemDims& dims, const std::vector<int>& perm) {
    detail::require_dims(m, dims, "permute_systems");
    auto map = permutation_index_map(dims, perm);
    const Eigen::Index n = m.rows();
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m(map[i], map[j]);
    return out;
}

inline Vector permute_systems(const Vector& v, const SystemDims& dims, const std::vector<int>& perm) {
    if (v.size() != dims.total()) fail(ErrorKind::DimMismatch, "permute_systems: vector size");
    auto map = permutation_index_map(dims, perm);
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(map[i]);
    return out;
}

/// Embeds op (acting on the subsystem at position pos) as I ⊗ op ⊗ I. op may be
/// rectangular; the result maps dims to dims with that factor replaced.
inline Matrix lift_operator(const Matrix& op, const SystemDims& dims, std::size_t pos) {
    if (op.cols() != dims.dim(pos)) fail(ErrorKind::DimMismatch, "lift_operator: input dimension");
    long long left = 1, right = 1;
    for (std::size_t i = 0; i < pos; ++i) left *= dims.dim(i);
    for (std::size_t i = pos + 1; i < dims.size(); ++i) right *= dims.dim(i);
    return kron(kron(Matrix::Identity(left, left), op), Matrix::Identity(right, right));
}

/// Embeds op acting on a contiguous-or-not group of labelled subsystems (in the
/// listed order) into the full space.
inline Matrix operator_on(const Matrix& op, const SystemDims& dims, const std::vector<std::string>& labels) {
    std::vector<int> perm;
    for (const auto& l : labels) perm.push_back(static_cast<int>(dims.index_of(l)));
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (std::find(labels.begin(), labels.end(), dims.label(i)) == labels.end())
            perm.push_back(static_cast<int>(i));
    long long group = dims.dim_of(labels);
    if (op.rows() != group || op.cols() != group) fail(ErrorKind::DimMismatch, "operator_on: operator size");
    long long rest = dims.total() / group;
    Matrix in_perm = kron(op, Matrix::Identity(rest, rest));
    // in_perm acts on the permuted ordering; move back.
    SystemDims pd = dims.permuted(perm);
    std::vector<int> inverse(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) inverse[perm[j]] = static_cast<int>(j);
    return permute_systems(in_perm, pd, inverse);
}

inline RealVector singular_values(const Matrix& m) {
    if (!all_finite(m)) fail(ErrorKind::NonFinite, "singular_values: non-finite entry");
    if (m.size() == 0) return RealVector();
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues();
}

inline double trace_norm(const Matrix& m) { return singular_values(m).sum(); }

inline double operator_norm(const Matrix& m) {
    RealVector s = singular_values(m);
    return s.size() ? s.maxCoeff() : 0.0;
}

inline double min_eigenvalue(const Matrix& m) {
    RealVector e = hermitian_eigenvalues(m);
    return e.size() ? e(e.size() - 1) : 0.0;
}

inline double max_eigenvalue(const Matrix& m) {
    RealVector e = hermitian_eigenvalues(m);
    return e.size() ? e(0) : 0.0;
}

inline double real_trace(const Matrix& m) { return m.trace().real(); }

inline bool is_unitary(const Matrix& u, double tol = 1e-8) {
    if (u.rows() != u.cols()) return false;
    return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) <= tol;
}

} // namespace mrec
