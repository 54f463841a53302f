#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrec/linalg.hpp"
#include "mrec/rng.hpp"

namespace mrec {

/// A density operator (normalized) or a general non-negative operator together
/// with its tensor-factor bookkeeping.
struct MultipartiteState {
    Matrix matrix;
    SystemDims dims;
    bool normalized = true;

    MultipartiteState() = default;
    MultipartiteState(Matrix m, SystemDims d, bool norm = true)
        : matrix(std::move(m)), dims(std::move(d)), normalized(norm) {}

    long long dim() const { return matrix.rows(); }

    /// Throws SchemaViolation describing the first broken invariant.
    void validate() const {
        if (matrix.rows() != matrix.cols())
            fail(ErrorKind::SchemaViolation, "state matrix is not square");
        if (matrix.rows() != dims.total())
            fail(ErrorKind::SchemaViolation, "product of dims does not match matrix dimension");
        if (!all_finite(matrix)) fail(ErrorKind::SchemaViolation, "non-finite entry");
        if (!is_hermitian(matrix)) fail(ErrorKind::SchemaViolation, "matrix is not Hermitian");
        RealVector ev = hermitian_eigenvalues(matrix);
        double scale = ev.size() ? std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1))) : 0.0;
        if (ev.size() && ev(ev.size() - 1) < -kNegativeTolerance * std::max(scale, 1e-300))
            fail(ErrorKind::SchemaViolation, "matrix has a negative eigenvalue");
        if (normalized && std::abs(real_trace(matrix) - 1.0) > 1e-9)
            fail(ErrorKind::SchemaViolation, "normalized state does not have unit trace");
    }

    MultipartiteState marginal(const std::vector<std::string>& keep) const {
        return {partial_trace(matrix, dims, keep), dims.subset(keep), normalized};
    }
};

inline MultipartiteState random_density(int dim, int rank, Rng rng, const SystemDims& dims) {
    if (rank < 1 || rank > dim) fail(ErrorKind::BadRank, "random_density: need 1 <= rank <= dim");
    if (dims.total() != dim) fail(ErrorKind::DimMismatch, "random_density: dims product");
    Matrix g = rng.ginibre(dim, rank);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return {hermitian_part(rho), dims, true};
}

/// Ginibre-induced random density operator of the given rank.
inline MultipartiteState random_density(int dim, int rank, std::uint64_t seed) {
    return random_density(dim, rank, Rng(seed), SystemDims({dim}));
}

inline MultipartiteState random_density(const SystemDims& dims, int rank, Rng rng) {
    return random_density(static_cast<int>(dims.total()), rank, rng, dims);
}

/// Full-rank random state on the given dims.
inline MultipartiteState random_density(const SystemDims& dims, Rng rng) {
    return random_density(dims, static_cast<int>(dims.total()), rng);
}

inline Matrix haar_unitary(int dim, Rng& rng) {
    Matrix z = rng.ginibre(dim, dim);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        Complex d = r(j, j);
        double a = std::abs(d);
        q.col(j) *= (a > 0.0 ? d / a : Complex(1.0));
    }
    return q;
}

inline Matrix haar_unitary(int dim, std::uint64_t seed) {
    Rng rng(seed);
    return haar_unitary(dim, rng);
}

/// Haar-random isometry from C^in to C^out (first `in` columns of a Haar unitary).
inline Matrix haar_isometry(int out, int in, Rng& rng) {
    if (in > out) fail(ErrorKind::DimMismatch, "haar_isometry: input larger than output");
    return haar_unitary(out, rng).leftCols(in);
}

inline Vector haar_vector(int dim, Rng& rng) {
    Vector v = rng.ginibre(dim, 1).col(0);
    return v / v.norm();
}

inline Matrix basis_projector(int dim, int k) {
    Matrix p = Matrix::Zero(dim, dim);
    p(k, k) = 1.0;
    return p;
}

/// Classical-on-B tripartite specification: rho = Σ_b P(b) |b><b|_B ⊗ rho_{AC,b},
/// stored in A,B,C order.
struct QcqSpec {
    std::vector<double> p_b;
    std::vector<Matrix> rho_acb;
    int dim_a = 2;
    int dim_c = 2;

    void validate() const {
        if (p_b.empty() || p_b.size() != rho_acb.size())
            fail(ErrorKind::DimMismatch, "qcq: probability vector and AC states differ in length");
        double total = 0.0;
        for (double p : p_b) {
            if (p < 0.0 || !std::isfinite(p)) fail(ErrorKind::InvalidState, "qcq: negative probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) fail(ErrorKind::InvalidState, "qcq: probabilities do not sum to 1");
        for (const Matrix& m : rho_acb) {
            if (m.rows() != dim_a * dim_c || m.cols() != dim_a * dim_c)
                fail(ErrorKind::DimMismatch, "qcq: AC state has wrong dimension");
            MultipartiteState(m, SystemDims({dim_a, dim_c}, {"A", "C"})).validate();
        }
    }

    SystemDims dims() const { return SystemDims({dim_a, static_cast<int>(p_b.size()), dim_c}); }
};

inline MultipartiteState build_qcq(const QcqSpec& spec) {
    spec.validate();
    const int nb = static_cast<int>(spec.p_b.size());
    SystemDims bac({nb, spec.dim_a, spec.dim_c}, {"B", "A", "C"});
    Matrix acc = Matrix::Zero(bac.total(), bac.total());
    for (int b = 0; b < nb; ++b) acc += spec.p_b[b] * kron(basis_projector(nb, b), spec.rho_acb[b]);
    return {permute_systems(acc, bac, {1, 0, 2}), spec.dims(), true};
}

/// Σ_b P(b) rho_{A,b} ⊗ |b><b| ⊗ rho_{C,b}.
inline MultipartiteState qcq_markov_reconstruction(const QcqSpec& spec) {
    spec.validate();
    const int nb = static_cast<int>(spec.p_b.size());
    SystemDims ac({spec.dim_a, spec.dim_c}, {"A", "C"});
    Matrix acc = Matrix::Zero(spec.dims().total(), spec.dims().total());
    for (int b = 0; b < nb; ++b) {
        Matrix ra = partial_trace(spec.rho_acb[b], ac, {"A"});
        Matrix rc = partial_trace(spec.rho_acb[b], ac, {"C"});
        acc += spec.p_b[b] * kron(kron(ra, basis_projector(nb, b)), rc);
    }
    return {acc, spec.dims(), true};
}

inline QcqSpec random_qcq(int num_b, int dim_a, int dim_c, Rng rng) {
    QcqSpec spec;
    spec.dim_a = dim_a;
    spec.dim_c = dim_c;
    double total = 0.0;
    for (int b = 0; b < num_b; ++b) {
        double w = -std::log(1.0 - rng.uniform());
        spec.p_b.push_back(w);
        total += w;
    }
    for (double& p : spec.p_b) p /= total;
    for (int b = 0; b < num_b; ++b)
        spec.rho_acb.push_back(random_density(SystemDims({dim_a, dim_c}), rng.split(b + 1)).matrix);
    return spec;
}

/// Projector onto the antisymmetric subspace of C^d ⊗ C^d.
inline Matrix antisymmetric_projector(int d) {
    Matrix swap = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) swap(j * d + i, i * d + j) = 1.0;
    return (Matrix::Identity(d * d, d * d) - swap) * 0.5;
}

/// Named example states. `d` is the local dimension; `parties` the number of
/// subsystems (0 selects the natural default for the name).
inline MultipartiteState canonical_state(const std::string& name, int d = 2, int parties = 0) {
    auto dims_for = [](int dd, int k) { return SystemDims(std::vector<int>(k, dd)); };
    if (d < 1) fail(ErrorKind::DimMismatch, "canonical_state: local dimension must be positive");
    if (name == "ghz") {
        int k = parties ? parties : 3;
        SystemDims dims = dims_for(d, k);
        Vector psi = Vector::Zero(dims.total());
        long long step = 0;
        for (int i = 0; i < k; ++i) step = step * d + 1;
        for (int i = 0; i < d; ++i) psi(i * step) = 1.0 / std::sqrt(static_cast<double>(d));
        return {outer(psi), dims, true};
    }
    if (name == "w") {
        if (d != 2) fail(ErrorKind::DimMismatch, "canonical_state: w state is defined on qubits");
        int k = parties ? parties : 3;
        SystemDims dims = dims_for(2, k);
        Vector psi = Vector::Zero(dims.total());
        for (int i = 0; i < k; ++i) psi(1LL << (k - 1 - i)) = 1.0 / std::sqrt(static_cast<double>(k));
        return {outer(psi), dims, true};
    }
    if (name == "maximally_mixed") {
        int k = parties ? parties : 1;
        SystemDims dims = dims_for(d, k);
        long long n = dims.total();
        return {Matrix::Identity(n, n) / static_cast<double>(n), dims, true};
    }
    if (name == "antisymmetric") {
        if (d < 2) fail(ErrorKind::DimMismatch, "canonical_state: antisymmetric state needs d >= 2");
        Matrix p = antisymmetric_projector(d);
        return {p / p.trace().real(), dims_for(d, 2), true};
    }
    if (name == "singlet") {
        if (d != 2) fail(ErrorKind::DimMismatch, "canonical_state: singlet is defined on qubits");
        Vector psi = Vector::Zero(4);
        psi(1) = 1.0 / std::sqrt(2.0);
        psi(2) = -1.0 / std::sqrt(2.0);
        return {outer(psi), dims_for(2, 2), true};
    }
    if (name == "product") {
        int k = parties ? parties : 3;
        SystemDims dims = dims_for(d, k);
        Matrix m = Matrix::Zero(dims.total(), dims.total());
        m(0, 0) = 1.0;
        return {m, dims, true};
    }
    fail(ErrorKind::UnknownName, "canonical_state: unknown name '" + name + "'");
}

// ---- file format ----

inline nlohmann::json state_to_json(const MultipartiteState& s) {
    nlohmann::json j;
    j["dims"] = s.dims.dims();
    j["labels"] = s.dims.labels();
    j["normalized"] = s.normalized;
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index r = 0; r < s.matrix.rows(); ++r) {
        nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
        for (Eigen::Index c = 0; c < s.matrix.cols(); ++c) {
            rr.push_back(s.matrix(r, c).real());
            ri.push_back(s.matrix(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    j["matrix"] = {{"re", re}, {"im", im}};
    return j;
}

inline MultipartiteState state_from_json(const nlohmann::json& j) {
    auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.is_object() || !j.contains(key))
            fail(ErrorKind::SchemaViolation, std::string("missing field '") + key + "'");
        return j.at(key);
    };
    std::vector<int> dims;
    std::vector<std::string> labels;
    bool normalized = true;
    Matrix m;
    try {
        dims = need("dims").get<std::vector<int>>();
        if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
        if (j.contains("normalized")) normalized = j.at("normalized").get<bool>();
        const auto& mat = need("matrix");
        if (!mat.is_object() || !mat.contains("re"))
            fail(ErrorKind::SchemaViolation, "matrix must contain 're'");
        auto re = mat.at("re").get<std::vector<std::vector<double>>>();
        std::vector<std::vector<double>> im;
        if (mat.contains("im")) im = mat.at("im").get<std::vector<std::vector<double>>>();
        const std::size_t n = re.size();
        if (!im.empty() && im.size() != n) fail(ErrorKind::SchemaViolation, "'re' and 'im' differ in size");
        m.resize(n, n);
        for (std::size_t r = 0; r < n; ++r) {
            if (re[r].size() != n || (!im.empty() && im[r].size() != n))
                fail(ErrorKind::SchemaViolation, "matrix is not square");
            for (std::size_t c = 0; c < n; ++c) m(r, c) = Complex(re[r][c], im.empty() ? 0.0 : im[r][c]);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::SchemaViolation, e.what());
    }
    SystemDims sd;
    try {
        sd = labels.empty() ? SystemDims(dims) : SystemDims(dims, labels);
    } catch (const Error& e) {
        fail(ErrorKind::SchemaViolation, e.what());
    }
    MultipartiteState s(m, sd, normalized);
    s.validate();
    return s;
}

inline MultipartiteState parse_state(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::ParseError, e.what());
    }
    return state_from_json(j);
}

inline MultipartiteState read_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_state(buf.str());
}

inline void write_state(const MultipartiteState& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::ParseError, "cannot write '" + path + "'");
    out << state_to_json(s).dump() << '\n';
}

} // namespace mrec
