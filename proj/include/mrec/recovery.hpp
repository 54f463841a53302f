#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrec/entropies.hpp"
#include "mrec/linalg.hpp"
#include "mrec/rng.hpp"
#include "mrec/states.hpp"

namespace mrec {

/// Completely positive map in Kraus form. Each Kraus operator maps C^dim_in to
/// the space described by out (first output factor varies slowest).
struct QuantumChannel {
    std::vector<Matrix> kraus;
    int dim_in = 1;
    SystemDims out;
    bool trace_preserving = true;

    long long dim_out() const { return out.total(); }

    Matrix kraus_sum() const {
        Matrix s = Matrix::Zero(dim_in, dim_in);
        for (const Matrix& k : kraus) s += k.adjoint() * k;
        return s;
    }

    void validate(double tol = 1e-8) const {
        for (const Matrix& k : kraus)
            if (k.cols() != dim_in || k.rows() != dim_out())
                fail(ErrorKind::DimMismatch, "channel: Kraus operator has wrong shape");
        Matrix s = kraus_sum();
        if (trace_preserving) {
            if (max_abs(s - Matrix::Identity(dim_in, dim_in)) > tol)
                fail(ErrorKind::NotCP, "channel: Kraus operators are not trace preserving");
        } else if (max_eigenvalue(s) > 1.0 + tol) {
            fail(ErrorKind::NotCP, "channel: Kraus operators increase trace");
        }
    }

    /// Action on an operator of the input space alone.
    Matrix operator()(const Matrix& x) const {
        Matrix y = Matrix::Zero(dim_out(), dim_out());
        for (const Matrix& k : kraus) y += k * x * k.adjoint();
        return y;
    }
};

inline QuantumChannel identity_channel(int d, const std::string& label = "A") {
    return {{Matrix::Identity(d, d)}, d, SystemDims({d}, {label}), true};
}

/// X -> tr(X) I/d.
inline QuantumChannel depolarizing_channel(int d, const std::string& label = "A") {
    QuantumChannel ch{{}, d, SystemDims({d}, {label}), true};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Matrix k = Matrix::Zero(d, d);
            k(i, j) = 1.0 / std::sqrt(static_cast<double>(d));
            ch.kraus.push_back(k);
        }
    return ch;
}

/// Random channel from a Haar isometry C^d_in -> C^d_out ⊗ C^env.
inline QuantumChannel random_channel(int dim_in, const SystemDims& out, int env, Rng rng) {
    const long long dout = out.total();
    Matrix w = haar_isometry(static_cast<int>(dout * env), dim_in, rng);
    QuantumChannel ch{{}, dim_in, out, true};
    for (int j = 0; j < env; ++j) {
        Matrix k(dout, dim_in);
        for (long long o = 0; o < dout; ++o) k.row(o) = w.row(o * env + j);
        ch.kraus.push_back(k);
    }
    return ch;
}

/// (I ⊗ ch)(rho) with ch acting on the subsystem `target`; that subsystem is
/// replaced in place by the channel's output factors.
inline MultipartiteState apply_channel(const QuantumChannel& ch, const Matrix& rho, const SystemDims& dims,
                                       const std::string& target) {
    if (rho.rows() != dims.total() || rho.cols() != dims.total())
        fail(ErrorKind::DimMismatch, "apply_channel: state does not match dims");
    std::size_t pos = dims.index_of(target);
    if (dims.dim(pos) != ch.dim_in) fail(ErrorKind::DimMismatch, "apply_channel: channel input dimension");
    SystemDims out_dims = dims.replaced(target, ch.out.dims(), ch.out.labels());
    Matrix out = Matrix::Zero(out_dims.total(), out_dims.total());
    for (const Matrix& k : ch.kraus) {
        Matrix l = lift_operator(k, dims, pos);
        out += l * rho * l.adjoint();
    }
    return {hermitian_part(out), out_dims, false};
}

inline MultipartiteState apply_channel(const QuantumChannel& ch, const MultipartiteState& s, const std::string& target) {
    MultipartiteState r = apply_channel(ch, s.matrix, s.dims, target);
    r.normalized = s.normalized && ch.trace_preserving;
    return r;
}

struct RotatedPetzParams {
    Matrix U_B;
    Matrix V_BC;
};

/// Rotated Petz map B -> BC for the state rho_BC (dims ordered B, C):
///   X -> V rho_BC^{1/2} (rho_B^{-1/2} U X U^† rho_B^{-1/2} ⊗ id_C) rho_BC^{1/2} V^†
/// on supp(U^† rho_B U); the kernel is sent to rho_BC / tr(rho_BC).
inline QuantumChannel rotated_petz_map(const Matrix& rho_bc, const SystemDims& dims_bc, const Matrix& u_b,
                                       const Matrix& v_bc) {
    if (dims_bc.size() != 2) fail(ErrorKind::DimMismatch, "rotated_petz_map: expected B, C dims");
    if (rho_bc.rows() != dims_bc.total()) fail(ErrorKind::DimMismatch, "rotated_petz_map: state size");
    const int db = dims_bc.dim(0);
    const int dc = dims_bc.dim(1);
    const int dbc = db * dc;
    if (u_b.rows() != db || v_bc.rows() != dbc)
        fail(ErrorKind::DimMismatch, "rotated_petz_map: unitary size");
    if (!is_unitary(u_b) || !is_unitary(v_bc))
        fail(ErrorKind::NonUnitaryParams, "rotated_petz_map: parameters are not unitary");
    SpectralDecomposition ebc = detail::nonnegative_eig(rho_bc, "rotated_petz_map");
    double tr = ebc.eigenvalues.sum();
    if (!(tr > 0.0)) fail(ErrorKind::InvalidState, "rotated_petz_map: state is zero");
    Matrix sqrt_bc = matrix_function(ebc, [](double x) { return std::sqrt(x); }, Domain::NonNegative);
    Matrix rho_b = partial_trace(rho_bc, dims_bc, {dims_bc.label(0)});
    SpectralDecomposition eb = detail::nonnegative_eig(rho_b, "rotated_petz_map");
    Matrix inv_sqrt_b = matrix_function(eb, [](double x) { return 1.0 / std::sqrt(x); }, Domain::Support);
    Matrix kernel = Matrix::Identity(db, db) -
                    matrix_function(eb, [](double) { return 1.0; }, Domain::Support);

    QuantumChannel ch{{}, db, dims_bc, true};
    Matrix left = v_bc * sqrt_bc;
    Matrix right = inv_sqrt_b * u_b;
    for (int c = 0; c < dc; ++c) {
        // (right ⊗ |c>) : B -> BC
        Matrix emb = Matrix::Zero(dbc, db);
        for (int i = 0; i < db; ++i)
            for (int j = 0; j < db; ++j) emb(i * dc + c, j) = right(i, j);
        ch.kraus.push_back(left * emb);
    }
    Matrix q = u_b.adjoint() * kernel * u_b;
    if (real_trace(q) > 0.5) {
        SpectralDecomposition eq = hermitian_eig(q);
        const double wmax = ebc.max_eigenvalue();
        for (Eigen::Index k = 0; k < eq.eigenvalues.size(); ++k) {
            if (eq.eigenvalues(k) < 0.5) continue;
            for (Eigen::Index j = 0; j < ebc.eigenvalues.size(); ++j) {
                if (ebc.eigenvalues(j) <= kSupportCutoff * wmax) continue;
                ch.kraus.push_back(std::sqrt(ebc.eigenvalues(j) / tr) * ebc.eigenvectors.col(j) *
                                   eq.eigenvectors.col(k).adjoint());
            }
        }
    }
    return ch;
}

inline QuantumChannel petz_map(const Matrix& rho_bc, const SystemDims& dims_bc) {
    const int db = dims_bc.dim(0);
    const long long dbc = dims_bc.total();
    return rotated_petz_map(rho_bc, dims_bc, Matrix::Identity(db, db), Matrix::Identity(dbc, dbc));
}

/// Channel B -> BC for the tripartite state rho_ABC (ordered A, B, C).
inline QuantumChannel rotated_petz_for(const MultipartiteState& rho_abc, const RotatedPetzParams& p) {
    if (rho_abc.dims.size() != 3) fail(ErrorKind::DimMismatch, "recovery: expected a tripartite state");
    const auto& l = rho_abc.dims.labels();
    MultipartiteState bc = rho_abc.marginal({l[1], l[2]});
    return rotated_petz_map(bc.matrix, bc.dims, p.U_B, p.V_BC);
}

/// sigma_ABC = (I_A ⊗ ch)(rho_AB).
inline MultipartiteState recovered_state(const MultipartiteState& rho_abc, const QuantumChannel& ch) {
    if (rho_abc.dims.size() != 3) fail(ErrorKind::DimMismatch, "recovery: expected a tripartite state");
    const auto& l = rho_abc.dims.labels();
    MultipartiteState ab = rho_abc.marginal({l[0], l[1]});
    MultipartiteState s = apply_channel(ch, ab, l[1]);
    if (!(s.dims == rho_abc.dims)) fail(ErrorKind::DimMismatch, "recovery: channel output does not match B, C");
    return s;
}

inline double recovery_fidelity(const MultipartiteState& rho_abc, const QuantumChannel& ch) {
    return fidelity(rho_abc.matrix, recovered_state(rho_abc, ch).matrix);
}

// ---- optimizer ----

struct RecoveryCertificate {
    double cmi_bits = 0.0;
    double target_fidelity = 1.0;
    double achieved_fidelity = 0.0;
    double slack = 0.0;
    int restarts = 0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const {
        return {{"cmi_bits", cmi_bits}, {"target_fidelity", target_fidelity},
                {"achieved_fidelity", achieved_fidelity}, {"slack", slack},
                {"restarts", restarts}, {"seed", seed}};
    }
};

struct RecoveryResult {
    RotatedPetzParams params;
    double achieved_fidelity = 0.0;
    double petz_fidelity = 0.0;
    RecoveryCertificate certificate;
};

namespace detail {

/// Hermitian basis element k of d x d matrices (d^2 elements, orthonormal under
/// the Hilbert-Schmidt inner product up to scaling).
inline Matrix hermitian_basis(int d, int k) {
    Matrix h = Matrix::Zero(d, d);
    if (k < d) {
        h(k, k) = 1.0;
        return h;
    }
    k -= d;
    int pair = k / 2;
    bool imag = k % 2;
    int i = 0, j = 1, count = 0;
    for (i = 0; i < d; ++i) {
        bool found = false;
        for (j = i + 1; j < d; ++j) {
            if (count++ == pair) {
                found = true;
                break;
            }
        }
        if (found) break;
    }
    const double s = 1.0 / std::sqrt(2.0);
    if (imag) {
        h(i, j) = Complex(0.0, -s);
        h(j, i) = Complex(0.0, s);
    } else {
        h(i, j) = s;
        h(j, i) = s;
    }
    return h;
}

/// Fidelity of recovery as a function of (U_B, V_BC), with everything that does
/// not depend on the unitaries precomputed.
class RecoveryObjective {
public:
    explicit RecoveryObjective(const MultipartiteState& rho) : dims_(rho.dims) {
        if (dims_.size() != 3) fail(ErrorKind::DimMismatch, "optimize_recovery: expected a tripartite state");
        da_ = dims_.dim(0);
        db_ = dims_.dim(1);
        dc_ = dims_.dim(2);
        const auto& l = dims_.labels();
        rho_ab_ = partial_trace(rho.matrix, dims_, {l[0], l[1]});
        Matrix rho_bc = partial_trace(rho.matrix, dims_, {l[1], l[2]});
        Matrix rho_b = partial_trace(rho.matrix, dims_, {l[1]});
        sqrt_rho_ = sqrtm(rho.matrix);
        sqrt_bc_ = sqrtm(rho_bc);
        inv_sqrt_b_ = inv_sqrtm(rho_b);
        SpectralDecomposition eb = hermitian_eig(rho_b);
        kernel_b_ = Matrix::Identity(db_, db_) - matrix_function(eb, [](double) { return 1.0; }, Domain::Support);
        has_kernel_ = real_trace(kernel_b_) > 0.5;
        omega_ = rho_bc / real_trace(rho_bc);
        id_a_ = Matrix::Identity(da_, da_);
        id_c_ = Matrix::Identity(dc_, dc_);
        sqrt_bc_a_ = kron(id_a_, sqrt_bc_);
    }

    int db() const { return db_; }
    int dbc() const { return db_ * dc_; }

    /// The U-dependent factor (I ⊗ rho_B^{-1/2} U) rho_AB (...)^† ⊗ id_C, plus the
    /// kernel completion term when rho_B is singular.
    struct Inner {
        Matrix m;
        Matrix completion;
    };

    Inner inner(const Matrix& u) const {
        Matrix y = kron(id_a_, inv_sqrt_b_ * u);
        Inner in{kron(y * rho_ab_ * y.adjoint(), id_c_), Matrix()};
        if (has_kernel_) {
            Matrix q = kron(id_a_, u.adjoint() * kernel_b_ * u);
            in.completion = kron(partial_trace_b(q * rho_ab_), omega_);
        }
        return in;
    }

    /// The V-dependent factor (I ⊗ V rho_BC^{1/2}).
    Matrix outer_factor(const Matrix& v) const { return kron(id_a_, v) * sqrt_bc_a_; }

    Matrix sigma(const Matrix& u, const Matrix& v) const {
        Inner in = inner(u);
        Matrix w = outer_factor(v);
        Matrix s = w * in.m * w.adjoint();
        if (has_kernel_) s += in.completion;
        return s;
    }

    double value(const Inner& in, const Matrix& w) const {
        Matrix left = sqrt_rho_ * w;
        Matrix m = left * in.m * left.adjoint();
        if (has_kernel_) m += sqrt_rho_ * in.completion * sqrt_rho_;
        m = (m + m.adjoint()).eval() * 0.5;
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        double f = 0.0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()(i) > 0.0) f += std::sqrt(es.eigenvalues()(i));
        return f;
    }

    double operator()(const Matrix& u, const Matrix& v) const { return value(inner(u), outer_factor(v)); }

private:
    Matrix partial_trace_b(const Matrix& x) const {
        Matrix out = Matrix::Zero(da_, da_);
        for (int i = 0; i < da_; ++i)
            for (int j = 0; j < da_; ++j)
                for (int b = 0; b < db_; ++b) out(i, j) += x(i * db_ + b, j * db_ + b);
        return out;
    }

    SystemDims dims_;
    int da_ = 1, db_ = 1, dc_ = 1;
    Matrix rho_ab_, sqrt_rho_, sqrt_bc_, inv_sqrt_b_, kernel_b_, omega_, id_a_, id_c_, sqrt_bc_a_;
    bool has_kernel_ = false;
};

/// exp(i theta B_k) x for the basis element B_k, applied as a row operation.
inline Matrix rotate_rows(int d, int k, double theta, const Matrix& x) {
    Matrix out = x;
    if (k < d) {
        out.row(k) *= std::polar(1.0, theta);
        return out;
    }
    int pair = (k - d) / 2;
    bool imag = (k - d) % 2;
    int i = 0, j = 0, count = 0;
    for (int a = 0; a < d && !j; ++a)
        for (int b = a + 1; b < d; ++b)
            if (count++ == pair) {
                i = a;
                j = b;
                break;
            }
    // B_k = s X with X^2 the projector onto span{i, j}
    const double s = 1.0 / std::sqrt(2.0);
    const double c = std::cos(theta * s), sn = std::sin(theta * s);
    Complex xij = imag ? Complex(0.0, -1.0) : Complex(1.0, 0.0);
    Complex xji = std::conj(xij);
    const Complex ii(0.0, 1.0);
    out.row(i) = c * x.row(i) + ii * sn * xij * x.row(j);
    out.row(j) = c * x.row(j) + ii * sn * xji * x.row(i);
    return out;
}

struct AscentResult {
    Matrix u, v;
    double value = 0.0;
    int iterations = 0;
};

/// Local ascent on U = exp(iH_U) U0, V = exp(iH_V) V0 with central-difference
/// gradients and a backtracking step; the base point is re-centred each iteration.
inline AscentResult local_ascent(const RecoveryObjective& f, Matrix u, Matrix v, int iterations) {
    const int db = f.db(), dbc = f.dbc();
    const int nu = db * db;
    const int nv = dbc * dbc;
    std::vector<Matrix> basis_u, basis_v;
    for (int k = 0; k < nu; ++k) basis_u.push_back(hermitian_basis(db, k));
    for (int k = 0; k < nv; ++k) basis_v.push_back(hermitian_basis(dbc, k));
    const double h = 1e-5;
    RecoveryObjective::Inner in = f.inner(u);
    Matrix w = f.outer_factor(v);
    double current = f.value(in, w);
    double step = 0.1;
    AscentResult res;
    int it = 0;
    for (; it < iterations; ++it) {
        Matrix gu = Matrix::Zero(db, db);
        Matrix gv = Matrix::Zero(dbc, dbc);
        for (int k = 0; k < nu; ++k) {
            double plus = f.value(f.inner(rotate_rows(db, k, h, u)), w);
            double minus = f.value(f.inner(rotate_rows(db, k, -h, u)), w);
            gu += ((plus - minus) / (2.0 * h)) * basis_u[k];
        }
        for (int k = 0; k < nv; ++k) {
            double plus = f.value(in, f.outer_factor(rotate_rows(dbc, k, h, v)));
            double minus = f.value(in, f.outer_factor(rotate_rows(dbc, k, -h, v)));
            gv += ((plus - minus) / (2.0 * h)) * basis_v[k];
        }
        double gnorm = std::sqrt(gu.squaredNorm() + gv.squaredNorm());
        if (gnorm < 1e-12) break;
        bool improved = false;
        double next = current;
        Matrix u_next, v_next;
        RecoveryObjective::Inner in_next;
        Matrix w_next;
        for (int tries = 0; tries < 40; ++tries) {
            u_next = exp_i_hermitian(step * gu) * u;
            v_next = exp_i_hermitian(step * gv) * v;
            in_next = f.inner(u_next);
            w_next = f.outer_factor(v_next);
            next = f.value(in_next, w_next);
            if (next > current) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
        double gain = next - current;
        u = u_next;
        v = v_next;
        in = in_next;
        w = w_next;
        current = next;
        step *= 2.0;
        if (gain < 1e-9) {
            ++it;
            break;
        }
    }
    res.u = u;
    res.v = v;
    res.value = current;
    res.iterations = it;
    return res;
}

} // namespace detail

/// Searches rotated Petz maps for the largest fidelity of recovery. Restart 0
/// starts from the plain Petz map (U = V = I); the others from Haar unitaries
/// drawn from independent splits of the seed.
inline RecoveryResult optimize_recovery(const MultipartiteState& rho_abc, int restarts, int iterations,
                                        std::uint64_t seed) {
    if (restarts < 1) fail(ErrorKind::BudgetZero, "optimize_recovery: at least one restart is required");
    if (iterations < 0) fail(ErrorKind::BudgetZero, "optimize_recovery: negative iteration budget");
    detail::RecoveryObjective f(rho_abc);
    const int db = f.db(), dbc = f.dbc();
    Rng root(seed);
    RecoveryResult best;
    best.achieved_fidelity = -1.0;
    for (int r = 0; r < restarts; ++r) {
        Matrix u0 = Matrix::Identity(db, db), v0 = Matrix::Identity(dbc, dbc);
        if (r > 0) {
            Rng rng = root.split(static_cast<std::uint64_t>(r));
            u0 = haar_unitary(db, rng);
            v0 = haar_unitary(dbc, rng);
        }
        if (r == 0) best.petz_fidelity = f(u0, v0);
        detail::AscentResult a = detail::local_ascent(f, u0, v0, iterations);
        if (a.value > best.achieved_fidelity) {
            best.achieved_fidelity = a.value;
            best.params = {a.u, a.v};
        }
    }
    double i = cmi(rho_abc).cmi;
    best.certificate.cmi_bits = i;
    best.certificate.target_fidelity = std::pow(2.0, -0.5 * i);
    best.certificate.achieved_fidelity = best.achieved_fidelity;
    best.certificate.slack = best.achieved_fidelity - best.certificate.target_fidelity;
    best.certificate.restarts = restarts;
    best.certificate.seed = seed;
    return best;
}

// ---- Choi representation ----

/// Normalized Choi operator (1/d_in) Σ_ij |i><j| ⊗ ch(|i><j|), input factor first.
inline Matrix choi(const QuantumChannel& ch) {
    const int din = ch.dim_in;
    const long long dout = ch.dim_out();
    Matrix j = Matrix::Zero(din * dout, din * dout);
    for (int a = 0; a < din; ++a)
        for (int b = 0; b < din; ++b) {
            Matrix e = Matrix::Zero(din, din);
            e(a, b) = 1.0;
            j.block(a * dout, b * dout, dout, dout) = ch(e) / static_cast<double>(din);
        }
    return j;
}

/// Inverse of choi(): Kraus operators from the eigendecomposition, dropping
/// eigenvalues below 1e-12 of the largest.
inline QuantumChannel channel_from_choi(const Matrix& j, int dim_in, const SystemDims& out,
                                        bool trace_preserving = true) {
    const long long dout = out.total();
    if (j.rows() != dim_in * dout) fail(ErrorKind::DimMismatch, "channel_from_choi: size mismatch");
    SpectralDecomposition e = hermitian_eig(j);
    const double mx = std::max(e.max_eigenvalue(), 0.0);
    if (e.min_eigenvalue() < -1e-9 * std::max(mx, 1e-300))
        fail(ErrorKind::NotCP, "channel_from_choi: Choi operator has a negative eigenvalue");
    QuantumChannel ch{{}, dim_in, out, trace_preserving};
    for (Eigen::Index k = 0; k < e.eigenvalues.size(); ++k) {
        if (e.eigenvalues(k) <= 1e-12 * mx) continue;
        double s = std::sqrt(dim_in * e.eigenvalues(k));
        Matrix kr(dout, dim_in);
        for (int i = 0; i < dim_in; ++i)
            for (long long o = 0; o < dout; ++o) kr(o, i) = s * e.eigenvectors(i * dout + o, k);
        ch.kraus.push_back(kr);
    }
    return ch;
}

} // namespace mrec
