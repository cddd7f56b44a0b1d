#include "catsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace catsim::fock {

namespace {

constexpr int max_cutoff = 1024;
constexpr double truncation_tolerance = 1e-8;

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double binomial(int n, int k) { return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k)); }

cplx i_power(int p) {
    switch (p % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

double real_power(double x, int p) { return p == 0 ? 1.0 : std::pow(x, p); }

std::size_t dim_product(const std::vector<int> &dims) {
    std::size_t p = 1;
    for (int d : dims) p *= static_cast<std::size_t>(d);
    return p;
}

std::vector<std::size_t> strides(const std::vector<int> &dims) {
    std::vector<std::size_t> s(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * static_cast<std::size_t>(dims[k]);
    return s;
}

struct SparseColumns {
    // entries[n] = list of (row, value) with nonzero value
    std::vector<std::vector<std::pair<int, cplx>>> entries;
};

SparseColumns sparsify(const Eigen::MatrixXcd &op) {
    SparseColumns sc;
    sc.entries.resize(static_cast<std::size_t>(op.cols()));
    for (Eigen::Index c = 0; c < op.cols(); ++c)
        for (Eigen::Index r = 0; r < op.rows(); ++r)
            if (op(r, c) != 0.0) sc.entries[static_cast<std::size_t>(c)].emplace_back(static_cast<int>(r), op(r, c));
    return sc;
}

Eigen::VectorXcd basis(int dim, int n) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(n) = 1.0;
    return v;
}

Eigen::VectorXcd kron(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b) {
    Eigen::VectorXcd out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

void check_truncation(double before, double after, const char *op) {
    if (before - after > truncation_tolerance * before)
        throw TruncationError(std::string(op) + ": truncation lost " + std::to_string((before - after) / before) +
                              " of the norm");
}

// Eigen-decomposition W = L L^dagger of a Hermitian positive semidefinite matrix.
Eigen::MatrixXcd psd_factor(const Eigen::MatrixXcd &w) {
    Eigen::MatrixXcd h = (w + w.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal();
}

} // namespace

// ---------------------------------------------------------------- cutoffs

int derive_cutoff(double mean_photons, const FockCutoffPolicy &policy) {
    if (policy.explicit_cutoff) {
        if (*policy.explicit_cutoff > max_cutoff) throw ResourceError("explicit cutoff exceeds 1024");
        return std::max(*policy.explicit_cutoff, 0);
    }
    if (mean_photons < 0.0) throw DomainError("negative mean photon number");
    if (mean_photons == 0.0) return 4;
    // Poisson terms via logs; the tail beyond n is 1 - cumulative, summed
    // directly from the terms after n to avoid cancellation.
    auto term = [&](int k) { return std::exp(-mean_photons + k * std::log(mean_photons) - log_factorial(k)); };
    for (int n = 4; n <= max_cutoff; ++n) {
        if (n < mean_photons) continue;
        double tail = 0.0;
        for (int k = n + 1; k <= n + 400; ++k) {
            const double t = term(k);
            tail += t;
            if (t < 1e-18 * std::max(tail, 1e-300)) break;
        }
        if (tail <= policy.tail_tolerance) return n;
    }
    throw ResourceError("Fock cutoff would exceed 1024");
}

Eigen::VectorXcd coherent_vector(cplx alpha, int dim) {
    if (dim < 1) throw DomainError("coherent_vector: dimension must be positive");
    Eigen::VectorXcd v(dim);
    const double a2 = std::norm(alpha);
    for (int n = 0; n < dim; ++n) {
        // e^{-|a|^2/2} a^n / sqrt(n!)
        const double mag = std::exp(-a2 / 2.0 + (n == 0 ? 0.0 : n * std::log(std::abs(alpha))) - 0.5 * log_factorial(n));
        v(n) = (alpha == 0.0 ? (n == 0 ? 1.0 : 0.0) : mag) * std::polar(1.0, n * std::arg(alpha));
    }
    return v / v.norm();
}

Eigen::VectorXcd coherent_vector(cplx alpha, const FockCutoffPolicy &policy) {
    if (std::norm(alpha) > 36.0) throw DomainError("coherent_vector: |alpha|^2 above 36");
    return coherent_vector(alpha, derive_cutoff(std::norm(alpha), policy) + 1);
}

double captured_weight(cplx alpha, int dim) {
    const double a2 = std::norm(alpha);
    double w = 0.0;
    for (int n = 0; n < dim; ++n)
        w += a2 == 0.0 ? (n == 0 ? 1.0 : 0.0) : std::exp(-a2 + n * std::log(a2) - log_factorial(n));
    return w;
}

// ---------------------------------------------------------------- matrices

Eigen::MatrixXcd beamsplitter_matrix(int d1, int d2, double transmittance) {
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) throw DomainError("transmittance outside [0,1]");
    const double t = transmittance, r = 1.0 - transmittance;
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(d1 * d2, d1 * d2);
    for (int n1 = 0; n1 < d1; ++n1) {
        for (int n2 = 0; n2 < d2; ++n2) {
            const int total = n1 + n2;
            // a1^dag -> sqrt(t) a1^dag + i sqrt(r) a2^dag,  a2^dag -> i sqrt(r) a1^dag + sqrt(t) a2^dag
            for (int k = 0; k <= n1; ++k) {
                for (int l = 0; l <= n2; ++l) {
                    const int m1 = k + l, m2 = total - m1;
                    if (m1 >= d1 || m2 >= d2) continue;
                    const int ts_pow = k + (n2 - l), ir_pow = (n1 - k) + l;
                    const double mag = binomial(n1, k) * binomial(n2, l) * real_power(std::sqrt(t), ts_pow) *
                                       real_power(std::sqrt(r), ir_pow) *
                                       std::exp(0.5 * (log_factorial(m1) + log_factorial(m2) - log_factorial(n1) -
                                                       log_factorial(n2)));
                    U(m1 * d2 + m2, n1 * d2 + n2) += mag * i_power(ir_pow);
                }
            }
        }
    }
    return U;
}

Eigen::MatrixXcd kerr_matrix(int d1, int d2) {
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(d1 * d2, d1 * d2);
    for (int n1 = 0; n1 < d1; ++n1)
        for (int n2 = 0; n2 < d2; ++n2) U(n1 * d2 + n2, n1 * d2 + n2) = (n1 * n2) % 2 == 0 ? 1.0 : -1.0;
    return U;
}

// ---------------------------------------------------------------- FockDensity

FockDensity::FockDensity(std::vector<int> mode_dims, Eigen::MatrixXcd data) : dims_(std::move(mode_dims)), data_(std::move(data)) {
    const auto d = static_cast<Eigen::Index>(dim_product(dims_));
    if (data_.rows() != d || data_.cols() != d) throw StructuralError("FockDensity: dimension mismatch");
}

FockDensity FockDensity::pure(std::vector<int> mode_dims, const Eigen::VectorXcd &psi) {
    return FockDensity(std::move(mode_dims), psi * psi.adjoint());
}

void FockDensity::validate() const {
    if ((data_ - data_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("density not Hermitian");
    if (std::abs(data_.trace().real() - 1.0) > 1e-10) throw DomainError("density trace differs from 1");
    Eigen::MatrixXcd h = (data_ + data_.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw DomainError("density has a negative eigenvalue");
}

double FockDensity::purity() const { return (data_ * data_).trace().real(); }

FockDensity partial_trace(const FockDensity &rho, const std::vector<std::size_t> &keep) {
    const auto &dims = rho.mode_dims();
    if (keep.empty()) throw StructuralError("partial_trace: nothing kept");
    std::vector<int> kdims;
    for (auto k : keep) {
        if (k >= dims.size()) throw StructuralError("partial_trace: mode index out of range");
        kdims.push_back(dims[k]);
    }
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (std::find(keep.begin(), keep.end(), k) == keep.end()) rest.push_back(k);
    std::vector<int> rdims;
    for (auto k : rest) rdims.push_back(dims[k]);

    const auto st = strides(dims);
    const std::size_t dk = dim_product(kdims), dr = dim_product(rdims);
    const auto kst = strides(kdims), rst = strides(rdims);
    // full index from (kept index, rest index)
    std::vector<std::size_t> kfull(dk), rfull(dr);
    for (std::size_t a = 0; a < dk; ++a) {
        std::size_t idx = 0;
        for (std::size_t q = 0; q < keep.size(); ++q) idx += ((a / kst[q]) % kdims[q]) * st[keep[q]];
        kfull[a] = idx;
    }
    for (std::size_t b = 0; b < dr; ++b) {
        std::size_t idx = 0;
        for (std::size_t q = 0; q < rest.size(); ++q) idx += ((b / rst[q]) % rdims[q]) * st[rest[q]];
        rfull[b] = idx;
    }
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t a2 = 0; a2 < dk; ++a2) {
            cplx s = 0.0;
            for (std::size_t b = 0; b < dr; ++b)
                s += rho.data()(static_cast<Eigen::Index>(kfull[a] + rfull[b]), static_cast<Eigen::Index>(kfull[a2] + rfull[b]));
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a2)) = s;
        }
    return FockDensity(kdims, out);
}

double entropy_of_eigenvalues(const Eigen::VectorXd &eigenvalues) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const double p = eigenvalues(i);
        if (p >= 1e-14) s -= p * std::log(p);
    }
    return s;
}

double entropy(const FockDensity &rho) {
    Eigen::MatrixXcd h = (rho.data() + rho.data().adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw DomainError("entropy: density is not positive");
    return entropy_of_eigenvalues(es.eigenvalues());
}

FockDensity loss_channel(const FockDensity &rho, std::size_t mode, double R) {
    if (!(R >= 0.0 && R <= 1.0)) throw DomainError("loss reflectivity R outside [0,1]");
    const auto &dims = rho.mode_dims();
    if (mode >= dims.size()) throw StructuralError("loss_channel: mode index out of range");
    const int d = dims[mode];
    const Eigen::MatrixXcd bs = beamsplitter_matrix(d, d, 1.0 - R);
    const auto st = strides(dims);
    const auto D = static_cast<Eigen::Index>(dim_product(dims));
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(D, D);
    for (int j = 0; j < d; ++j) {
        // Kraus operator <j|_anc U |0>_anc on the mode, identity elsewhere
        Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(D, D);
        for (Eigen::Index i = 0; i < D; ++i) {
            const int n = static_cast<int>((static_cast<std::size_t>(i) / st[mode]) % d);
            const Eigen::Index base = i - static_cast<Eigen::Index>(n * st[mode]);
            for (int m = 0; m < d; ++m) {
                const cplx a = bs(m * d + j, n * d + 0);
                if (a != 0.0) K(base + static_cast<Eigen::Index>(m * st[mode]), i) += a;
            }
        }
        out += K * rho.data() * K.adjoint();
    }
    return FockDensity(dims, out);
}

// ---------------------------------------------------------------- FockState

FockState::FockState(std::vector<int> labels, std::vector<int> dims, std::vector<Eigen::VectorXcd> members)
    : labels_(std::move(labels)), dims_(std::move(dims)), members_(std::move(members)) {
    if (labels_.size() != dims_.size()) throw StructuralError("FockState: labels and dims differ in length");
    const std::size_t d = dim_product(dims_);
    if (d > max_dimension) throw ResourceError("FockState dimension " + std::to_string(d) + " exceeds oracle limit");
    for (const auto &m : members_)
        if (static_cast<std::size_t>(m.size()) != d) throw StructuralError("FockState: member dimension mismatch");
}

FockState FockState::product(const std::vector<int> &labels, const std::vector<Eigen::VectorXcd> &factors) {
    if (labels.size() != factors.size() || labels.empty()) throw StructuralError("FockState::product: bad factors");
    std::vector<int> dims;
    std::size_t total = 1;
    for (const auto &f : factors) {
        dims.push_back(static_cast<int>(f.size()));
        total *= static_cast<std::size_t>(f.size());
    }
    if (total > max_dimension) throw ResourceError("FockState dimension exceeds oracle limit");
    Eigen::VectorXcd v = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) v = kron(v, factors[k]);
    return FockState(labels, dims, {v});
}

std::size_t FockState::dimension() const { return dim_product(dims_); }

bool FockState::has(int label) const { return std::find(labels_.begin(), labels_.end(), label) != labels_.end(); }

std::size_t FockState::position(int label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw StructuralError("register " + std::to_string(label) + " not in Fock state");
    return static_cast<std::size_t>(it - labels_.begin());
}

double FockState::trace() const {
    double t = 0.0;
    for (const auto &m : members_) t += m.squaredNorm();
    return t;
}

FockState FockState::normalized() const {
    const double t = trace();
    if (!(t > 0.0)) throw ConsistencyError("cannot normalize a Fock state of zero trace");
    auto out = members_;
    for (auto &m : out) m /= std::sqrt(t);
    return FockState(labels_, dims_, std::move(out));
}

FockState FockState::compressed() const {
    if (members_.size() <= 1) return *this;
    const auto k = static_cast<Eigen::Index>(members_.size());
    Eigen::MatrixXcd G(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i; j < k; ++j) {
            G(i, j) = members_[static_cast<std::size_t>(i)].dot(members_[static_cast<std::size_t>(j)]);
            G(j, i) = std::conj(G(i, j));
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    const double t = G.trace().real();
    std::vector<Eigen::VectorXcd> out;
    for (Eigen::Index m = k; m-- > 0;) {
        if (es.eigenvalues()(m) <= 1e-12 * t) continue;
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension()));
        for (Eigen::Index i = 0; i < k; ++i) w += es.eigenvectors()(i, m) * members_[static_cast<std::size_t>(i)];
        out.push_back(std::move(w));
    }
    return FockState(labels_, dims_, std::move(out));
}

FockState FockState::with_register(int label, const Eigen::VectorXcd &factor) const {
    if (has(label)) throw StructuralError("register " + std::to_string(label) + " already present");
    auto labels = labels_;
    auto dims = dims_;
    labels.push_back(label);
    dims.push_back(static_cast<int>(factor.size()));
    if (dim_product(dims) > max_dimension) throw ResourceError("FockState dimension exceeds oracle limit");
    std::vector<Eigen::VectorXcd> out;
    for (const auto &m : members_) out.push_back(kron(m, factor));
    return FockState(std::move(labels), std::move(dims), std::move(out));
}

FockState FockState::apply_two(int l1, int l2, const Eigen::MatrixXcd &op) const {
    const auto p1 = position(l1), p2 = position(l2);
    if (p1 == p2) throw StructuralError("two-register operator needs distinct registers");
    const int d1 = dims_[p1], d2 = dims_[p2];
    if (op.rows() != d1 * d2 || op.cols() != d1 * d2) throw StructuralError("two-register operator has wrong size");
    const auto st = strides(dims_);
    const auto cols = sparsify(op);
    std::vector<Eigen::VectorXcd> out;
    for (const auto &v : members_) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const cplx x = v(i);
            if (x == 0.0) continue;
            const auto ui = static_cast<std::size_t>(i);
            const int n1 = static_cast<int>((ui / st[p1]) % d1), n2 = static_cast<int>((ui / st[p2]) % d2);
            const std::size_t base = ui - n1 * st[p1] - n2 * st[p2];
            for (const auto &[row, a] : cols.entries[static_cast<std::size_t>(n1 * d2 + n2)]) {
                const int m1 = row / d2, m2 = row % d2;
                w(static_cast<Eigen::Index>(base + m1 * st[p1] + m2 * st[p2])) += a * x;
            }
        }
        out.push_back(std::move(w));
    }
    return FockState(labels_, dims_, std::move(out));
}

FockState FockState::apply_one(int l, const Eigen::MatrixXcd &op) const {
    const auto p = position(l);
    const int d = dims_[p];
    if (op.rows() != d || op.cols() != d) throw StructuralError("single-register operator has wrong size");
    const auto st = strides(dims_);
    const auto cols = sparsify(op);
    std::vector<Eigen::VectorXcd> out;
    for (const auto &v : members_) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const cplx x = v(i);
            if (x == 0.0) continue;
            const auto ui = static_cast<std::size_t>(i);
            const int n = static_cast<int>((ui / st[p]) % d);
            const std::size_t base = ui - n * st[p];
            for (const auto &[row, a] : cols.entries[static_cast<std::size_t>(n)])
                w(static_cast<Eigen::Index>(base + row * st[p])) += a * x;
        }
        out.push_back(std::move(w));
    }
    return FockState(labels_, dims_, std::move(out));
}

FockState FockState::traced(int label) const {
    const auto p = position(label);
    if (labels_.size() < 2) throw StructuralError("cannot trace the last register");
    const int d = dims_[p];
    const auto st = strides(dims_);
    auto labels = labels_;
    auto dims = dims_;
    labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(p));
    dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(p));
    const std::size_t reduced_dim = dim_product(dims);
    const double t = trace();
    std::vector<Eigen::VectorXcd> out;
    for (const auto &v : members_) {
        for (int n = 0; n < d; ++n) {
            Eigen::VectorXcd w(static_cast<Eigen::Index>(reduced_dim));
            // index = hi * (d * st[p]) + n * st[p] + lo
            const std::size_t block = st[p];
            std::size_t o = 0;
            for (std::size_t hi = 0; hi < reduced_dim / block; ++hi)
                for (std::size_t lo = 0; lo < block; ++lo)
                    w(static_cast<Eigen::Index>(o++)) = v(static_cast<Eigen::Index>(hi * d * block + n * block + lo));
            if (w.squaredNorm() > 1e-30 * t) out.push_back(std::move(w));
        }
    }
    return FockState(std::move(labels), std::move(dims), std::move(out));
}

FockState FockState::relabeled(int from, int to) const {
    if (from == to) return *this;
    if (has(to)) throw StructuralError("relabel target already present");
    auto labels = labels_;
    labels[position(from)] = to;
    return FockState(std::move(labels), dims_, members_);
}

Eigen::VectorXd FockState::spectrum() const {
    const auto k = static_cast<Eigen::Index>(members_.size());
    Eigen::MatrixXcd G(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            G(i, j) = members_[static_cast<std::size_t>(i)].dot(members_[static_cast<std::size_t>(j)]);
    G /= G.trace().real();
    G = (G + G.adjoint()).eval() / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw DomainError("Fock state has a negative eigenvalue");
    return es.eigenvalues().cwiseMax(0.0);
}

FockDensity FockState::reduced(const std::vector<int> &keep) const {
    std::vector<std::size_t> kp;
    std::vector<int> kdims;
    for (int l : keep) {
        kp.push_back(position(l));
        kdims.push_back(dims_[kp.back()]);
    }
    const std::size_t dk = dim_product(kdims);
    if (dk > 4096) throw ResourceError("reduced density too large for a dense matrix");
    const std::size_t total = dimension();
    const std::size_t dr = total / dk;
    const auto st = strides(dims_);
    const auto kst = strides(kdims);
    std::vector<std::size_t> rest;
    for (std::size_t q = 0; q < dims_.size(); ++q)
        if (std::find(kp.begin(), kp.end(), q) == kp.end()) rest.push_back(q);
    std::vector<int> rdims;
    for (auto q : rest) rdims.push_back(dims_[q]);
    const auto rst = strides(rdims);

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    Eigen::MatrixXcd M(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dr));
    for (const auto &v : members_) {
        for (std::size_t i = 0; i < total; ++i) {
            std::size_t a = 0, b = 0;
            for (std::size_t q = 0; q < kp.size(); ++q) a += ((i / st[kp[q]]) % dims_[kp[q]]) * kst[q];
            for (std::size_t q = 0; q < rest.size(); ++q) b += ((i / st[rest[q]]) % dims_[rest[q]]) * rst[q];
            M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v(static_cast<Eigen::Index>(i));
        }
        rho.noalias() += M * M.adjoint();
    }
    rho /= trace();
    return FockDensity(kdims, rho);
}

// ---------------------------------------------------------------- channels

FockState apply_unitary_bs(const FockState &s, ModeId m1, ModeId m2, double transmittance) {
    const int d1 = s.dims()[s.position(label(m1))], d2 = s.dims()[s.position(label(m2))];
    const double before = s.trace();
    auto out = s.apply_two(label(m1), label(m2), beamsplitter_matrix(d1, d2, transmittance));
    check_truncation(before, out.trace(), "apply_unitary_bs");
    return out;
}

FockState apply_unitary_kerr(const FockState &s, ModeId photon_mode, ModeId field_mode) {
    const int d1 = s.dims()[s.position(label(photon_mode))], d2 = s.dims()[s.position(label(field_mode))];
    return s.apply_two(label(photon_mode), label(field_mode), kerr_matrix(d1, d2));
}

FockState apply_phase_shift(const FockState &s, ModeId m, double phi) {
    const int d = s.dims()[s.position(label(m))];
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 0; n < d; ++n) op(n, n) = std::polar(1.0, phi * n);
    return s.apply_one(label(m), op);
}

FockState loss_channel(const FockState &s, ModeId m, double R) {
    if (!(R >= 0.0 && R <= 1.0)) throw DomainError("loss reflectivity R outside [0,1]");
    if (R == 0.0) return s;
    constexpr int ancilla = -1000;
    const auto p = s.position(label(m));
    const int d = s.dims()[p];
    // Size the ancilla from the mean number of photons that can leak out.
    double mean = 0.0;
    {
        const auto st = [&] {
            std::vector<std::size_t> out(s.dims().size(), 1);
            for (std::size_t k = s.dims().size(); k-- > 1;) out[k - 1] = out[k] * static_cast<std::size_t>(s.dims()[k]);
            return out;
        }();
        for (const auto &v : s.members())
            for (Eigen::Index i = 0; i < v.size(); ++i)
                mean += std::norm(v(i)) * static_cast<double>((static_cast<std::size_t>(i) / st[p]) % d);
        mean /= s.trace();
    }
    const int da = std::min(d, derive_cutoff(R * mean, {std::nullopt, 1e-14}) + 1);
    const Eigen::MatrixXcd bs = beamsplitter_matrix(d, da, 1.0 - R);
    const double before = s.trace();
    std::vector<Eigen::VectorXcd> members;
    std::vector<int> labels, dims;
    for (const auto &v : s.members()) {
        FockState one(s.labels(), s.dims(), {v});
        auto coupled = one.with_register(ancilla, basis(da, 0)).apply_two(label(m), ancilla, bs).traced(ancilla);
        labels = coupled.labels();
        dims = coupled.dims();
        for (auto &w : coupled.members()) members.push_back(w);
    }
    FockState out(labels, dims, std::move(members));
    check_truncation(before, out.trace(), "loss_channel");
    return out.compressed();
}

FockState dephasing_channel(const FockState &s, ModeId photon_mode, cplx a) {
    if (std::abs(a) > 1.0 + 1e-15) throw DomainError("environment overlap |a| exceeds 1");
    constexpr int env = -2000;
    const int dp = s.dims()[s.position(label(photon_mode))];
    const double b = std::sqrt(std::max(0.0, 1.0 - std::norm(a)));
    // controlled rotation: photon present -> env |0> becomes a|0> + b|1>
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(dp * 2, dp * 2);
    for (int n = 1; n < dp; ++n) {
        op(n * 2 + 0, n * 2 + 0) = a;
        op(n * 2 + 1, n * 2 + 0) = b;
        op(n * 2 + 0, n * 2 + 1) = -b;
        op(n * 2 + 1, n * 2 + 1) = std::conj(a);
    }
    return s.with_register(env, basis(2, 0)).apply_two(label(photon_mode), env, op).traced(env).compressed();
}

FockProjection project_yes_no(const FockState &s, ModeId m, Outcome outcome) {
    const auto p = s.position(label(m));
    const int d = s.dims()[p];
    Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(d, d);
    if (outcome == Outcome::silent)
        proj(0, 0) = 1.0;
    else
        for (int n = 1; n < d; ++n) proj(n, n) = 1.0;
    const double before = s.trace();
    auto post = s.apply_one(label(m), proj).traced(label(m));
    const double prob = post.members().empty() ? 0.0 : post.trace() / before;
    if (!(prob >= 1e-15))
        throw HeraldImpossible("outcome on mode " + to_string(m) + " has probability " + std::to_string(prob), prob);
    return {post.compressed().normalized(), prob};
}

std::vector<double> yes_no_probabilities(const FockState &s, const std::vector<ModeId> &modes) {
    const std::size_t nm = modes.size();
    std::vector<std::size_t> pos;
    for (ModeId m : modes) pos.push_back(s.position(label(m)));
    std::vector<std::size_t> st(s.dims().size(), 1);
    for (std::size_t k = s.dims().size(); k-- > 1;) st[k - 1] = st[k] * static_cast<std::size_t>(s.dims()[k]);
    std::vector<double> p(std::size_t{1} << nm, 0.0);
    for (const auto &v : s.members()) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double w = std::norm(v(i));
            if (w == 0.0) continue;
            std::size_t idx = 0;
            for (std::size_t q = 0; q < nm; ++q) {
                const auto n = (static_cast<std::size_t>(i) / st[pos[q]]) % static_cast<std::size_t>(s.dims()[pos[q]]);
                idx = (idx << 1) | (n > 0 ? 1u : 0u);
            }
            p[idx] += w;
        }
    }
    const double t = s.trace();
    for (auto &x : p) x /= t;
    return p;
}

// ---------------------------------------------------------------- cross-engine

FockState expand(const BranchState &s, const std::vector<int> &dims) {
    if (dims.size() != s.modes().size()) throw StructuralError("expand: one dimension per mode required");
    std::vector<int> labels;
    for (ModeId m : s.modes()) labels.push_back(label(m));
    const auto &br = s.branches();
    const auto n = static_cast<Eigen::Index>(br.size());
    std::vector<Eigen::VectorXcd> vecs;
    for (const auto &b : br) {
        Eigen::VectorXcd v(1);
        v(0) = 1.0;
        for (std::size_t k = 0; k < b.modes.size(); ++k) {
            Eigen::VectorXcd f = kind_of(b.modes[k]) == ModeKind::field ? coherent_vector(b.slots[k], dims[k])
                                                                         : basis(dims[k], b.occupancy(k));
            v = kron(v, f);
        }
        vecs.push_back(std::move(v));
    }
    // rho = sum_ij W_ij |b_i><b_j| with W_ij = c_i conj(c_j) <env_j|env_i>
    Eigen::MatrixXcd W(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto &bi = br[static_cast<std::size_t>(i)], &bj = br[static_cast<std::size_t>(j)];
            cplx e = 1.0;
            for (std::size_t q = 0; q < bi.env.size(); ++q) e *= env_overlap(bj.env[q], bi.env[q]);
            W(i, j) = bi.coeff * std::conj(bj.coeff) * e;
        }
    const Eigen::MatrixXcd L = psd_factor(W);
    std::vector<Eigen::VectorXcd> members;
    for (Eigen::Index m = 0; m < n; ++m) {
        if (L.col(m).norm() == 0.0) continue;
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(vecs.front().size());
        for (Eigen::Index i = 0; i < n; ++i) w += L(i, m) * vecs[static_cast<std::size_t>(i)];
        members.push_back(std::move(w));
    }
    return FockState(labels, dims, std::move(members));
}

double fidelity(const FockState &a, const FockState &b) {
    if (a.labels() != b.labels() || a.dims() != b.dims()) throw StructuralError("fidelity: register mismatch");
    const auto r = static_cast<Eigen::Index>(a.members().size()), q = static_cast<Eigen::Index>(b.members().size());
    // F = ||V^dagger U||_1^2 / (Tr VV^dagger Tr UU^dagger)
    Eigen::MatrixXcd X(r, q);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < q; ++j)
            X(i, j) = a.members()[static_cast<std::size_t>(i)].dot(b.members()[static_cast<std::size_t>(j)]);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(X);
    const double nuclear = svd.singularValues().sum();
    return nuclear * nuclear / (a.trace() * b.trace());
}

double fidelity_with_branch(const FockState &rho, const BranchState &s) {
    std::vector<int> labels;
    for (ModeId m : s.modes()) labels.push_back(label(m));
    if (labels != rho.labels()) throw StructuralError("fidelity_with_branch: mode mismatch");
    return fidelity(rho, expand(s, rho.dims()));
}

double frobenius_distance(const FockState &a, const FockState &b) {
    if (a.labels() != b.labels() || a.dims() != b.dims()) throw StructuralError("frobenius_distance: register mismatch");
    // rho_a - rho_b = V S V^dagger with V = [a members, b members] and S = diag(1.., -1..);
    // with V = Q R the norm is that of the small matrix R S R^dagger.
    const auto na = static_cast<Eigen::Index>(a.members().size());
    const auto nb = static_cast<Eigen::Index>(b.members().size());
    if (na + nb == 0) return 0.0;
    const auto dim = static_cast<Eigen::Index>(a.dimension());
    Eigen::MatrixXcd V(dim, na + nb);
    for (Eigen::Index k = 0; k < na; ++k) V.col(k) = a.members()[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 0; k < nb; ++k) V.col(na + k) = b.members()[static_cast<std::size_t>(k)];
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(V);
    const Eigen::Index r = std::min(dim, na + nb);
    const Eigen::MatrixXcd R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    Eigen::VectorXd sgn(na + nb);
    sgn.head(na).setOnes();
    sgn.tail(nb).setConstant(-1.0);
    const Eigen::MatrixXcd D = R * sgn.asDiagonal() * R.adjoint();
    return D.norm();
}

} // namespace catsim::fock
