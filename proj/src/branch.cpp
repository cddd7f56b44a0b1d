#include "catsim/branch.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace catsim {

namespace {

constexpr double trace_tolerance = 1e-10;

void check_mode_kind(ModeId m, ModeKind expected, const char *op) {
    if (kind_of(m) != expected)
        throw StructuralError(std::string(op) + ": mode " + to_string(m) + " has the wrong kind");
}

void check_trace_preserved(double before, double after, const char *op) {
    if (std::abs(after - before) > trace_tolerance * std::max(1.0, before))
        throw ConsistencyError(std::string(op) + ": trace changed from " + std::to_string(before) + " to " +
                               std::to_string(after));
}

// <b1|K|b2> for the single-slot yes/no kernel: outcome 0 projects on vacuum,
// outcome 1 on its complement.
cplx slot_kernel(ModeKind kind, cplx x1, cplx x2, int outcome) {
    if (kind == ModeKind::photon) {
        const int n1 = x1.real() > 0.5, n2 = x2.real() > 0.5;
        if (n1 != n2) return 0.0;
        return n1 == outcome ? 1.0 : 0.0;
    }
    const double vac = std::exp(-(std::norm(x1) + std::norm(x2)) / 2.0);
    return outcome == 0 ? cplx(vac) : coherent_overlap(x1, x2) - vac;
}

cplx slot_overlap(ModeKind kind, cplx x1, cplx x2) {
    if (kind == ModeKind::photon) return (x1.real() > 0.5) == (x2.real() > 0.5) ? 1.0 : 0.0;
    return coherent_overlap(x1, x2);
}

cplx env_product(const Branch &b1, const Branch &b2) {
    if (b1.env.size() != b2.env.size()) throw StructuralError("branches carry different environment histories");
    cplx p = 1.0;
    for (std::size_t k = 0; k < b1.env.size(); ++k) {
        p *= env_overlap(b1.env[k], b2.env[k]);
        if (p == 0.0) break;
    }
    return p;
}

BranchState rebuild(const BranchState &s, std::vector<ModeId> modes, std::vector<Branch> branches) {
    return BranchState(std::move(modes), std::move(branches), s.branch_cap());
}

} // namespace

cplx coherent_overlap(cplx beta, cplx gamma) {
    return std::exp(-(std::norm(beta) + std::norm(gamma)) / 2.0 + std::conj(beta) * gamma);
}

cplx env_overlap(const EnvEntry &a, const EnvEntry &b) {
    if (a.kind != b.kind) throw StructuralError("environment entries of different kinds");
    switch (a.kind) {
    case EnvEntry::Kind::coherent:
        return coherent_overlap(a.value, b.value);
    case EnvEntry::Kind::orthogonal:
        return a.tag == b.tag ? 1.0 : 0.0;
    case EnvEntry::Kind::dephasing:
        if (a.tag == b.tag) return 1.0;
        return a.tag == 0 ? a.overlap : std::conj(a.overlap);
    case EnvEntry::Kind::click:
        return coherent_overlap(a.value, b.value) - std::exp(-(std::norm(a.value) + std::norm(b.value)) / 2.0);
    }
    return 0.0;
}

BranchState::BranchState(std::vector<ModeId> modes, std::vector<Branch> branches, std::size_t branch_cap)
    : modes_(std::move(modes)), branches_(std::move(branches)), cap_(branch_cap) {
    for (std::size_t i = 0; i < modes_.size(); ++i)
        for (std::size_t j = i + 1; j < modes_.size(); ++j)
            if (modes_[i] == modes_[j]) throw StructuralError("duplicate mode " + to_string(modes_[i]));
    if (branches_.size() > cap_)
        throw ResourceError("branch count " + std::to_string(branches_.size()) + " exceeds cap " +
                            std::to_string(cap_));
    for (const auto &b : branches_) {
        if (b.modes != modes_ || b.slots.size() != modes_.size())
            throw StructuralError("branch mode set differs from state mode set");
        if (!branches_.empty() && b.env.size() != branches_.front().env.size())
            throw StructuralError("branches carry different environment histories");
    }
}

BranchState BranchState::vacuum(std::vector<ModeId> modes, std::size_t branch_cap) {
    Branch b;
    b.modes = modes;
    b.slots.assign(modes.size(), 0.0);
    return BranchState(std::move(modes), {std::move(b)}, branch_cap);
}

bool BranchState::has_mode(ModeId m) const { return std::find(modes_.begin(), modes_.end(), m) != modes_.end(); }

std::size_t BranchState::slot_of(ModeId m) const {
    auto it = std::find(modes_.begin(), modes_.end(), m);
    if (it == modes_.end()) throw StructuralError("mode " + to_string(m) + " not in state");
    return static_cast<std::size_t>(it - modes_.begin());
}

double BranchState::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        t += std::norm(branches_[i].coeff) * env_product(branches_[i], branches_[i]).real();
        for (std::size_t j = i + 1; j < branches_.size(); ++j)
            t += 2.0 * branch_overlap(branches_[i], branches_[j]).real();
    }
    return t;
}

BranchState BranchState::normalized() const {
    const double t = trace();
    if (!(t > 0.0)) throw ConsistencyError("cannot normalize a state of zero trace");
    auto out = branches_;
    for (auto &b : out) b.coeff /= std::sqrt(t);
    return BranchState(modes_, std::move(out), cap_);
}

BranchState BranchState::with_field(ModeId m, cplx beta) const {
    check_mode_kind(m, ModeKind::field, "with_field");
    const auto k = slot_of(m);
    auto out = branches_;
    for (auto &b : out) b.slots[k] = beta;
    return BranchState(modes_, std::move(out), cap_);
}

BranchState BranchState::with_photon(ModeId m, int occupancy) const {
    check_mode_kind(m, ModeKind::photon, "with_photon");
    if (occupancy != 0 && occupancy != 1) throw UnsupportedInput("photon modes hold 0 or 1 photons");
    const auto k = slot_of(m);
    auto out = branches_;
    for (auto &b : out) b.slots[k] = static_cast<double>(occupancy);
    return BranchState(modes_, std::move(out), cap_);
}

BranchState BranchState::merged() const {
    std::vector<Branch> out;
    out.reserve(branches_.size());
    for (const auto &b : branches_) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const Branch &o) { return o.slots == b.slots && o.env == b.env; });
        if (it == out.end())
            out.push_back(b);
        else
            it->coeff += b.coeff;
    }
    std::erase_if(out, [](const Branch &b) { return b.coeff == 0.0; });
    return BranchState(modes_, std::move(out), cap_);
}

double von_neumann_entropy(const GramSpectrum &spectrum) {
    double s = 0.0;
    for (double p : spectrum.eigenvalues)
        if (p >= 1e-14) s -= p * std::log(p);
    return s;
}

cplx branch_overlap(const Branch &b1, const Branch &b2) {
    if (b1.modes != b2.modes) throw StructuralError("branch_overlap: mismatched mode sets");
    cplx p = std::conj(b1.coeff) * b2.coeff;
    for (std::size_t k = 0; k < b1.modes.size() && p != 0.0; ++k)
        p *= slot_overlap(kind_of(b1.modes[k]), b1.slots[k], b2.slots[k]);
    if (p == 0.0) return p;
    // <env_1|env_2>
    return p * env_product(b1, b2);
}

BranchState apply_beamsplitter(const BranchState &s, ModeId m1, ModeId m2, double transmittance) {
    if (m1 == m2) throw StructuralError("beam splitter needs two distinct modes");
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) throw DomainError("transmittance outside [0,1]");
    if (kind_of(m1) != kind_of(m2)) throw StructuralError("beam splitter mixes a photon mode with a field mode");
    const auto k1 = s.slot_of(m1), k2 = s.slot_of(m2);
    const double t = std::sqrt(transmittance), r = std::sqrt(1.0 - transmittance);
    const cplx ir(0.0, r);

    std::vector<Branch> out;
    out.reserve(2 * s.size());
    if (kind_of(m1) == ModeKind::field) {
        for (auto b : s.branches()) {
            const cplx x = b.slots[k1], y = b.slots[k2];
            b.slots[k1] = t * x + ir * y;
            b.slots[k2] = ir * x + t * y;
            out.push_back(std::move(b));
        }
    } else {
        for (const auto &b : s.branches()) {
            const int n1 = b.occupancy(k1), n2 = b.occupancy(k2);
            if (n1 + n2 == 2) throw UnsupportedInput("two photons on one beam splitter");
            if (n1 + n2 == 0) {
                out.push_back(b);
                continue;
            }
            // The photon leaves through its own port with amplitude t, through
            // the other with amplitude i r.
            Branch same = b, cross = b;
            same.coeff *= t;
            cross.coeff *= ir;
            cross.slots[k1] = static_cast<double>(n2);
            cross.slots[k2] = static_cast<double>(n1);
            if (same.coeff != 0.0) out.push_back(std::move(same));
            if (cross.coeff != 0.0) out.push_back(std::move(cross));
        }
    }
    auto result = rebuild(s, s.modes(), std::move(out));
    check_trace_preserved(s.trace(), result.trace(), "apply_beamsplitter");
    return result;
}

BranchState apply_phase_shift(const BranchState &s, ModeId m, double phi) {
    const auto k = s.slot_of(m);
    const cplx ph = std::polar(1.0, phi);
    auto out = s.branches();
    for (auto &b : out) {
        if (kind_of(m) == ModeKind::field)
            b.slots[k] *= ph;
        else if (b.occupancy(k) == 1)
            b.coeff *= ph;
    }
    return rebuild(s, s.modes(), std::move(out));
}

BranchState apply_cross_kerr(const BranchState &s, ModeId photon_mode, ModeId field_mode) {
    check_mode_kind(photon_mode, ModeKind::photon, "apply_cross_kerr");
    check_mode_kind(field_mode, ModeKind::field, "apply_cross_kerr");
    const auto kp = s.slot_of(photon_mode), kf = s.slot_of(field_mode);
    auto out = s.branches();
    for (auto &b : out)
        if (b.occupancy(kp) == 1) b.slots[kf] = -b.slots[kf];
    return rebuild(s, s.modes(), std::move(out));
}

BranchState apply_loss(const BranchState &s, ModeId m, double R) {
    if (!(R >= 0.0 && R <= 1.0)) throw DomainError("loss reflectivity R outside [0,1]");
    const auto k = s.slot_of(m);
    const double keep = std::sqrt(1.0 - R), tap = std::sqrt(R);
    std::vector<Branch> out;
    out.reserve(2 * s.size());
    if (kind_of(m) == ModeKind::field) {
        for (auto b : s.branches()) {
            const cplx beta = b.slots[k];
            b.slots[k] = keep * beta;
            b.env.push_back(EnvEntry::coherent(cplx(0.0, tap) * beta));
            out.push_back(std::move(b));
        }
    } else {
        for (const auto &b : s.branches()) {
            Branch kept = b;
            kept.env.push_back(EnvEntry::orthogonal(0));
            if (b.occupancy(k) == 0) {
                out.push_back(std::move(kept));
                continue;
            }
            Branch lost = b;
            kept.coeff *= keep;
            lost.coeff *= cplx(0.0, tap);
            lost.slots[k] = 0.0;
            lost.env.push_back(EnvEntry::orthogonal(1));
            if (kept.coeff != 0.0) out.push_back(std::move(kept));
            if (lost.coeff != 0.0) out.push_back(std::move(lost));
        }
    }
    auto result = rebuild(s, s.modes(), std::move(out));
    check_trace_preserved(s.trace(), result.trace(), "apply_loss");
    return result;
}

BranchState apply_env_dephasing(const BranchState &s, ModeId photon_mode, cplx overlap_a) {
    check_mode_kind(photon_mode, ModeKind::photon, "apply_env_dephasing");
    if (std::abs(overlap_a) > 1.0 + 1e-15) throw DomainError("environment overlap |a| exceeds 1");
    const auto k = s.slot_of(photon_mode);
    auto out = s.branches();
    for (auto &b : out) b.env.push_back(EnvEntry::dephasing(b.occupancy(k), overlap_a));
    auto result = rebuild(s, s.modes(), std::move(out));
    check_trace_preserved(s.trace(), result.trace(), "apply_env_dephasing");
    return result;
}

BranchState relabel(const BranchState &s, ModeId from, ModeId to) {
    if (from == to) return s;
    if (kind_of(from) != kind_of(to)) throw StructuralError("relabel changes the mode kind");
    if (s.has_mode(to)) throw StructuralError("relabel target " + to_string(to) + " already present");
    const auto k = s.slot_of(from);
    auto modes = s.modes();
    modes[k] = to;
    auto out = s.branches();
    for (auto &b : out) b.modes = modes;
    return rebuild(s, std::move(modes), std::move(out));
}

BranchState trace_out(const BranchState &s, const std::vector<ModeId> &traced) {
    std::vector<std::size_t> gone;
    for (ModeId m : traced) gone.push_back(s.slot_of(m));
    std::vector<ModeId> modes;
    for (std::size_t k = 0; k < s.modes().size(); ++k)
        if (std::find(gone.begin(), gone.end(), k) == gone.end()) modes.push_back(s.modes()[k]);
    if (modes.empty()) throw StructuralError("trace_out would remove every mode");

    std::vector<Branch> out;
    out.reserve(s.size());
    for (const auto &b : s.branches()) {
        Branch nb;
        nb.coeff = b.coeff;
        nb.modes = modes;
        nb.env = b.env;
        for (std::size_t k : gone)
            nb.env.push_back(kind_of(b.modes[k]) == ModeKind::field ? EnvEntry::coherent(b.slots[k])
                                                                     : EnvEntry::orthogonal(b.occupancy(k)));
        for (std::size_t k = 0; k < b.modes.size(); ++k)
            if (std::find(gone.begin(), gone.end(), k) == gone.end()) nb.slots.push_back(b.slots[k]);
        out.push_back(std::move(nb));
    }
    return rebuild(s, std::move(modes), std::move(out));
}

Projection project_yes_no(const BranchState &s, ModeId m, Outcome outcome) {
    const auto k = s.slot_of(m);
    if (s.modes().size() < 2) throw StructuralError("project_yes_no needs at least one remaining mode");
    std::vector<ModeId> modes = s.modes();
    modes.erase(modes.begin() + static_cast<std::ptrdiff_t>(k));

    std::vector<Branch> out;
    for (const auto &b : s.branches()) {
        Branch nb = b;
        nb.slots.erase(nb.slots.begin() + static_cast<std::ptrdiff_t>(k));
        nb.modes = modes;
        if (kind_of(m) == ModeKind::photon) {
            const bool clicked = b.occupancy(k) == 1;
            if (clicked != (outcome == Outcome::click)) continue;
        } else if (outcome == Outcome::silent) {
            nb.coeff *= std::exp(-std::norm(b.slots[k]) / 2.0); // <0|beta>
        } else {
            nb.env.push_back(EnvEntry::click(b.slots[k]));
        }
        out.push_back(std::move(nb));
    }
    const double before = s.trace();
    const bool none_left = out.empty();
    BranchState post = rebuild(s, modes, std::move(out));
    const double p = none_left ? 0.0 : post.trace() / before;
    if (!(p >= 1e-15))
        throw HeraldImpossible("outcome on mode " + to_string(m) + " has probability " + std::to_string(p), p);
    return {post.normalized(), p};
}

std::vector<double> yes_no_probabilities(const BranchState &s, const std::vector<ModeId> &measured) {
    const std::size_t nm = measured.size();
    if (nm > 20) throw ResourceError("too many detectors");
    std::vector<std::size_t> slots;
    std::vector<ModeKind> kinds;
    for (ModeId m : measured) {
        slots.push_back(s.slot_of(m));
        kinds.push_back(kind_of(m));
    }
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < s.modes().size(); ++k)
        if (std::find(slots.begin(), slots.end(), k) == slots.end()) rest.push_back(k);

    const std::size_t n_out = std::size_t{1} << nm;
    std::vector<double> p(n_out, 0.0);
    const auto &br = s.branches();
    for (std::size_t i = 0; i < br.size(); ++i) {
        for (std::size_t j = 0; j < br.size(); ++j) {
            // <b_i| (prod_m Pi_m) |b_j> with unmeasured modes contributing overlaps
            cplx base = std::conj(br[i].coeff) * br[j].coeff;
            for (std::size_t k : rest) base *= slot_overlap(kind_of(s.modes()[k]), br[i].slots[k], br[j].slots[k]);
            if (base == 0.0) continue;
            base *= env_product(br[i], br[j]);
            if (base == 0.0) continue;
            std::vector<std::array<cplx, 2>> ker(nm);
            for (std::size_t q = 0; q < nm; ++q)
                for (int z = 0; z < 2; ++z)
                    ker[q][z] = slot_kernel(kinds[q], br[i].slots[slots[q]], br[j].slots[slots[q]], z);
            for (std::size_t idx = 0; idx < n_out; ++idx) {
                cplx v = base;
                for (std::size_t q = 0; q < nm && v != 0.0; ++q) v *= ker[q][(idx >> (nm - 1 - q)) & 1u];
                p[idx] += v.real();
            }
        }
    }
    const double t = s.trace();
    for (auto &x : p) x /= t;
    return p;
}

GramSpectrum spectrum_from_branches(const BranchState &s, const std::vector<ModeId> &keep) {
    if (keep.empty()) throw StructuralError("spectrum_from_branches: empty subsystem");
    std::vector<std::size_t> kept;
    for (ModeId m : keep) kept.push_back(s.slot_of(m));
    std::vector<std::size_t> traced;
    for (std::size_t k = 0; k < s.modes().size(); ++k)
        if (std::find(kept.begin(), kept.end(), k) == kept.end()) traced.push_back(k);

    const auto &br = s.branches();
    const auto n = static_cast<Eigen::Index>(br.size());
    // rho_keep = sum_ij W_ij |k_i><k_j|,  G_ij = <k_i|k_j>
    Eigen::MatrixXcd W(n, n), G(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto &bi = br[static_cast<std::size_t>(i)], &bj = br[static_cast<std::size_t>(j)];
            cplx g = 1.0;
            for (std::size_t k : kept) g *= slot_overlap(kind_of(s.modes()[k]), bi.slots[k], bj.slots[k]);
            G(i, j) = g;
            cplx w = bi.coeff * std::conj(bj.coeff);
            for (std::size_t k : traced) w *= slot_overlap(kind_of(s.modes()[k]), bj.slots[k], bi.slots[k]);
            if (w != 0.0) w *= env_product(bj, bi);
            W(i, j) = w;
        }
    }
    const double t = (W * G).trace().real();
    if (!(t > 0.0)) throw ConsistencyError("spectrum_from_branches: state has zero trace");
    W /= t;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(W * G, false);
    if (es.info() != Eigen::Success) throw ConsistencyError("spectrum_from_branches: eigen-solve failed");
    GramSpectrum out;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx ev = es.eigenvalues()(i);
        if (std::abs(ev.imag()) > 1e-10 || ev.real() < -1e-10 || ev.real() > 1.0 + 1e-10)
            throw ConsistencyError("spectrum_from_branches: eigenvalue " + std::to_string(ev.real()) + "+" +
                                   std::to_string(ev.imag()) + "i is not a probability");
        const double p = std::clamp(ev.real(), 0.0, 1.0);
        out.eigenvalues.push_back(p);
        sum += p;
    }
    std::sort(out.eigenvalues.rbegin(), out.eigenvalues.rend());

    // Symmetric route through the Loewdin-orthogonalized basis when the Gram
    // matrix is comfortably invertible.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gs(G);
    const double gmin = gs.eigenvalues().minCoeff();
    if (gmin > 1e-10) {
        const Eigen::MatrixXcd root =
            gs.eigenvectors() * gs.eigenvalues().cwiseSqrt().asDiagonal() * gs.eigenvectors().adjoint();
        Eigen::MatrixXcd h = root * W * root;
        h = (h + h.adjoint()).eval() / 2.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(h, Eigen::EigenvaluesOnly);
        std::vector<double> sym(hs.eigenvalues().data(), hs.eigenvalues().data() + n);
        std::sort(sym.rbegin(), sym.rend());
        const double tol = std::max(1e-8, 1e-14 / gmin);
        for (std::size_t i = 0; i < sym.size(); ++i)
            if (std::abs(sym[i] - out.eigenvalues[i]) > tol)
                throw ConsistencyError("spectrum_from_branches: symmetric and nonsymmetric routes disagree");
    }
    if (std::abs(sum - 1.0) > 1e-10) throw ConsistencyError("spectrum_from_branches: eigenvalues do not sum to 1");
    return out;
}

} // namespace catsim
