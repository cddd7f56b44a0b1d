#include "catsim/analysis.hpp"

#include <array>
#include <cmath>
#include <string>

namespace catsim {

namespace {

using M = ModeId;

constexpr double leakage_tolerance = 1e-8;

std::array<ModeId, 2> side_modes(int side) {
    if (side == 1) return {M::m24, M::m25};
    if (side == 2) return {M::m34, M::m35};
    throw StructuralError("side must be 1 or 2");
}

// ---- branch engine

// Infidelity of a side component (b1, b2) to |A,0> and |0,A>.
std::pair<double, double> branch_infidelity(cplx b1, cplx b2, cplx A) {
    const double du = std::norm(b1 - A) + std::norm(b2);
    const double dv = std::norm(b1) + std::norm(b2 - A);
    return {1.0 - std::exp(-du), 1.0 - std::exp(-dv)};
}

double branch_leakage(const BranchState &s, int side, cplx A) {
    const auto modes = side_modes(side);
    const std::size_t k1 = s.slot_of(modes[0]), k2 = s.slot_of(modes[1]);
    double worst = 0.0;
    for (const auto &b : s.branches()) {
        auto [fu, fv] = branch_infidelity(b.slots[k1], b.slots[k2], A);
        worst = std::max(worst, std::min(fu, fv));
    }
    return worst;
}

BranchState rotate_branch(const BranchState &s, int side, cplx A, double theta) {
    const auto modes = side_modes(side);
    const std::size_t k1 = s.slot_of(modes[0]), k2 = s.slot_of(modes[1]);
    const double c = std::cos(theta), sn = std::sin(theta);
    std::vector<Branch> out;
    for (const auto &b : s.branches()) {
        auto [fu, fv] = branch_infidelity(b.slots[k1], b.slots[k2], A);
        const bool is_u = fu <= fv;
        // image: coefficient on |A,0> and on |0,A>
        const double cu = is_u ? c : -sn, cv = is_u ? sn : c;
        Branch bu = b, bv = b;
        bu.slots[k1] = A;
        bu.slots[k2] = 0.0;
        bu.coeff *= cu;
        bv.slots[k1] = 0.0;
        bv.slots[k2] = A;
        bv.coeff *= cv;
        if (cu != 0.0) out.push_back(std::move(bu));
        if (cv != 0.0) out.push_back(std::move(bv));
    }
    return BranchState(s.modes(), std::move(out), s.branch_cap()).merged().normalized();
}

// ---- fock engine

struct SideOperators {
    Eigen::MatrixXcd projector; // onto span{|A,0>, |0,A>}
    Eigen::MatrixXcd map;       // the rotation, zero on the complement
};

SideOperators side_operators(int d1, int d2, cplx A, double theta) {
    Eigen::MatrixXcd X(d1 * d2, 2);
    Eigen::VectorXcd a1 = fock::coherent_vector(A, d1), z1 = fock::coherent_vector(0.0, d1);
    Eigen::VectorXcd a2 = fock::coherent_vector(A, d2), z2 = fock::coherent_vector(0.0, d2);
    for (int i = 0; i < d1; ++i)
        for (int j = 0; j < d2; ++j) {
            X(i * d2 + j, 0) = a1(i) * z2(j);
            X(i * d2 + j, 1) = z1(i) * a2(j);
        }
    const Eigen::MatrixXcd G = X.adjoint() * X;
    const Eigen::MatrixXcd Ginv = G.inverse();
    Eigen::Matrix2cd rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return {X * Ginv * X.adjoint(), X * rot * Ginv * X.adjoint()};
}

double fock_leakage(const fock::FockState &s, int side, cplx A) {
    const auto modes = side_modes(side);
    const int d1 = s.dims()[s.position(label(modes[0]))], d2 = s.dims()[s.position(label(modes[1]))];
    const auto ops = side_operators(d1, d2, A, 0.0);
    const double inside = s.apply_two(label(modes[0]), label(modes[1]), ops.projector).trace();
    return std::max(0.0, 1.0 - inside / s.trace());
}

fock::FockState rotate_fock(const fock::FockState &s, int side, cplx A, double theta) {
    const auto modes = side_modes(side);
    const int d1 = s.dims()[s.position(label(modes[0]))], d2 = s.dims()[s.position(label(modes[1]))];
    const auto ops = side_operators(d1, d2, A, theta);
    return s.apply_two(label(modes[0]), label(modes[1]), ops.map).normalized();
}

// The rotation on a side is cos(theta) L_c + sin(theta) L_s, so for a Fock
// state the rotated expectations of X Y and of the identity are quadratic
// forms in u = (c1, s1) (x) (c2, s2). Both 4x4 forms are built once per state.
struct CorrelationForm {
    Eigen::Matrix4d num = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d den = Eigen::Matrix4d::Zero();

    double operator()(double t1, double t2) const {
        const Eigen::Vector2d w1(std::cos(t1), std::sin(t1)), w2(std::cos(t2), std::sin(t2));
        Eigen::Vector4d u;
        u << w1(0) * w2(0), w1(0) * w2(1), w1(1) * w2(0), w1(1) * w2(1);
        return u.dot(num * u) / u.dot(den * u);
    }
};

std::array<Eigen::MatrixXcd, 2> side_map_parts(int d1, int d2, cplx A) {
    if (A == 0.0) {
        const auto n = static_cast<Eigen::Index>(d1) * d2;
        return {Eigen::MatrixXcd::Identity(n, n), Eigen::MatrixXcd::Zero(n, n)};
    }
    const auto c = side_operators(d1, d2, A, 0.0).map;
    const auto sn = side_operators(d1, d2, A, std::acos(-1.0) / 2).map;
    return {c, sn};
}

CorrelationForm correlation_form(const HeraldedState &h) {
    const auto &s = h.fock();
    std::array<std::array<Eigen::MatrixXcd, 2>, 2> parts;
    for (int side : {1, 2}) {
        const auto modes = side_modes(side);
        const int d1 = s.dims()[s.position(label(modes[0]))], d2 = s.dims()[s.position(label(modes[1]))];
        parts[static_cast<std::size_t>(side - 1)] = side_map_parts(d1, d2, h.side_amplitude[static_cast<std::size_t>(side - 1)]);
    }
    std::array<fock::FockState, 4> phi;
    for (std::size_t a = 0; a < 2; ++a) {
        const auto first = s.apply_two(24, 25, parts[0][a]);
        for (std::size_t b = 0; b < 2; ++b) phi[2 * a + b] = first.apply_two(34, 35, parts[1][b]);
    }

    // diagonal of (z24 - z25)(z34 - z35) in the register ordering
    const auto &dims = s.dims();
    std::vector<std::size_t> stride(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) stride[k - 1] = stride[k] * static_cast<std::size_t>(dims[k]);
    const auto D = static_cast<Eigen::Index>(s.dimension());
    Eigen::VectorXd o(D);
    auto occupied = [&](std::size_t i, int lab) {
        const std::size_t q = s.position(lab);
        return (i / stride[q]) % static_cast<std::size_t>(dims[q]) != 0 ? 1 : 0;
    };
    for (Eigen::Index i = 0; i < D; ++i) {
        const auto u = static_cast<std::size_t>(i);
        o(i) = (occupied(u, 24) - occupied(u, 25)) * (occupied(u, 34) - occupied(u, 35));
    }

    CorrelationForm f;
    const std::size_t members = s.members().size();
    for (std::size_t p = 0; p < 4; ++p)
        for (std::size_t q = 0; q < 4; ++q) {
            cplx n = 0.0, d = 0.0;
            for (std::size_t k = 0; k < members; ++k) {
                const auto &x = phi[p].members()[k];
                const auto &y = phi[q].members()[k];
                n += x.dot(o.cwiseProduct(y));
                d += x.dot(y);
            }
            f.num(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = n.real();
            f.den(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = d.real();
        }
    return f;
}

double entropy_nats(const std::vector<double> &eigenvalues) {
    return von_neumann_entropy(GramSpectrum{eigenvalues});
}

} // namespace

double mutual_information_oracle(const HeraldedState &h) {
    if (h.is_branch()) {
        const auto &s = h.branch();
        const double S = entropy_nats(spectrum_from_branches(s, {M::m24, M::m25, M::m34, M::m35}).eigenvalues);
        const double S1 = entropy_nats(spectrum_from_branches(s, {M::m24, M::m25}).eigenvalues);
        const double S2 = entropy_nats(spectrum_from_branches(s, {M::m34, M::m35}).eigenvalues);
        return S1 + S2 - S;
    }
    const auto &s = h.fock();
    const double S = fock::entropy_of_eigenvalues(s.spectrum());
    const double S1 = fock::entropy(s.reduced({24, 25}));
    const double S2 = fock::entropy(s.reduced({34, 35}));
    return S1 + S2 - S;
}

double rotation_leakage(const HeraldedState &h, int side) {
    const cplx A = h.side_amplitude[static_cast<std::size_t>(side - 1)];
    if (A == 0.0) return 0.0;
    return h.is_branch() ? branch_leakage(h.branch(), side, A) : fock_leakage(h.fock(), side, A);
}

HeraldedState rotate(const HeraldedState &h, int side, double theta) {
    side_modes(side);
    const cplx A = h.side_amplitude[static_cast<std::size_t>(side - 1)];
    // With no light on the side both basis states coincide with vacuum.
    if (A == 0.0) return h;
    const double leak = rotation_leakage(h, side);
    if (leak > leakage_tolerance)
        throw RotationLeakage("state leaves the two-component span of side " + std::to_string(side) +
                                  " (leakage " + std::to_string(leak) + ")",
                              leak);
    HeraldedState out = h;
    if (h.is_branch())
        out.state = rotate_branch(h.branch(), side, A, theta);
    else
        out.state = rotate_fock(h.fock(), side, A, theta);
    return out;
}

double XYDistribution::total() const {
    double t = 0.0;
    for (const auto &row : probs)
        for (double p : row) t += p;
    return t;
}

double XYDistribution::correlation() const {
    double c = 0.0;
    for (int x = -1; x <= 1; ++x)
        for (int y = -1; y <= 1; ++y) c += x * y * probs[static_cast<std::size_t>(x + 1)][static_cast<std::size_t>(y + 1)];
    return c;
}

std::vector<double> detection_probabilities(const HeraldedState &h, double thetaI, double thetaII) {
    const HeraldedState r = rotate(rotate(h, 1, thetaI), 2, thetaII);
    const std::vector<ModeId> modes{M::m24, M::m25, M::m34, M::m35};
    return r.is_branch() ? yes_no_probabilities(r.branch(), modes) : fock::yes_no_probabilities(r.fock(), modes);
}

XYDistribution xy_distribution(const HeraldedState &h, double thetaI, double thetaII) {
    const auto p = detection_probabilities(h, thetaI, thetaII);
    XYDistribution xy;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const int z24 = (k >> 3) & 1, z25 = (k >> 2) & 1, z34 = (k >> 1) & 1, z35 = k & 1;
        xy.probs[static_cast<std::size_t>(z24 - z25 + 1)][static_cast<std::size_t>(z34 - z35 + 1)] += p[k];
    }
    return xy;
}

double correlation_oracle(const HeraldedState &h, double thetaI, double thetaII) {
    return xy_distribution(h, thetaI, thetaII).correlation();
}

namespace {

void check_leakage(const HeraldedState &h) {
    for (int side : {1, 2}) {
        const double leak = rotation_leakage(h, side);
        if (leak > leakage_tolerance)
            throw RotationLeakage("state leaves the two-component span of side " + std::to_string(side), leak);
    }
}

CorrelationFn correlation_function(const HeraldedState &h) {
    if (h.is_branch()) return [&h](double a, double b) { return correlation_oracle(h, a, b); };
    check_leakage(h);
    return correlation_form(h);
}

} // namespace

double bell_oracle(const HeraldedState &h, const BellAngles &angles) {
    return chsh_value(correlation_function(h), angles);
}

BellResult bell_max_oracle(const HeraldedState &h) {
    // Fail early rather than inside the grid scan.
    check_leakage(h);
    return maximize_chsh(correlation_function(h));
}

} // namespace catsim
