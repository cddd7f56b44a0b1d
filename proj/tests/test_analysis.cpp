#include <doctest.h>

#include <cmath>

#include "catsim/analysis.hpp"

using namespace catsim;
using M = ModeId;

namespace {

const double pi = std::acos(-1.0);
const std::vector<ModeId> four{M::m24, M::m25, M::m34, M::m35};
const std::vector<int> dims{10, 10, 10, 10};

Branch plain_branch(std::vector<cplx> slots, cplx coeff) {
    Branch b;
    b.modes = four;
    b.slots = std::move(slots);
    b.coeff = coeff;
    return b;
}

HeraldedState wrap(BranchState s, cplx A) {
    HeraldedState h;
    h.state = std::move(s);
    h.side_amplitude = {A, A};
    return h;
}

double fidelity(const HeraldedState &a, const HeraldedState &b) {
    const auto fa = a.is_branch() ? fock::expand(a.branch(), dims) : a.fock();
    const auto fb = b.is_branch() ? fock::expand(b.branch(), dims) : b.fock();
    return fock::fidelity(fa, fb);
}

} // namespace

TEST_CASE("rotation examples") {
    const cplx A = 1.1;
    const auto ideal = run_apparatus(ApparatusConfig::symmetric(std::norm(A)));
    CHECK(fidelity(rotate(ideal, 1, 0.0), ideal) > 1.0 - 1e-12);

    // |A,0> -> |0,A> and |0,A> -> -|A,0> on side I
    const auto r = rotate(ideal, 1, pi / 2);
    const auto expect = wrap(BranchState(four, {plain_branch({0.0, A, 0.0, A}, 1.0),
                                               plain_branch({A, 0.0, A, 0.0}, -1.0)})
                                 .normalized(),
                             A);
    CHECK(fidelity(r, expect) > 1.0 - 1e-10);

    // single component: the image is the normalized cos|A,0> + sin|0,A>
    const double theta = 0.37;
    const auto single = wrap(BranchState(four, {plain_branch({A, 0.0, A, 0.0}, 1.0)}), A);
    const auto image = BranchState(four, {plain_branch({A, 0.0, A, 0.0}, std::cos(theta)),
                                          plain_branch({0.0, A, A, 0.0}, std::sin(theta))});
    CHECK(fidelity(rotate(single, 1, theta), wrap(image.normalized(), A)) > 1.0 - 1e-12);
    CHECK(std::abs(1 / std::sqrt(image.trace()) - norm_M(A, theta, Sign::plus)) < 1e-12);
    const auto image_minus = BranchState(four, {plain_branch({A, 0.0, A, 0.0}, std::cos(theta)),
                                                plain_branch({0.0, A, A, 0.0}, -std::sin(theta))});
    CHECK(std::abs(1 / std::sqrt(image_minus.trace()) - norm_M(A, theta, Sign::minus)) < 1e-12);
}

TEST_CASE("rotation round trip") {
    for (auto cfg : {ApparatusConfig::symmetric(1.5, 0.0, 0.5, Herald::D2), ApparatusConfig::symmetric(0.8, 0.1)}) {
        const auto h = run_apparatus(cfg);
        for (int side : {1, 2}) {
            const auto back = rotate(rotate(h, side, 0.83), side, -0.83);
            CHECK(fidelity(back, h) > 1.0 - 1e-10);
        }
    }
}

TEST_CASE("rotation engines agree") {
    auto cfg = ApparatusConfig::symmetric(0.9, 0.0, 0.7, Herald::D2);
    const auto b = run_apparatus(cfg);
    cfg.engine = Engine::fock;
    const auto f = run_apparatus(cfg);
    for (double t : {0.2, 1.0}) {
        const auto rb = rotate(rotate(b, 1, t), 2, -0.5 * t);
        const auto rf = rotate(rotate(f, 1, t), 2, -0.5 * t);
        CHECK(fock::fidelity_with_branch(rf.fock(), rb.branch()) > 1.0 - 1e-8);
        CHECK(std::abs(correlation_oracle(b, t, 0.3) - correlation_oracle(f, t, 0.3)) < 1e-6);
    }
    const BellAngles angles{0.1, 0.9, -0.4, 0.35};
    CHECK(std::abs(bell_oracle(b, angles) - bell_oracle(f, angles)) < 1e-9);
    CHECK(std::abs(bell_max_oracle(b).value - bell_max_oracle(f).value) < 1e-8);
}

TEST_CASE("leakage is reported") {
    auto cfg = ApparatusConfig::symmetric(2.0);
    cfg.loss_R[M::m22] = 0.2;
    const auto h = run_apparatus(cfg);
    CHECK(rotation_leakage(h, 1) > 1e-8);
    CHECK_THROWS_AS(rotate(h, 1, 0.3), RotationLeakage);
    CHECK_THROWS_AS(bell_max_oracle(h), RotationLeakage);

    // balanced field loss keeps both sides in the two-component span
    const auto balanced = run_apparatus(ApparatusConfig::symmetric(2.0, 0.1));
    CHECK(rotation_leakage(balanced, 1) < 1e-12);
    CHECK(rotation_leakage(balanced, 2) < 1e-12);
}

TEST_CASE("XY distributions") {
    HeraldedState vac;
    vac.state = BranchState::vacuum(four);
    const auto v = xy_distribution(vac, 0.3, 0.9);
    CHECK(std::abs(v.probs[1][1] - 1.0) < 1e-15);

    const auto ideal = run_apparatus(ApparatusConfig::symmetric(9.0));
    const auto xy = xy_distribution(ideal, 0.0, 0.0);
    CHECK(xy.probs[2][0] + xy.probs[0][2] > 1.0 - 1e-3);
    CHECK(std::abs(xy.total() - 1.0) < 1e-10);
    CHECK(std::abs(correlation_oracle(ideal, 0.0, 0.0) + 1.0) < 1e-3);

    // no signaling: marginals of one side ignore the other side's angle once
    // the rotations are unitary on the two-component span (negligible overlap)
    const auto h = run_apparatus(ApparatusConfig::symmetric(30.0, 0.001, 1.0, Herald::D2));
    for (double t1 : {0.0, 0.6})
        for (double t2 : {0.1, 1.2}) {
            const auto a = xy_distribution(h, t1, t2);
            const auto b = xy_distribution(h, t1, t2 + 0.45);
            const auto c = xy_distribution(h, t1 + 0.7, t2);
            for (int x = 0; x < 3; ++x) {
                double ra = 0, rb = 0, ca = 0, cc = 0;
                for (int y = 0; y < 3; ++y) {
                    ra += a.probs[x][y];
                    rb += b.probs[x][y];
                    ca += a.probs[y][x];
                    cc += c.probs[y][x];
                }
                CHECK(std::abs(ra - rb) < 1e-10);
                CHECK(std::abs(ca - cc) < 1e-10);
            }
        }
}

TEST_CASE("correlations follow the closed form in the ideal limit") {
    const auto ideal = run_apparatus(ApparatusConfig::symmetric(9.0, 0.0, 1.0, Herald::D2));
    const double mu = std::exp(-9.0);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double t1 = i * pi / 5, t2 = j * pi / 5 + 0.1;
            const double c = correlation_oracle(ideal, t1, t2);
            CHECK(std::abs(c + correlation(t1, t2, mu, 1.0, Sign::minus)) < 5e-3);
            CHECK(std::abs(c) <= 1.0 + 1e-9);
        }

    const auto mix = mixture_state(ApparatusConfig::symmetric(9.0));
    double bound = 0.0, worst = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double t1 = i * pi / 5, t2 = j * pi / 5 + 0.1;
            bound = std::max(bound, std::abs(std::cos(2 * t1) * std::cos(2 * t2)));
            worst = std::max(worst, std::abs(correlation_oracle(mix, t1, t2)));
        }
    CHECK(worst <= bound + 5e-3);
}

TEST_CASE("Bell factor on simulated states") {
    const auto deph = run_apparatus(ApparatusConfig::symmetric(9.0, 0.0, 0.5, Herald::D2));
    CHECK(std::abs(bell_oracle(deph, reference_angles(Sign::minus)) - std::sqrt(2.0) * 1.5) < 5e-3);
    const auto deph_plus = run_apparatus(ApparatusConfig::symmetric(9.0, 0.0, 0.5, Herald::D1));
    CHECK(std::abs(bell_oracle(deph_plus, reference_angles(Sign::plus)) - std::sqrt(2.0) * 1.5) < 5e-3);

    const auto r = bell_max_oracle(run_apparatus(ApparatusConfig::symmetric(4.0, 0.0, 1.0, Herald::D2)));
    CHECK(r.value <= 2 * std::sqrt(2.0) + 1e-6);
    // ideal detection leaves each side silent with probability about e^-4
    CHECK(r.value > 2.7);

    const auto mix = bell_max_oracle(mixture_state(ApparatusConfig::symmetric(9.0)));
    CHECK(mix.value <= 2.0 + 1e-6);
}

TEST_CASE("mutual information on simulated states") {
    for (double a : {0.0, 0.5, 1.0})
        for (Herald hd : {Herald::D1, Herald::D2}) {
            const auto cfg = ApparatusConfig::symmetric(1.0, 0.0, a, hd);
            const auto h = run_apparatus(cfg);
            const auto p = disturbance_params(cfg);
            CHECK(std::abs(mutual_information_oracle(h) - mutual_information(p.mu, p.d, p.sign)) < 1e-9);
        }
    auto cfg = ApparatusConfig::symmetric(1.0, 0.1, 1.0, Herald::D2);
    const auto b = run_apparatus(cfg);
    cfg.engine = Engine::fock;
    const auto f = run_apparatus(cfg);
    CHECK(std::abs(mutual_information_oracle(b) - mutual_information_oracle(f)) < 1e-8);
}

// The renormalized rotation is not unitary while the two components overlap,
// so one side's statistics depend on the other side's angle at small
// amplitude. Kept as a standing check of the expected value.
TEST_SUITE("known_discrepancies") {
    TEST_CASE("no signaling at small amplitude") {
        const auto h = run_apparatus(ApparatusConfig::symmetric(0.7, 0.05, 1.0, Herald::D2));
        const auto a = xy_distribution(h, 0.0, 0.1);
        const auto b = xy_distribution(h, 0.0, 0.55);
        for (int x = 0; x < 3; ++x) {
            double ra = 0, rb = 0;
            for (int y = 0; y < 3; ++y) {
                ra += a.probs[x][y];
                rb += b.probs[x][y];
            }
            CHECK(std::abs(ra - rb) < 1e-10);
        }
    }
}
