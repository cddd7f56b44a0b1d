#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "catsim/closed_form.hpp"

using namespace catsim;

namespace {

const double ln2 = std::log(2.0);
const double pi = std::acos(-1.0);
const double tsirelson = 2.0 * std::sqrt(2.0);

double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

// Spectra of the state (phi1 + s phi2) with coherence d, from the 2x2
// generalized eigenproblem in the phi1/phi2 span. phi_k = u_k (x) v_k with
// <u1|u2> = mu on each side.
SpectrumPair gram_spectra(double mu, double d, Sign sign) {
    const double s = sign_value(sign);
    Eigen::Matrix2d W, G, Gs;
    W << 1, s * d, s * d, 1;
    G << 1, mu * mu, mu * mu, 1;
    Gs << 1, mu, mu, 1;
    auto top = [](const Eigen::Matrix2d &m) {
        Eigen::EigenSolver<Eigen::Matrix2d> es(m / m.trace());
        double a = es.eigenvalues()(0).real(), b = es.eigenvalues()(1).real();
        return std::make_pair(std::max(a, b), std::min(a, b));
    };
    // one side: rho_I = sum_jk W_jk <v_k|v_j> |u_j><u_k|, eigenvalues of (W o Gs) Gs
    Eigen::Matrix2d Wr = W.cwiseProduct(Gs);
    const auto g = top(W * G);
    const auto r = top(Wr * Gs);
    return {g.first, g.second, r.first, r.second};
}

} // namespace

TEST_CASE("normalizations") {
    CHECK(norm_N(0.0, Sign::plus) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(norm_N(10.0, Sign::plus) - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(norm_N(10.0, Sign::minus) - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK_THROWS_AS(norm_N(0.0, Sign::minus), DomainError);
    CHECK(norm_M(1.3, 0.0, Sign::plus) == 1.0);
    CHECK(std::abs(norm_M(1.0, pi / 4, Sign::minus) - 1 / std::sqrt(1 - std::exp(-1.0))) < 1e-14);
}

TEST_CASE("spectra examples") {
    auto p = spectra(0.0, 1.0, Sign::plus);
    CHECK(p.p1 == doctest::Approx(1.0));
    CHECK(std::abs(p.p2) < 1e-15);
    CHECK(p.p1r == doctest::Approx(0.5));
    CHECK(p.p2r == doctest::Approx(0.5));

    p = spectra(0.5, 1.0, Sign::plus);
    CHECK(std::abs(p.p1 - 1.0) < 1e-15);
    CHECK(std::abs(p.p2) < 1e-15);
    CHECK(std::abs(p.p1r - 0.9) < 1e-15);
    CHECK(std::abs(p.p2r - 0.1) < 1e-15);

    for (double mu : {0.0, 0.3, 0.8}) {
        for (Sign s : {Sign::plus, Sign::minus}) {
            p = spectra(mu, 0.0, s);
            CHECK(std::abs(p.p1 - (1 + mu * mu) / 2) < 1e-15);
            CHECK(std::abs(p.p1r - (1 + mu) / 2) < 1e-15);
        }
    }
    CHECK_THROWS_AS(spectra(1.0, 1.0, Sign::minus), DomainError);
    CHECK_THROWS_AS(spectra(1.2, 1.0, Sign::plus), DomainError);
    CHECK_THROWS_AS(spectra(0.5, -0.1, Sign::plus), DomainError);
}

TEST_CASE("spectra agree with a Gram diagonalization") {
    for (double mu : {0.0, 0.1, std::exp(-1.0), 0.6, 0.95}) {
        for (double d : {0.0, 0.25, 0.5, 1.0}) {
            for (Sign s : {Sign::plus, Sign::minus}) {
                const auto c = spectra(mu, d, s);
                const auto g = gram_spectra(mu, d, s);
                CHECK(std::abs(std::max(c.p1, c.p2) - g.p1) < 1e-12);
                CHECK(std::abs(std::min(c.p1, c.p2) - g.p2) < 1e-12);
                CHECK(std::abs(std::max(c.p1r, c.p2r) - g.p1r) < 1e-12);
                CHECK(std::abs(std::min(c.p1r, c.p2r) - g.p2r) < 1e-12);
                CHECK(std::abs(c.p1 + c.p2 - 1) < 1e-12);
                CHECK(std::abs(c.p1r + c.p2r - 1) < 1e-12);
                for (double x : {c.p1, c.p2, c.p1r, c.p2r}) {
                    CHECK(x >= 0.0);
                    CHECK(x <= 1.0);
                }
            }
        }
    }
}

TEST_CASE("the printed one-side denominators lose trace one") {
    const auto p = spectra_printed(std::exp(-1.0), 0.5, Sign::plus);
    CHECK(std::abs(p.p1r + p.p2r - 1.0) > 1e-3);
    CHECK(std::abs(printed_dephasing_d(0.6) - 0.8) < 1e-15);
}

TEST_CASE("mutual information") {
    CHECK(std::abs(mutual_information(0.0, 1.0, Sign::plus) - 2 * ln2) < 1e-12);
    CHECK(std::abs(mutual_information(0.0, 0.0, Sign::plus) - ln2) < 1e-12);
    CHECK(std::abs(mutual_information(0.0, 0.0, Sign::minus) - ln2) < 1e-12);
    CHECK(std::abs(mutual_information(1.0 - 1e-9, 1.0, Sign::plus)) < 1e-6);

    for (double mu : {0.0, 0.2, 0.7}) {
        for (double d : {0.0, 0.4, 1.0}) {
            for (Sign s : {Sign::plus, Sign::minus}) {
                const auto g = gram_spectra(mu, d, s);
                const double ref = xlogx(g.p1) + xlogx(g.p2) - 2 * (xlogx(g.p1r) + xlogx(g.p2r));
                const double I = mutual_information(mu, d, s);
                CHECK(std::abs(I - ref) < 1e-11);
                CHECK(I >= -1e-12);
                CHECK(I <= 2 * ln2 + 1e-12);
                if (d == 1.0) {
                    // pure state: one global eigenvalue vanishes
                    const auto p = spectra(mu, d, s);
                    CHECK(std::min(p.p1, p.p2) < 1e-15);
                    CHECK(std::abs(I + 2 * (xlogx(p.p1r) + xlogx(p.p2r))) < 1e-12);
                }
            }
        }
    }
    for (double a : {0.0, 0.3, 0.5, 1.0})
        for (Sign s : {Sign::plus, Sign::minus})
            CHECK(std::abs(mutual_information(1e-8, a, s) - asymptotic_decoherence(a).I) < 1e-9);
}

TEST_CASE("correlation") {
    CHECK(std::abs(correlation(0.0, pi / 8, 0.0, 1.0, Sign::minus) - std::cos(pi / 4)) < 1e-12);
    for (double t1 : {-0.4, 0.0, 0.3, 1.1})
        for (double t2 : {-1.0, 0.2, 0.9}) {
            CHECK(std::abs(correlation(t1, t2, 0.0, 1.0, Sign::minus) - std::cos(2 * t1 - 2 * t2)) < 1e-12);
            const double c = correlation(t1, t2, 0.0, 0.0, Sign::plus);
            CHECK(std::abs(c - std::cos(2 * t1) * std::cos(2 * t2)) < 1e-12);
            CHECK(std::abs(c) <= 1.0);
            // pi-periodic in each angle
            CHECK(std::abs(correlation(t1 + pi, t2, 0.3, 0.6, Sign::plus) -
                           correlation(t1, t2, 0.3, 0.6, Sign::plus)) < 1e-12);
        }
    CHECK_THROWS_AS(correlation(0.1, pi / 4, 1.0, 1.0, Sign::plus), DomainError);
    // the printed and squared N3 coincide when mu is negligible
    CHECK(std::abs(correlation(0.3, 0.5, 1e-6, 1.0, Sign::plus, N3Form::printed) -
                   correlation(0.3, 0.5, 1e-6, 1.0, Sign::plus, N3Form::squared)) < 1e-5);
}

TEST_CASE("Bell factor at the reference angles") {
    const auto a8 = reference_angles();
    CHECK(a8.thetaI == 0.0);
    CHECK(std::abs(a8.thetaI_prime - pi / 4) < 1e-15);
    CHECK(std::abs(a8.thetaII - pi / 8) < 1e-15);
    CHECK(std::abs(a8.thetaII_prime + pi / 8) < 1e-15);
    CHECK(std::abs(bell_factor(a8, 0.0, 1.0, Sign::minus) - tsirelson) < 1e-12);
    for (int k = 0; k <= 10; ++k) {
        const double d = 0.1 * k;
        CHECK(std::abs(bell_factor(a8, 0.0, d, Sign::minus) - std::sqrt(2.0) * (1 + d)) < 1e-12);
        CHECK(std::abs(bell_factor(reference_angles(Sign::plus), 0.0, d, Sign::plus) - std::sqrt(2.0) * (1 + d)) <
              1e-12);
    }
    for (double t : {0.0, 0.4, 1.3}) {
        BellAngles b{t, t + 0.5, -t, 0.7};
        CHECK(bell_factor(b, 0.0, 0.0, Sign::plus) <= 2.0 + 1e-12);
    }
}

TEST_CASE("Bell maximum") {
    auto r = bell_max(0.0, 1.0, Sign::minus);
    CHECK(std::abs(r.value - tsirelson) < 1e-9);
    CHECK(angle_distance_mod_symmetry(r.angles, reference_angles(), ShiftSymmetry::common) < 1e-3);
    r = bell_max(1e-4, 1.0, Sign::plus);
    CHECK(angle_distance_mod_symmetry(r.angles, reference_angles(Sign::plus), ShiftSymmetry::counter) < 1e-3);

    for (double a : {0.0, 0.25, 0.5, 0.75}) {
        r = bell_max(0.0, a, Sign::minus);
        CHECK(r.value >= std::sqrt(2.0) * (1 + a) - 1e-9);
        CHECK(r.value <= 2 * std::sqrt(1 + a * a) + 1e-9);
        CHECK(r.value <= tsirelson + 1e-9);
    }

    // reported angles reproduce the value and the value is invariant under
    // pi shifts and party exchange
    const double mu = 0.3, d = 0.8;
    r = bell_max(mu, d, Sign::minus);
    CHECK(std::abs(bell_factor(r.angles, mu, d, Sign::minus) - r.value) < 1e-12);
    BellAngles shifted{r.angles.thetaI + pi, r.angles.thetaI_prime, r.angles.thetaII - pi, r.angles.thetaII_prime};
    CHECK(std::abs(bell_factor(shifted, mu, d, Sign::minus) - r.value) < 1e-12);
    BellAngles swapped{r.angles.thetaII, r.angles.thetaII_prime, r.angles.thetaI, r.angles.thetaI_prime};
    CHECK(std::abs(bell_factor(swapped, mu, d, Sign::minus) - r.value) < 1e-12);
    for (double x : {r.angles.thetaI, r.angles.thetaI_prime, r.angles.thetaII, r.angles.thetaII_prime}) {
        CHECK(x >= 0.0);
        CHECK(x < pi);
    }
}

TEST_CASE("asymptotics") {
    auto v = asymptotic_decoherence(1.0);
    CHECK(std::abs(v.I - 2 * ln2) < 1e-12);
    CHECK(std::abs(v.Bmax - tsirelson) < 1e-12);
    v = asymptotic_decoherence(0.0);
    CHECK(std::abs(v.I - ln2) < 1e-12);
    CHECK(std::abs(v.Bmax - std::sqrt(2.0)) < 1e-12);
    for (double R : {0.0, 0.01, 0.1})
        for (double n : {1.0, 9.0, 25.0}) {
            const auto l = asymptotic_loss(R, n);
            const auto e = asymptotic_decoherence(std::exp(-2 * R * n));
            CHECK(l.I == e.I);
            CHECK(l.Bmax == e.Bmax);
        }
    CHECK_THROWS_AS(asymptotic_decoherence(1.5), DomainError);
}

// The closed-form correlation agrees with the simulated one only once the
// components are nearly orthogonal; at mu = 0.9 its optimum leaves the
// quantum range. Kept as a standing check of the expected value.
TEST_SUITE("known_discrepancies") {
    TEST_CASE("closed-form Bell maximum at mu = 0.9 lies in (2, 2 sqrt 2]") {
        const auto r = bell_max(0.9, 1.0, Sign::plus);
        CHECK(r.value > 2.0);
        CHECK(r.value <= tsirelson + 1e-9);
    }
}
