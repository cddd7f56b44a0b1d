#include "catsim/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace catsim {

namespace {

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

void check_params(double mu, double d, Sign sign) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("mu outside [0,1]");
    if (!(d >= 0.0 && d <= 1.0)) throw DomainError("d outside [0,1]");
    if (sign == Sign::minus && mu == 1.0) throw DomainError("the (-) state does not exist at mu = 1");
}

} // namespace

double norm_N(std::complex<double> alpha, Sign sign) {
    const double den = 2.0 + sign_value(sign) * 2.0 * std::exp(-2.0 * std::norm(alpha));
    if (!(den > 0.0)) throw DomainError("norm_N diverges (alpha = 0 with sign -)");
    return 1.0 / std::sqrt(den);
}

double norm_M(std::complex<double> alpha, double theta, Sign sign) {
    const double den = 1.0 + sign_value(sign) * std::exp(-std::norm(alpha)) * std::sin(2.0 * theta);
    if (!(den > 0.0)) throw DomainError("norm_M diverges");
    return 1.0 / std::sqrt(den);
}

SpectrumPair spectra(double mu, double d, Sign sign) {
    check_params(mu, d, sign);
    const double s = sign_value(sign);
    const double z = 2.0 * (1.0 + s * mu * mu * d);
    return {(1.0 + s * d) * (1.0 + mu * mu) / z, (1.0 - s * d) * (1.0 - mu * mu) / z,
            (1.0 + s * mu * d) * (1.0 + mu) / z, (1.0 - s * mu * d) * (1.0 - mu) / z};
}

SpectrumPair spectra_printed(double mu, double d, Sign sign) {
    SpectrumPair p = spectra(mu, d, sign);
    const double s = sign_value(sign);
    const double zr = 2.0 * (1.0 + s * mu * d);
    p.p1r = (1.0 + s * mu * d) * (1.0 + mu) / zr;
    p.p2r = (1.0 - s * mu * d) * (1.0 - mu) / zr;
    return p;
}

double printed_dephasing_d(double a) { return std::sqrt(std::max(0.0, 1.0 - a * a)); }

double mutual_information(const SpectrumPair &p) {
    return xlogx(p.p1) + xlogx(p.p2) - 2.0 * (xlogx(p.p1r) + xlogx(p.p2r));
}

double mutual_information(double mu, double d, Sign sign) { return mutual_information(spectra(mu, d, sign)); }

double correlation_raw(double thetaI, double thetaII, double mu, double d, Sign sign, N3Form form) {
    check_params(mu, d, sign);
    const double s = sign_value(sign);
    const double s1 = std::sin(2.0 * thetaI), s2 = std::sin(2.0 * thetaII);
    const double den1 = (1.0 + mu * s1) * (1.0 - mu * s2);
    const double den2 = (1.0 - mu * s1) * (1.0 + mu * s2);
    if (!(den1 > 0.0 && den2 > 0.0)) throw DomainError("correlation denominator vanishes");
    const double n1 = 1.0 / den1, n2 = 1.0 / den2;
    const double m = form == N3Form::squared ? mu * mu : mu;
    const double n3 = 1.0 / std::sqrt((1.0 - m * s1 * s1) * (1.0 - m * s2 * s2));
    const double nn = 1.0 / (2.0 * (1.0 + s * mu * mu * d));
    return nn * ((n1 + n2) * std::cos(2.0 * thetaI) * std::cos(2.0 * thetaII) - s * 2.0 * d * n3 * s1 * s2);
}

double correlation(double thetaI, double thetaII, double mu, double d, Sign sign, N3Form form) {
    return std::clamp(correlation_raw(thetaI, thetaII, mu, d, sign, form), -1.0, 1.0);
}

double bell_factor(const BellAngles &angles, double mu, double d, Sign sign, N3Form form) {
    return chsh_value([&](double a, double b) { return correlation(a, b, mu, d, sign, form); }, angles);
}

BellResult bell_max(double mu, double d, Sign sign, N3Form form) {
    check_params(mu, d, sign);
    return maximize_chsh([&](double a, double b) { return correlation(a, b, mu, d, sign, form); });
}

BellAngles reference_angles() {
    constexpr double pi = std::numbers::pi;
    return {0.0, pi / 4, pi / 8, -pi / 8};
}

BellAngles reference_angles(Sign sign) {
    BellAngles a = reference_angles();
    if (sign == Sign::plus) {
        a.thetaII = -a.thetaII;
        a.thetaII_prime = -a.thetaII_prime;
    }
    return a;
}

AsymptoticValues asymptotic_decoherence(double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("a outside [0,1]");
    const double hp = (1.0 + a) / 2.0, hm = (1.0 - a) / 2.0;
    return {2.0 * std::numbers::ln2 + xlogx(hp) + xlogx(hm), std::numbers::sqrt2 * (1.0 + a)};
}

AsymptoticValues asymptotic_loss(double R, double n_mean) {
    if (!(R >= 0.0 && R <= 1.0)) throw DomainError("R outside [0,1]");
    if (!(n_mean >= 0.0)) throw DomainError("n_mean must be non-negative");
    return asymptotic_decoherence(std::exp(-2.0 * R * n_mean));
}

} // namespace catsim
