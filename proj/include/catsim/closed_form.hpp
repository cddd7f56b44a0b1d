#pragma once

// Closed-form expressions for the heralded states (phi1 +- phi2): spectra,
// mutual information, Bell correlations and their large-amplitude limits.
// mu is the overlap of the two one-side coherent components, d the residual
// coherence between the phi1 and phi2 branches.

#include <complex>

#include "catsim/chsh.hpp"
#include "catsim/errors.hpp"

namespace catsim {

enum class Sign { plus, minus };

inline int sign_value(Sign s) { return s == Sign::plus ? 1 : -1; }
inline char sign_char(Sign s) { return s == Sign::plus ? '+' : '-'; }

struct DisturbanceParams {
    double mu = 0.0;
    double d = 1.0;
    Sign sign = Sign::plus;
};

struct SpectrumPair {
    double p1 = 0.0, p2 = 0.0;   // global
    double p1r = 0.0, p2r = 0.0; // one side
};

enum class N3Form { printed, squared };

/// [2 +- 2 exp(-2|alpha|^2)]^(-1/2)
double norm_N(std::complex<double> alpha, Sign sign);
/// [1 +- exp(-|alpha|^2) sin 2theta]^(-1/2)
double norm_M(std::complex<double> alpha, double theta, Sign sign);

SpectrumPair spectra(double mu, double d, Sign sign);
/// Variant with the one-side denominators written as 2(1 +- mu d).
SpectrumPair spectra_printed(double mu, double d, Sign sign);
/// The alternative dephasing coherence sqrt(1 - a^2).
double printed_dephasing_d(double a);

/// I = p1 ln p1 + p2 ln p2 - 2 (p1r ln p1r + p2r ln p2r), in nats.
double mutual_information(double mu, double d, Sign sign);
double mutual_information(const SpectrumPair &p);

/// Two-mode correlation, clamped to [-1, 1].
double correlation(double thetaI, double thetaII, double mu, double d, Sign sign, N3Form form = N3Form::squared);
/// Same without clamping (for reports).
double correlation_raw(double thetaI, double thetaII, double mu, double d, Sign sign,
                       N3Form form = N3Form::squared);

double bell_factor(const BellAngles &angles, double mu, double d, Sign sign, N3Form form = N3Form::squared);
BellResult bell_max(double mu, double d, Sign sign, N3Form form = N3Form::squared);

/// (0, pi/4, pi/8, -pi/8)
BellAngles reference_angles();
/// The reference angles for the (-) state; for the (+) state side II is
/// reflected, since there C depends on thetaI + thetaII.
BellAngles reference_angles(Sign sign);

struct AsymptoticValues {
    double I = 0.0;
    double Bmax = 0.0;
};

AsymptoticValues asymptotic_decoherence(double a);
/// asymptotic_decoherence(exp(-2 R n_mean))
AsymptoticValues asymptotic_loss(double R, double n_mean);

} // namespace catsim
