#pragma once

// The entangling apparatus: a single photon split over modes 12/13, two
// coherent-state Mach-Zehnder interferometers whose arms 23 and 33 pick up a
// pi phase through cross-Kerr coupling to the photon, loss and dephasing
// channels, and an eraser beam splitter on the photon modes whose detectors
// herald the four-mode output on 24, 25, 34, 35.

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <variant>

#include "catsim/branch.hpp"
#include "catsim/closed_form.hpp"
#include "catsim/fock.hpp"
#include "catsim/mode.hpp"

namespace catsim {

enum class Herald { D1, D2 };
enum class Engine { branch, fock };

inline Sign sign_of(Herald h) { return h == Herald::D1 ? Sign::plus : Sign::minus; }
inline Herald herald_of(Sign s) { return s == Sign::plus ? Herald::D1 : Herald::D2; }

struct ApparatusConfig {
    cplx alpha2{0.0, 0.0};
    cplx alpha3{0.0, 0.0};
    // reflectivity of an auxiliary loss beam splitter, keyed by mode 22, 23, 32, 33, 12 or 13
    std::map<ModeId, double> loss_R;
    double env_overlap_a = 1.0;
    Herald herald = Herald::D1;
    Engine engine = Engine::branch;
    fock::FockCutoffPolicy cutoff;

    /// alpha2 = alpha3 = sqrt(n_mean), loss R on 22, 23, 32 and 33.
    static ApparatusConfig symmetric(double n_mean, double R_field = 0.0, double a = 1.0, Herald h = Herald::D1);

    double loss(ModeId m) const;
    /// Throws DomainError naming the offending parameter.
    void validate() const;
};

using EngineState = std::variant<BranchState, fock::FockState>;

struct HeraldedState {
    EngineState state; // modes 24, 25, 34, 35; normalized
    double herald_prob = 1.0;
    std::optional<Herald> herald; // empty for the unheralded mixture
    // Amplitude of the bright component on side I (24/25) and side II (34/35).
    std::array<cplx, 2> side_amplitude{};

    bool is_branch() const { return std::holds_alternative<BranchState>(state); }
    const BranchState &branch() const { return std::get<BranchState>(state); }
    const fock::FockState &fock() const { return std::get<fock::FockState>(state); }
};

struct PremixedState {
    EngineState state; // modes 12, 13, 24, 25, 34, 35 before the eraser
    std::array<cplx, 2> side_amplitude{};
};

HeraldedState run_apparatus(const ApparatusConfig &cfg);

PremixedState build_premixed_state(const ApparatusConfig &cfg);

/// The premixed state with the photon modes traced out (no heralding).
HeraldedState mixture_state(const ApparatusConfig &cfg);

/// Only for dephasing-only or balanced field-loss configurations with
/// alpha2 = alpha3; anything else throws UnsupportedScenario.
DisturbanceParams disturbance_params(const ApparatusConfig &cfg);

struct WhichWay {
    double per_side = 1.0;
    double total = 1.0;
};

/// Inconclusive-result probabilities of unambiguous discrimination of the
/// tapped beams: exp(-2 R |alpha|^2) per side and its square for both.
WhichWay whichway_probabilities(double R, cplx alpha);

/// Closed-form herald probability (1 +- mu^2 d)/2 times the photon-arm transmission.
double herald_probability(const DisturbanceParams &p, double photon_arm_R = 0.0);

} // namespace catsim
