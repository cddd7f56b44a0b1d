#include "catsim/apparatus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace catsim {

namespace {

using M = ModeId;

constexpr std::array<ModeId, 6> loss_locations = {M::m22, M::m23, M::m32, M::m33, M::m12, M::m13};

// Amplitude fed into arm 23 (33) so that the outputs come out as |alpha>|0>
// or |0>|alpha> with the phase of the source.
cplx source_amplitude(cplx alpha) { return cplx{0.0, -1.0} * alpha; }

cplx nominal_side_amplitude(cplx alpha, double r_a, double r_b) {
    return alpha * (std::sqrt(1.0 - r_a) + std::sqrt(1.0 - r_b)) / 2.0;
}

std::array<cplx, 2> side_amplitudes(const ApparatusConfig &cfg) {
    return {nominal_side_amplitude(cfg.alpha2, cfg.loss(M::m22), cfg.loss(M::m23)),
            nominal_side_amplitude(cfg.alpha3, cfg.loss(M::m32), cfg.loss(M::m33))};
}

// Generic pipeline; Ops provides the engine-specific primitives.
template <class Ops>
typename Ops::State premixed(const ApparatusConfig &cfg, const Ops &ops) {
    auto s = ops.initial(cfg);
    s = ops.bs(s, M::m12, M::m13, 0.5);
    if (cfg.env_overlap_a != 1.0) s = ops.dephase(s, M::m12, cfg.env_overlap_a);
    s = ops.bs(s, M::m22, M::m23, 0.5);
    s = ops.bs(s, M::m32, M::m33, 0.5);
    s = ops.kerr(s, M::m12, M::m23);
    s = ops.kerr(s, M::m13, M::m33);
    for (ModeId m : loss_locations)
        if (cfg.loss(m) > 0.0) s = ops.loss(s, m, cfg.loss(m));
    s = ops.bs(s, M::m22, M::m23, 0.5);
    s = ops.bs(s, M::m32, M::m33, 0.5);
    s = ops.relabel(s, M::m22, M::m24);
    s = ops.relabel(s, M::m23, M::m25);
    s = ops.relabel(s, M::m32, M::m34);
    s = ops.relabel(s, M::m33, M::m35);
    s = ops.phase(s, M::m25, -std::numbers::pi / 2);
    s = ops.phase(s, M::m35, -std::numbers::pi / 2);
    return s;
}

template <class Ops>
std::pair<typename Ops::State, double> heralded(const ApparatusConfig &cfg, const Ops &ops) {
    auto s = premixed(cfg, ops);
    s = ops.bs(s, M::m12, M::m13, 0.5);
    s = ops.relabel(s, M::m13, M::m14);
    s = ops.relabel(s, M::m12, M::m15);
    const ModeId fire = cfg.herald == Herald::D1 ? M::m14 : M::m15;
    const ModeId quiet = cfg.herald == Herald::D1 ? M::m15 : M::m14;
    double prob = 1.0;
    try {
        auto p1 = ops.project(s, fire, Outcome::click);
        prob *= p1.probability;
        auto p2 = ops.project(p1.state, quiet, Outcome::silent);
        prob *= p2.probability;
        return {p2.state, prob};
    } catch (const HeraldImpossible &e) {
        const char *name = cfg.herald == Herald::D1 ? "D1" : "D2";
        throw HeraldImpossible(std::string("herald ") + name + " has probability zero", prob * e.probability());
    }
}

struct BranchOps {
    using State = BranchState;
    State initial(const ApparatusConfig &cfg) const {
        auto s = BranchState::vacuum({M::m12, M::m13, M::m22, M::m23, M::m32, M::m33});
        s = s.with_photon(M::m12, 1);
        s = s.with_field(M::m23, source_amplitude(cfg.alpha2));
        return s.with_field(M::m33, source_amplitude(cfg.alpha3));
    }
    State bs(const State &s, ModeId a, ModeId b, double t) const { return apply_beamsplitter(s, a, b, t); }
    State kerr(const State &s, ModeId p, ModeId f) const { return apply_cross_kerr(s, p, f); }
    State loss(const State &s, ModeId m, double R) const { return apply_loss(s, m, R); }
    State dephase(const State &s, ModeId m, double a) const { return apply_env_dephasing(s, m, a); }
    State relabel(const State &s, ModeId a, ModeId b) const { return catsim::relabel(s, a, b); }
    State phase(const State &s, ModeId m, double phi) const { return apply_phase_shift(s, m, phi); }
    Projection project(const State &s, ModeId m, Outcome o) const { return project_yes_no(s, m, o); }
};

struct FockOps {
    using State = fock::FockState;
    State initial(const ApparatusConfig &cfg) const {
        const double nmax = std::max(std::norm(cfg.alpha2), std::norm(cfg.alpha3));
        if (nmax > 2.0 + 1e-12) throw ResourceError("the Fock engine is limited to |alpha|^2 <= 2");
        // Linear optics never puts more than the source mean into one mode.
        const int d = fock::derive_cutoff(nmax, cfg.cutoff) + 1;
        Eigen::VectorXcd one = Eigen::VectorXcd::Zero(2), zero = Eigen::VectorXcd::Zero(2);
        one(1) = 1.0;
        zero(0) = 1.0;
        const Eigen::VectorXcd vac = fock::coherent_vector(0.0, d);
        return State::product({12, 13, 22, 23, 32, 33},
                              {one, zero, vac, fock::coherent_vector(source_amplitude(cfg.alpha2), d), vac,
                               fock::coherent_vector(source_amplitude(cfg.alpha3), d)});
    }
    State bs(const State &s, ModeId a, ModeId b, double t) const { return fock::apply_unitary_bs(s, a, b, t); }
    State kerr(const State &s, ModeId p, ModeId f) const { return fock::apply_unitary_kerr(s, p, f); }
    State loss(const State &s, ModeId m, double R) const { return fock::loss_channel(s, m, R); }
    State dephase(const State &s, ModeId m, double a) const { return fock::dephasing_channel(s, m, a); }
    State relabel(const State &s, ModeId a, ModeId b) const { return s.relabeled(label(a), label(b)); }
    State phase(const State &s, ModeId m, double phi) const { return fock::apply_phase_shift(s, m, phi); }
    fock::FockProjection project(const State &s, ModeId m, Outcome o) const { return fock::project_yes_no(s, m, o); }
};

} // namespace

ApparatusConfig ApparatusConfig::symmetric(double n_mean, double R_field, double a, Herald h) {
    if (!(n_mean >= 0.0)) throw DomainError("n_mean must be non-negative");
    ApparatusConfig cfg;
    cfg.alpha2 = cfg.alpha3 = std::sqrt(n_mean);
    for (ModeId m : {M::m22, M::m23, M::m32, M::m33}) cfg.loss_R[m] = R_field;
    cfg.env_overlap_a = a;
    cfg.herald = h;
    cfg.validate();
    return cfg;
}

double ApparatusConfig::loss(ModeId m) const {
    auto it = loss_R.find(m);
    return it == loss_R.end() ? 0.0 : it->second;
}

void ApparatusConfig::validate() const {
    for (const auto &[m, r] : loss_R) {
        if (std::find(loss_locations.begin(), loss_locations.end(), m) == loss_locations.end())
            throw DomainError("R: no loss location at mode " + to_string(m));
        if (!(r >= 0.0 && r <= 1.0)) throw DomainError("R: loss at mode " + to_string(m) + " outside [0,1]");
    }
    if (!(env_overlap_a >= 0.0 && env_overlap_a <= 1.0)) throw DomainError("a: environment overlap outside [0,1]");
    if (!std::isfinite(std::abs(alpha2)) || !std::isfinite(std::abs(alpha3)))
        throw DomainError("alpha: amplitudes must be finite");
}

PremixedState build_premixed_state(const ApparatusConfig &cfg) {
    cfg.validate();
    PremixedState out;
    out.side_amplitude = side_amplitudes(cfg);
    if (cfg.engine == Engine::branch)
        out.state = premixed(cfg, BranchOps{});
    else
        out.state = premixed(cfg, FockOps{});
    return out;
}

HeraldedState run_apparatus(const ApparatusConfig &cfg) {
    cfg.validate();
    HeraldedState h;
    h.herald = cfg.herald;
    h.side_amplitude = side_amplitudes(cfg);
    if (cfg.engine == Engine::branch) {
        auto [s, p] = heralded(cfg, BranchOps{});
        h.state = s.merged();
        h.herald_prob = p;
    } else {
        auto [s, p] = heralded(cfg, FockOps{});
        h.state = std::move(s);
        h.herald_prob = p;
    }
    return h;
}

HeraldedState mixture_state(const ApparatusConfig &cfg) {
    auto pre = build_premixed_state(cfg);
    HeraldedState h;
    h.side_amplitude = pre.side_amplitude;
    if (auto *b = std::get_if<BranchState>(&pre.state))
        h.state = trace_out(*b, {M::m12, M::m13}).normalized();
    else
        h.state = std::get<fock::FockState>(pre.state).traced(12).traced(13).compressed().normalized();
    return h;
}

DisturbanceParams disturbance_params(const ApparatusConfig &cfg) {
    cfg.validate();
    if (cfg.alpha2 != cfg.alpha3) throw UnsupportedScenario("closed forms need alpha2 = alpha3");
    if (cfg.loss(M::m12) != cfg.loss(M::m13))
        throw UnsupportedScenario("closed forms need balanced photon-arm losses");
    const double R = cfg.loss(M::m22);
    for (ModeId m : {M::m23, M::m32, M::m33})
        if (cfg.loss(m) != R) throw UnsupportedScenario("closed forms need equal losses on 22, 23, 32, 33");
    if (R > 0.0 && cfg.env_overlap_a < 1.0)
        throw UnsupportedScenario("closed forms do not cover loss and dephasing together");
    const double n = std::norm(cfg.alpha2);
    DisturbanceParams p;
    p.sign = sign_of(cfg.herald);
    p.mu = std::exp(-(1.0 - R) * n);
    p.d = R > 0.0 ? std::exp(-2.0 * R * n) : cfg.env_overlap_a;
    return p;
}

WhichWay whichway_probabilities(double R, cplx alpha) {
    if (!(R >= 0.0 && R <= 1.0)) throw DomainError("R outside [0,1]");
    const double per_side = std::exp(-2.0 * R * std::norm(alpha));
    return {per_side, per_side * per_side};
}

double herald_probability(const DisturbanceParams &p, double photon_arm_R) {
    return (1.0 - photon_arm_R) * (1.0 + sign_value(p.sign) * p.mu * p.mu * p.d) / 2.0;
}

} // namespace catsim
