#pragma once

// Exact multimode states as finite superpositions of product branches.
//
// Every branch is a product of coherent states (field modes) and 0/1 photon
// occupations (photon modes), multiplied by a complex coefficient and tagged
// with a list of environment entries. The environment is never expanded in a
// basis: each entry only knows how to compute its overlap with the entry at
// the same position in another branch. The represented density operator is
//
//     rho = sum_ij  c_i conj(c_j) <env_j|env_i>  |b_i><b_j|
//
// All inner products are analytic, so nothing is truncated.

#include <complex>
#include <cstddef>
#include <vector>

#include "catsim/errors.hpp"
#include "catsim/mode.hpp"

namespace catsim {

using cplx = std::complex<double>;

struct EnvEntry {
    enum class Kind {
        coherent,   // a tapped beam |value>; overlap is the coherent overlap
        orthogonal, // a basis state labelled by `tag`; overlap is a Kronecker delta
        dephasing,  // |e_1> (tag 0) or |e_2> (tag 1) with <e_1|e_2> = overlap
        click,      // a field mode absorbed by a detector that clicked: (1 - |0><0|)|value>
    };

    Kind kind = Kind::orthogonal;
    cplx value{};
    int tag = 0;
    cplx overlap{1.0, 0.0};

    static EnvEntry coherent(cplx beta) { return {Kind::coherent, beta, 0, {}}; }
    static EnvEntry orthogonal(int t) { return {Kind::orthogonal, {}, t, {}}; }
    static EnvEntry dephasing(int t, cplx a) { return {Kind::dephasing, {}, t, a}; }
    static EnvEntry click(cplx beta) { return {Kind::click, beta, 0, {}}; }

    bool operator==(const EnvEntry &) const = default;
};

/// <a|b> for two environment entries recorded by the same channel.
cplx env_overlap(const EnvEntry &a, const EnvEntry &b);

/// Standard coherent-state overlap <beta|gamma>.
cplx coherent_overlap(cplx beta, cplx gamma);

struct Branch {
    cplx coeff{1.0, 0.0};
    std::vector<ModeId> modes;
    // Aligned with `modes`: occupancy 0/1 (stored as a real number) for photon
    // modes, the coherent amplitude for field modes.
    std::vector<cplx> slots;
    std::vector<EnvEntry> env;

    int occupancy(std::size_t slot) const { return slots[slot].real() > 0.5 ? 1 : 0; }
    cplx amplitude(std::size_t slot) const { return slots[slot]; }
};

class BranchState {
public:
    static constexpr std::size_t default_branch_cap = 4096;

    BranchState() = default;
    BranchState(std::vector<ModeId> modes, std::vector<Branch> branches,
                std::size_t branch_cap = default_branch_cap);

    /// Single product branch with unit coefficient; photon modes start empty,
    /// field modes in vacuum.
    static BranchState vacuum(std::vector<ModeId> modes, std::size_t branch_cap = default_branch_cap);

    const std::vector<ModeId> &modes() const { return modes_; }
    const std::vector<Branch> &branches() const { return branches_; }
    std::size_t size() const { return branches_.size(); }
    std::size_t branch_cap() const { return cap_; }

    bool has_mode(ModeId m) const;
    std::size_t slot_of(ModeId m) const;

    /// Tr rho (includes environment overlaps).
    double trace() const;
    BranchState normalized() const;

    /// Sets a field amplitude or photon occupancy on every branch.
    BranchState with_field(ModeId m, cplx beta) const;
    BranchState with_photon(ModeId m, int occupancy) const;

    /// Merges branches with identical slots and environment tags.
    BranchState merged() const;

private:
    std::vector<ModeId> modes_;
    std::vector<Branch> branches_;
    std::size_t cap_ = default_branch_cap;
};

struct GramSpectrum {
    std::vector<double> eigenvalues;
};

/// -sum p ln p in nats over eigenvalues >= 1e-14.
double von_neumann_entropy(const GramSpectrum &spectrum);

/// <b1|b2> including coefficients and environment overlaps.
cplx branch_overlap(const Branch &b1, const Branch &b2);

/// Symmetric beam splitter (sqrt(t), i sqrt(1-t); i sqrt(1-t), sqrt(t)) on a
/// photon pair or a field pair.
BranchState apply_beamsplitter(const BranchState &s, ModeId m1, ModeId m2, double transmittance);

/// Phase shifter exp(i phi n) on one mode.
BranchState apply_phase_shift(const BranchState &s, ModeId m, double phi);

/// Cross-Kerr coupling with accumulated phase pi: the field flips sign when
/// the photon mode is occupied.
BranchState apply_cross_kerr(const BranchState &s, ModeId photon_mode, ModeId field_mode);

/// Beam splitter of reflectivity R into an unobserved environment.
BranchState apply_loss(const BranchState &s, ModeId m, double R);

/// |0>|g> -> |0>|e_1>, |1>|g> -> |1>|e_2> with <e_1|e_2> = overlap_a.
BranchState apply_env_dephasing(const BranchState &s, ModeId photon_mode, cplx overlap_a);

/// Renames a mode (free propagation to a new label).
BranchState relabel(const BranchState &s, ModeId from, ModeId to);

/// Moves modes into the environment (partial trace without evaluating anything).
BranchState trace_out(const BranchState &s, const std::vector<ModeId> &modes);

enum class Outcome { silent, click };

struct Projection {
    BranchState state; // renormalized, measured mode removed
    double probability = 0.0;
};

/// Ideal yes/no detection of one mode. The measured mode is absorbed by the
/// detector and no longer part of the returned state.
Projection project_yes_no(const BranchState &s, ModeId m, Outcome outcome);

/// Joint yes/no statistics of several modes, without conditioning. Entry
/// index k has bit (n-1-i) set when modes[i] clicks.
std::vector<double> yes_no_probabilities(const BranchState &s, const std::vector<ModeId> &modes);

/// Spectrum of the reduced density operator on `keep`, computed from the
/// coefficient matrix and the Gram matrix of the kept branch vectors.
GramSpectrum spectrum_from_branches(const BranchState &s, const std::vector<ModeId> &keep);

} // namespace catsim
