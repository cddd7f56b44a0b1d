#pragma once

// Truncated Fock-space simulator used as an independent oracle for the
// branch calculus.
//
// Two representations:
//   * FockDensity - a dense density matrix over a handful of small modes
//     (reduced states, single-mode channel checks).
//   * FockState   - a mixed state stored as an ensemble of unnormalized pure
//     vectors, rho = sum_k |v_k><v_k|. Environments and loss ancillas are
//     explicit registers that get traced out, which splits each vector into
//     its ancilla components. Dense density matrices over four field modes do
//     not fit in memory at the cutoffs the oracle needs.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "catsim/branch.hpp"
#include "catsim/errors.hpp"
#include "catsim/mode.hpp"

namespace catsim::fock {

using cplx = std::complex<double>;

struct FockCutoffPolicy {
    std::optional<int> explicit_cutoff;
    double tail_tolerance = 1e-12;
};

/// Smallest n_max >= 4 whose Poisson tail beyond n_max is <= tail_tolerance.
int derive_cutoff(double mean_photons, const FockCutoffPolicy &policy = {});

/// Normalized truncated coherent state of dimension cutoff + 1.
Eigen::VectorXcd coherent_vector(cplx alpha, const FockCutoffPolicy &policy = {});
Eigen::VectorXcd coherent_vector(cplx alpha, int dim);

/// Weight of the untruncated coherent state that lies inside `dim` levels.
double captured_weight(cplx alpha, int dim);

class FockDensity {
public:
    FockDensity(std::vector<int> mode_dims, Eigen::MatrixXcd data);
    static FockDensity pure(std::vector<int> mode_dims, const Eigen::VectorXcd &psi);

    const std::vector<int> &mode_dims() const { return dims_; }
    const Eigen::MatrixXcd &data() const { return data_; }
    int dim() const { return static_cast<int>(data_.rows()); }

    /// Throws DomainError when not Hermitian, not trace one or not positive.
    void validate() const;
    double purity() const;

private:
    std::vector<int> dims_;
    Eigen::MatrixXcd data_;
};

FockDensity partial_trace(const FockDensity &rho, const std::vector<std::size_t> &keep);

/// Von Neumann entropy in nats; eigenvalues below 1e-14 are dropped.
double entropy(const FockDensity &rho);
double entropy_of_eigenvalues(const Eigen::VectorXd &eigenvalues);

/// Loss on one mode: coupling to a vacuum ancilla through a beam splitter of
/// transmittance 1 - R, then tracing the ancilla.
FockDensity loss_channel(const FockDensity &rho, std::size_t mode, double R);

/// Matrix elements of the symmetric beam splitter on a truncated two-mode
/// space: column (n1, n2) -> row (m1, m2), index n1 * d2 + n2.
Eigen::MatrixXcd beamsplitter_matrix(int d1, int d2, double transmittance);

/// Diagonal conditional-phase exp(i pi n1 n2).
Eigen::MatrixXcd kerr_matrix(int d1, int d2);

/// Registers of a FockState are identified by integer labels: mode labels of
/// the apparatus, or private labels for ancillas.
class FockState {
public:
    static constexpr std::size_t max_dimension = std::size_t{1} << 23;

    FockState() = default;
    /// Product of pure single-register states.
    static FockState product(const std::vector<int> &labels, const std::vector<Eigen::VectorXcd> &factors);

    const std::vector<int> &labels() const { return labels_; }
    const std::vector<int> &dims() const { return dims_; }
    const std::vector<Eigen::VectorXcd> &members() const { return members_; }
    std::size_t dimension() const;
    std::size_t position(int label) const;
    bool has(int label) const;

    double trace() const;
    FockState normalized() const;

    /// Re-expresses the ensemble through the eigenvectors of rho and drops
    /// eigenvalues below 1e-12 of the trace.
    FockState compressed() const;

    /// Tensor another pure register onto the state.
    FockState with_register(int label, const Eigen::VectorXcd &factor) const;

    /// Applies a (d1*d2 x d1*d2) operator on two registers.
    FockState apply_two(int l1, int l2, const Eigen::MatrixXcd &op) const;
    /// Applies a (d x d) operator on one register.
    FockState apply_one(int l, const Eigen::MatrixXcd &op) const;

    /// Traces one register; every member splits into its register components.
    FockState traced(int label) const;
    FockState relabeled(int from, int to) const;

    /// Gram-based eigenvalues of the normalized state.
    Eigen::VectorXd spectrum() const;

    /// Dense reduced density over the listed registers (in the listed order).
    FockDensity reduced(const std::vector<int> &keep) const;

    FockState(std::vector<int> labels, std::vector<int> dims, std::vector<Eigen::VectorXcd> members);

private:
    std::vector<int> labels_;
    std::vector<int> dims_;
    std::vector<Eigen::VectorXcd> members_;
};

FockState apply_unitary_bs(const FockState &s, ModeId m1, ModeId m2, double transmittance);
FockState apply_unitary_kerr(const FockState &s, ModeId photon_mode, ModeId field_mode);
FockState apply_phase_shift(const FockState &s, ModeId m, double phi);

/// Loss through an explicit vacuum ancilla of the same dimension as the mode.
FockState loss_channel(const FockState &s, ModeId m, double R);

/// Dephasing through an explicit two-level environment prepared so that the
/// environment states attached to occupancy 0 and 1 overlap by `a`.
FockState dephasing_channel(const FockState &s, ModeId photon_mode, cplx a);

struct FockProjection {
    FockState state;
    double probability = 0.0;
};

/// Ideal yes/no detection of one register (silent = vacuum projector); the
/// register is removed.
FockProjection project_yes_no(const FockState &s, ModeId m, Outcome outcome);

/// Joint yes/no statistics, same indexing as the branch-engine version.
std::vector<double> yes_no_probabilities(const FockState &s, const std::vector<ModeId> &modes);

/// Expands a branch state into the Fock basis over the given dimensions.
FockState expand(const BranchState &s, const std::vector<int> &dims);

/// Uhlmann fidelity (squared convention) between two ensembles over the same registers.
double fidelity(const FockState &a, const FockState &b);

/// Fidelity between a Fock-engine state and a branch state expanded at the
/// same cutoffs.
double fidelity_with_branch(const FockState &rho, const BranchState &s);

/// Frobenius distance ||rho_a - rho_b||_F of the normalized or raw ensembles.
double frobenius_distance(const FockState &a, const FockState &b);

} // namespace catsim::fock
