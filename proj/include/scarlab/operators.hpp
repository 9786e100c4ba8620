#pragma once

#include "scarlab/basis.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <string>
#include <utility>
#include <vector>

namespace scarlab {

enum class SpinAxis { X, Y, Z };

/// Single-site spin-j matrix in the m = -j..j (ascending) basis.
Eigen::MatrixXcd single_site_spin(SpinAxis axis, int spin);

/// Operator in coordinate form over a chosen basis. Entries are sorted by
/// (row, col) with duplicates combined and exact zeros dropped.
struct SparseOperator {
    struct Entry {
        std::uint32_t row = 0;
        std::uint32_t col = 0;
        Complex value{};
    };

    std::size_t dim = 0;
    bool hermitian = false;
    std::vector<Entry> entries;

    static SparseOperator from_triplets(std::size_t dim, std::vector<Entry> triplets,
                                        bool hermitian);

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    Eigen::MatrixXcd dense() const;
    Eigen::SparseMatrix<Complex> to_eigen() const;
    double frobenius_norm() const;
    SparseOperator adjoint() const;
    SparseOperator scaled(Complex factor) const;
    static SparseOperator sum(const SparseOperator& a, const SparseOperator& b);
};

/// Dense matrix in symmetry-sector coordinates. With parity resolved the
/// leading block is even, the trailing block odd.
struct SectorOperator {
    Eigen::MatrixXcd mat;
    std::size_t dim_even = 0;
    std::size_t dim_odd = 0;
    bool parity_resolved = false;
};

SparseOperator build_spin_operator(SpinAxis axis, int site, const ConstrainedBasis& basis);

/// Constrained Hamiltonian: the collective s^x with transitions out of the
/// blockade-free space deleted (P H0 P restricted to the constrained basis).
SparseOperator build_hamiltonian(const ConstrainedBasis& basis);

/// Quasiparticle counter N = sum_k |y><y| on bonds, |y> = (|j-1,-j> + |j,-j+1>)/sqrt(2).
SparseOperator build_number_operator(const ConstrainedBasis& basis);

/// Observable mini-language: sums of products of single-site factors,
/// e.g. "sz(1)*sz(2)", "proj(1,0)+proj(1,-1)", "0.5*sx(3)". Sites are
/// 1-based. The resulting operator must be Hermitian.
SparseOperator build_local_observable(const std::string& spec, const ConstrainedBasis& basis);

struct SgaOperators {
    SparseOperator qz;      // sum_k s_k^z, diagonal
    SparseOperator qy;      // rotated Hamiltonian, the constrained sum_k s_k^y
    SparseOperator qplus;   // (Qy + iQz)/sqrt(2)
    SparseOperator qminus;  // (Qy - iQz)/sqrt(2)
    SparseOperator rhat;    // i (j/sqrt(2)) sum_k R_k, anti-Hermitian
    std::vector<SparseOperator> rk;  // diagonal bond operators R_k
};

SgaOperators build_sga_operators(const ConstrainedBasis& basis);

/// Permutation operators of the lattice symmetries over the constrained basis.
SparseOperator build_translation(const ConstrainedBasis& basis);
SparseOperator build_spin_flip_inversion(const ConstrainedBasis& basis);

SectorOperator project_to_sector(const SparseOperator& op, const SymmetrySector& sector,
                                 bool warn_if_noncommuting = true);

/// Unconstrained (2j+1)^D product basis for the open-system checks.
class FullProductBasis {
public:
    FullProductBasis(int chain_length, int spin,
                     std::size_t dim_cap = ConstrainedBasis::kDefaultDimCap);

    int chain_length() const { return chain_length_; }
    int spin() const { return spin_; }
    int local_dim() const { return 2 * spin_ + 1; }
    std::size_t dim() const { return dim_; }

    int level(std::size_t state, int site) const;
    std::size_t with_level(std::size_t state, int site, int new_level) const;
    std::size_t with_bond(std::size_t state, int bond, int lv_left, int lv_right) const;
    bool blockade_free(std::size_t state) const;

private:
    int chain_length_;
    int spin_;
    std::size_t dim_;
    std::vector<std::size_t> place_;  // q^(D-1-k) per site
};

/// Non-Hermitian Hamiltonian over the full product basis:
/// H_N = sum_k s_k^x - sqrt(j) M_k + sqrt(j) M_k^dag - i c sqrt(j/2) pi_k.
SparseOperator build_nonhermitian_hamiltonian(double c, const FullProductBasis& basis);

/// Full-space dissipation machinery shared by the open-system verification.
struct OpenSystemOps {
    int chain_length = 0;
    int spin = 0;
    double c = 1.0;
    std::size_t dim = 0;
    Eigen::MatrixXcd hn;                    // dense H_N
    std::vector<Eigen::MatrixXcd> m_ops;    // M_k
    std::vector<Eigen::MatrixXcd> pi_ops;   // pi_k projectors
    Eigen::MatrixXcd number_op;             // sum_k M_k^dag M_k
    Eigen::MatrixXcd constrained_projector; // P = prod_k (1 - pi_k)

    static OpenSystemOps build(int chain_length, int spin, double c,
                               std::size_t dim_cap = ConstrainedBasis::kDefaultDimCap);

    /// -i H_N rho + i rho H_N^dag + J(rho) with the signed two-channel jump term.
    Eigen::MatrixXcd liouvillian(const Eigen::MatrixXcd& rho) const;

    /// (P_plus, P_minus): channel-1 rate and the channel-2 magnitude rate.
    std::pair<double, double> jump_rates(const Eigen::MatrixXcd& rho) const;
};

}  // namespace scarlab
