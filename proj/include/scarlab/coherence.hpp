#pragma once

#include "scarlab/region.hpp"
#include "scarlab/spectral.hpp"

#include <vector>

namespace scarlab {

/// One eigenstate pair on the (mean, difference) planes. Stored once per
/// unordered pair; statistics treat (omega, nu) and (-omega, -nu) as the same
/// sample by the i <-> i' exchange symmetry.
struct PairSample {
    std::uint32_t i = 0;
    std::uint32_t i2 = 0;
    double mean_energy = 0;   // (E_i + E_i')/2
    double mean_number = 0;   // (N_i + N_i')/2
    double omega = 0;         // E_i - E_i'
    double nu = 0;            // N_i - N_i'
    double value = 0;         // CCP or |<E_i|O|E_i'>|^2
};

/// Gaussian kernel density of eigenstates on the energy-quasiparticle plane,
/// normalized to unit integral: Z = 1/(2 pi n h1 h2).
class DosModel {
public:
    DosModel(Eigen::VectorXd energies, Eigen::VectorXd numbers, double h1, double h2);
    static DosModel with_default_widths(const Eigen::VectorXd& energies,
                                        const Eigen::VectorXd& numbers);

    double h1() const { return h1_; }
    double h2() const { return h2_; }
    double normalization() const;  // Z
    std::size_t state_count() const { return static_cast<std::size_t>(energies_.size()); }
    const Eigen::VectorXd& energies() const { return energies_; }
    const Eigen::VectorXd& numbers() const { return numbers_; }

    double operator()(double energy, double number) const;

private:
    Eigen::VectorXd energies_, numbers_;
    double h1_, h2_;
};

/// Omega evaluated at the pair midpoints ((E_i+E_j)/2, (N_i+N_j)/2), as a
/// symmetric matrix over eigenstates.
Eigen::MatrixXd pairwise_dos_matrix(const DosModel& dos, const Eigen::VectorXd& energies,
                                    const Eigen::VectorXd& numbers, int threads = 1);

/// Eigenstate amplitudes split by region configuration: block(a) holds, per
/// state, the complement components of the full-space vector whose region
/// sites carry configuration a. Everything downstream of cross-density
/// matrices reads from these blocks.
class RegionComponents {
public:
    RegionComponents(const Spectrum& spectrum, const SymmetrySector& sector, const RegionMap& region);

    std::size_t n_states() const { return n_states_; }
    std::size_t region_dim() const { return region_dim_; }
    std::size_t complement_cols() const { return cols_; }

    const Eigen::MatrixXd& block(std::size_t a) const { return blocks_[a]; }

    /// rho_A^{i,i2} (real in this eigenbasis)
    Eigen::MatrixXd cross_reduced_dm(std::size_t i, std::size_t i2) const;
    /// T_{i,i2} = ||rho_A^{i,i2}||_F^2
    double ccp(std::size_t i, std::size_t i2) const;
    /// all-pairs CCP via blocked Gram products
    Eigen::MatrixXd ccp_matrix(int threads = 1) const;

    /// per-eigenstate reduced density matrix and weighted mixtures
    Eigen::MatrixXd state_dm(std::size_t i) const;
    Eigen::MatrixXd mixture_dm(const Eigen::VectorXd& weights) const;

private:
    std::size_t n_states_ = 0, region_dim_ = 0, cols_ = 0;
    std::vector<Eigen::MatrixXd> blocks_;          // region_dim matrices, n_states x cols
    std::vector<Eigen::VectorXd> state_dm_table_;  // per (a,a2): n_states entries
};

/// All unordered eigenstate pairs as samples with value = 0 (filled later) or
/// a provided per-pair matrix (CCP, squared elements, ...).
std::vector<PairSample> make_pair_samples(const Eigen::VectorXd& energies,
                                          const Eigen::VectorXd& numbers,
                                          const Eigen::MatrixXd* values = nullptr);

/// Equal-density ellipse selection on the (omega, nu) plane: fit a zero-mean
/// Gaussian surrogate (pair-exchange symmetry centers the cloud) and keep the
/// samples below the percentile of Mahalanobis distance. Returns indices.
std::vector<std::uint32_t> select_pairs_by_density(const std::vector<PairSample>& samples,
                                                   double percentile);

struct BinnedMeans {
    std::vector<double> mean_x, mean_y, mean_value;
    std::vector<std::size_t> count;
};

/// Grid-bin samples on the (x, y) plane; bins under min_count are dropped.
BinnedMeans bin_samples_2d(const std::vector<PairSample>& samples,
                           const std::vector<std::uint32_t>& selection, int nx, int ny,
                           std::size_t min_count);

struct CcpDosFit {
    double a = 0;       // amplitude of value^-1 ~ a * Omega
    double h1 = 0, h2 = 0;
    double r2 = 0;      // coefficient of determination in log space
    std::size_t bins_used = 0;
};

/// Nonlinear least squares of binned inverse CCP against a*Omega(E,N; h1,h2),
/// optimized in log space over (a, h1, h2) from the seed widths.
CcpDosFit fit_ccp_vs_dos(const std::vector<PairSample>& samples,
                         const std::vector<std::uint32_t>& selection,
                         const Eigen::VectorXd& energies, const Eigen::VectorXd& numbers,
                         double seed_h1, double seed_h2, int grid_e = 20, int grid_n = 20,
                         std::size_t min_count = 5);

struct AmplitudeFit {
    double a = 0;
    double r2 = 0;
    std::size_t bins_used = 0;
};

/// Amplitude-only fit of binned inverse values against a*Omega at fixed widths.
AmplitudeFit fit_inverse_vs_dos(const BinnedMeans& bins, const DosModel& dos);

}  // namespace scarlab
