#pragma once

#include "scarlab/coherence.hpp"
#include "scarlab/operators.hpp"
#include "scarlab/spectral.hpp"

namespace scarlab {

struct CommutatorResiduals {
    double h_norm = 0;          // Frobenius norm of H
    double qz_relation = 0;     // ||[H,Qz] + i Qy||
    double qy_relation = 0;     // ||[H,Qy] - i Qz - sqrt(2) R||
    double qplus_relation = 0;  // ||[H,Q+] - Q+ - R||
    double qminus_relation = 0; // ||[H,Q-] + Q- - R||
};

/// Exact algebra checks, evaluated with sparse products over the full
/// constrained basis.
CommutatorResiduals verify_sga_commutators(const SparseOperator& h, const SgaOperators& sga);

/// <E_i|O|E_i'> for a (real) sector operator.
Eigen::MatrixXd eigenbasis_matrix(const Spectrum& spectrum, const SectorOperator& op);

struct SgaRatioOptions {
    double resonance_tolerance = 1e-8;  // pairs with |omega -+ 1| below this are излиш搬 excluded
};

struct SgaReport {
    Eigen::VectorXd numerator;           // n_i
    Eigen::VectorXd d_plus, d_minus;     // denominators
    Eigen::VectorXd r_plus, r_minus;     // n_i / d_i^{+-}, NaN when undefined
    Eigen::VectorXd diag_elements;       // <E_i|Rk|E_i>
    std::size_t resonant_pairs_plus = 0;
    std::size_t resonant_pairs_minus = 0;
};

/// Ladder-deviation ratios from the off-diagonal matrix elements of R_k,
/// with omega = E_{i'} - E_i and the (omega -+ 1)^2 denominators.
SgaReport sga_ratios(const Spectrum& spectrum, const Eigen::MatrixXd& rk_elements,
                     const SgaRatioOptions& options = {});

/// Direct-form ratio <R^dag R> / <Q^-+ Q^+-> for one eigenstate (cross-check).
double sga_ratio_direct(const Spectrum& spectrum, const SectorOperator& rhat_sector,
                        const SectorOperator& q_ladder_sector, std::size_t state);

struct GaussianFit {
    double amplitude = 0;
    double center = 0;
    double width = 0;
    double rmse = 0;
    bool converged = false;
    std::size_t bins_used = 0;

    double operator()(double omega) const;
};

struct GOmegaOptions {
    int bins = 60;
    std::size_t min_count = 10;
    double resonance_tolerance = 1e-8;
};

/// Bin |<E_i'|Rk|E_i>|^2 Omega / (omega -+ 1)^2 along omega and fit the bin
/// means with a Gaussian (least squares, Levenberg-Marquardt).
GaussianFit fit_g_omega(const Spectrum& spectrum, const Eigen::MatrixXd& rk_elements,
                        const Eigen::MatrixXd& dos_pairs, bool plus,
                        const GOmegaOptions& options = {});

/// ETH-based denominator estimate d_fit = sum_{i' != i} g(omega)/Omega.
Eigen::VectorXd estimate_d_fit(const Spectrum& spectrum, const GaussianFit& g,
                               const Eigen::MatrixXd& dos_pairs, bool plus,
                               double resonance_tolerance = 1e-8);

struct OffdiagWindow {
    double omega_min = 0.4;
    double omega_max = 1.6;
};

/// Appendix-style check: squared R_k elements inside an omega window, binned
/// on the (E, N) plane and fitted as value^-1 ~ a * Omega.
AmplitudeFit offdiag_dos_check(const Spectrum& spectrum, const Eigen::MatrixXd& rk_elements,
                               const Eigen::VectorXd& numbers, const DosModel& dos,
                               const OffdiagWindow& window = {}, int grid_e = 20, int grid_n = 20,
                               std::size_t min_count = 5);

}  // namespace scarlab
