#pragma once

#include "scarlab/coherence.hpp"
#include "scarlab/spectral.hpp"

#include <limits>
#include <string>
#include <vector>

namespace scarlab {

/// Translation-invariant initial state in sector coordinates.
struct InitialState {
    std::string name;
    Eigen::VectorXd sector_coords;  // normalized
};

/// "psi1", "psi2", or "product:m1,m2,..." (m values, comma separated).
InitialState make_initial_state(const std::string& spec, const ConstrainedBasis& basis,
                                const SymmetrySector& sector);
InitialState make_product_initial_state(const ProductState& state, const ConstrainedBasis& basis,
                                        const SymmetrySector& sector);
/// One symmetrized state per translation orbit.
std::vector<InitialState> enumerate_initial_states(const ConstrainedBasis& basis,
                                                   const SymmetrySector& sector);

struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::string observable;
    std::string state;
};

/// Observable pushed to the energy eigenbasis once; serves every initial
/// state afterwards in O(n) or O(n^2).
class EigenbasisObservable {
public:
    EigenbasisObservable(const Spectrum& spectrum, const SectorOperator& obs);

    const Spectrum& spectrum() const { return *spectrum_; }
    const Eigen::MatrixXd& matrix() const { return a_; }
    const Eigen::MatrixXd& a_sq() const { return a_sq_; }
    const Eigen::VectorXd& diagonal() const { return diag_; }
    double norm() const { return a_.norm(); }

    /// sum over same-degenerate-group pairs (including i = i') of
    /// w_i w_i' |A_{ii'}|^2 — the part excluded from exact fluctuations
    double same_group_quadratic(const Eigen::VectorXd& squared_weights) const;

    /// coefficients c_i = <E_i|psi0> of a sector-coordinate state
    Eigen::VectorXd coefficients(const Eigen::VectorXd& psi0_sector) const;

    /// degeneracy-aware diagonal-ensemble average
    double long_time_average(const Eigen::VectorXd& coeffs) const;
    /// sum over pairs in distinct degenerate groups of |c|^2 |c|^2 |A|^2
    double exact_fluctuation(const Eigen::VectorXd& coeffs) const;
    /// sum_{i != i'} |c|^2 |c'|^2 M_{ii'} for a supplied pair-summand matrix
    /// (pass Omega^-1 entries for the DOS estimate, CCP entries for the CCP one)
    double estimate_fluctuation(const Eigen::VectorXd& coeffs,
                                const Eigen::MatrixXd& pair_summands) const;

    TimeSeries expectation_series(const Eigen::VectorXd& coeffs, const std::vector<double>& times) const;

private:
    const Spectrum* spectrum_;
    Eigen::MatrixXd a_;        // V^T O V
    Eigen::MatrixXd a_sq_;     // elementwise square of a_
    Eigen::VectorXd diag_;
    std::vector<std::vector<std::uint32_t>> groups_;  // degenerate-group members
};

TimeSeries evolve_expectation(const Spectrum& spectrum, const Eigen::VectorXd& psi0_sector,
                              const SectorOperator& obs, const std::vector<double>& times);
TimeSeries fidelity_series(const Spectrum& spectrum, const Eigen::VectorXd& psi0_sector,
                           const std::vector<double>& times);
double long_time_average(const Spectrum& spectrum, const Eigen::VectorXd& psi0_sector,
                         const SectorOperator& obs);

struct TimeOracleOptions {
    double t_max = 1e4;
    double dt = 0.05;
};

struct TimeOracleResult {
    double mean = 0;
    double variance = 0;
};

/// Trapezoid time average and variance of the exact eigenbasis series.
TimeOracleResult time_average_oracle(const EigenbasisObservable& obs, const Eigen::VectorXd& coeffs,
                                     const TimeOracleOptions& options = {});

struct TemporalFluctuation {
    double exact_sum = std::numeric_limits<double>::quiet_NaN();
    double time_oracle = std::numeric_limits<double>::quiet_NaN();
    double dos_estimate = std::numeric_limits<double>::quiet_NaN();
    double ccp_estimate = std::numeric_limits<double>::quiet_NaN();
};

/// All four fluctuation routes; pass nullptr to skip a route. dos_pairs_inv
/// holds Omega^-1 at the pair midpoints, ccp_pairs the CCP matrix.
TemporalFluctuation temporal_fluctuation(const EigenbasisObservable& obs,
                                         const Eigen::VectorXd& psi0_sector,
                                         const Eigen::MatrixXd* dos_pairs_inv,
                                         const Eigen::MatrixXd* ccp_pairs,
                                         const TimeOracleOptions* oracle);

/// Per-orbit summary over every translation-invariant product initial state.
struct BulkDynamics {
    std::vector<std::string> names;
    Eigen::VectorXd energy;        // sum |c|^2 E_i  (equals <psi|H|psi>)
    Eigen::VectorXd number;        // sum |c|^2 N_i  (diagonal-ensemble N)
    Eigen::VectorXd longtime_avg;
    Eigen::VectorXd fluct_exact;
    Eigen::VectorXd fluct_dos;
    Eigen::VectorXd fluct_ccp;
};

BulkDynamics bulk_dynamics(const EigenbasisObservable& obs, const ConstrainedBasis& basis,
                           const SymmetrySector& sector, const Eigen::VectorXd& state_numbers,
                           const Eigen::MatrixXd* dos_pairs_inv, const Eigen::MatrixXd* ccp_pairs,
                           int threads = 1);

}  // namespace scarlab
