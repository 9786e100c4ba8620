#pragma once

#include "scarlab/region.hpp"
#include "scarlab/spectral.hpp"

#include <Eigen/Dense>

namespace scarlab {

enum class EnsembleKind { Canonical, Grand };

enum class EnsembleFlag {
    Ok,
    BoundaryBeta,        // energy target at/beyond the spectral edge, beta clamped
    BoundaryMu,          // number target at/beyond the attainable set, beta*mu clamped
    CanonicalFallback,   // degenerate number spread, solved as canonical
};

enum class BoundaryPolicy { Clamp, Throw };

struct EnsembleSolution {
    EnsembleKind kind = EnsembleKind::Canonical;
    double beta = 0;
    double mu = 0;      // 0 for canonical, and when beta vanishes
    double lambda = 0;  // beta * mu as solved; meaningful even at boundary clamps
    Eigen::VectorXd weights;
    double residual_energy = 0;
    double residual_number = 0;
    EnsembleFlag flag = EnsembleFlag::Ok;
    int iterations = 0;
};

struct EnsembleOptions {
    double tolerance = 1e-9;       // absolute residual target in (E, N) units
    int max_iterations = 100;
    double beta_cap = 200.0;       // |beta| before reporting a boundary solution
    double lambda_cap = 200.0;     // |beta*mu| before reporting a boundary solution
    BoundaryPolicy boundary = BoundaryPolicy::Clamp;
};

/// Gibbs weights w_i ∝ exp(-beta E_i + lambda N_i), max-shift normalized.
Eigen::VectorXd gibbs_weights(const Eigen::VectorXd& energies, const Eigen::VectorXd& numbers,
                              double beta, double lambda);

/// beta from Tr[rho_c H] = E_target by bisection on the monotone energy curve.
EnsembleSolution solve_canonical(const Eigen::VectorXd& energies, double energy_target,
                                 const EnsembleOptions& options = {});

/// (beta, mu) from the two constraints via damped Newton on the convex dual
/// log Z + beta E_t - lambda N_t; infeasible targets are reported through the
/// boundary flags (or thrown under BoundaryPolicy::Throw).
EnsembleSolution solve_grand_canonical(const Eigen::VectorXd& energies,
                                       const Eigen::VectorXd& numbers, double energy_target,
                                       double number_target, const EnsembleOptions& options = {});

double ensemble_average(const EnsembleSolution& solution, const Eigen::VectorXd& eev_column);

/// Reduced density matrix of the eigenstate mixture with the given weights.
Eigen::MatrixXcd reduced_dm_mixture(const Eigen::VectorXd& weights, const Spectrum& spectrum,
                                    const SymmetrySector& sector, const RegionMap& region);

/// Convex-hull membership of (E, N) targets in the eigenstate point cloud.
bool strictly_inside_hull(const Eigen::VectorXd& energies, const Eigen::VectorXd& numbers,
                          double energy_target, double number_target, double margin = 1e-9);

}  // namespace scarlab
