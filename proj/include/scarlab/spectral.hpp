#pragma once

#include "scarlab/operators.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace scarlab {

/// Full eigendecomposition of a sector Hamiltonian, merged across parity
/// blocks and sorted by energy. Eigenvectors live in sector coordinates and
/// are real (the momentum-zero basis is real and H is real symmetric there);
/// the sign convention makes the largest-magnitude component positive.
struct Spectrum {
    int chain_length = 0;
    int spin = 0;
    bool parity_resolved = false;
    std::size_t dim_even = 0;
    std::size_t dim_odd = 0;
    Eigen::VectorXd energies;            // ascending
    Eigen::MatrixXd vectors;             // column i = |E_i> in sector coordinates
    std::vector<std::int8_t> parity;     // +1 / -1 / 0 per state
    std::vector<std::uint32_t> degeneracy_group;  // grouped within tolerance
    std::size_t degeneracy_group_count = 0;
    double degeneracy_tolerance = 0;

    std::size_t dim() const { return static_cast<std::size_t>(energies.size()); }
};

/// Dense eigensolve of a Hermitian (and, in this model, real-symmetric)
/// sector operator; parity blocks are diagonalized separately when resolved.
Spectrum diagonalize(const SectorOperator& op, int chain_length, int spin);

/// Checked view of a sector operator whose entries must be real.
Eigen::MatrixXd real_sector_matrix(const SectorOperator& op, double tol = 1e-12);

/// Per-eigenstate table: energy, quasiparticle number, EEVs of registered
/// observables, squared overlaps with reference states, scar tags.
struct EEVTable {
    Eigen::VectorXd energy;
    Eigen::VectorXd number;
    std::vector<std::string> observable_names;
    Eigen::MatrixXd observables;  // n_states x n_observables, O_ii
    Eigen::MatrixXd overlaps;     // n_states x n_references, |<E_i|psi>|^2
    std::vector<std::int8_t> parity;
    std::vector<std::uint8_t> scar;

    std::size_t dim() const { return static_cast<std::size_t>(energy.size()); }
};

EEVTable eev_table(const Spectrum& spectrum, const SectorOperator& number_op,
                   const std::vector<std::pair<std::string, SectorOperator>>& observables,
                   const std::vector<Eigen::VectorXd>& references);

/// Scar tagging: within each unit-width energy bin centered on an integer,
/// the argmax-overlap state is tagged when its squared overlap exceeds
/// theta_rel times the global maximum. Returns tagged indices, ascending.
std::vector<std::size_t> tag_scars(EEVTable& table, int overlap_column, double theta_rel = 1e-2);

enum class SurfaceMode { EnergyOnly, EnergyNumber };

/// Least-squares polynomial fit of an EEV column over (E) or (E, N),
/// computed on standardized coordinates.
struct SurfaceFit {
    SurfaceMode mode = SurfaceMode::EnergyOnly;
    int degree = 0;
    double e_center = 0, e_scale = 1, n_center = 0, n_scale = 1;
    Eigen::VectorXd coeffs;      // graded-lexicographic monomials in (x[, y])
    Eigen::VectorXd deviations;  // per state: value - fit
    double rmse = 0;

    double evaluate(double energy, double number) const;
};

SurfaceFit fit_eev_surface(const EEVTable& table, int observable_column, SurfaceMode mode,
                           int degree = 4);

/// Versioned binary cache with a payload checksum; load refuses mismatched
/// geometry/sector and corrupt or truncated files.
void cache_store(const Spectrum& spectrum, const std::filesystem::path& path);
Spectrum cache_load(const std::filesystem::path& path, int chain_length, int spin,
                    bool parity_resolved);

}  // namespace scarlab
