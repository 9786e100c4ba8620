#pragma once

#include "scarlab/basis.hpp"

#include <Eigen/Dense>

#include <vector>

namespace scarlab {

/// Splits every constrained-basis state into (region configuration, complement
/// column): the indexing backbone for partial traces over a site subset A.
/// Complement columns are numbered in order of first appearance over the
/// lexicographic state sweep, so the map is deterministic.
class RegionMap {
public:
    RegionMap(const ConstrainedBasis& basis, std::vector<int> region_sites);

    int chain_length() const { return chain_length_; }
    int spin() const { return spin_; }
    const std::vector<int>& region_sites() const { return region_sites_; }

    std::size_t full_dim() const { return a_of_.size(); }
    std::size_t region_dim() const { return region_dim_; }       // (2j+1)^|A|
    std::size_t complement_cols() const { return complement_cols_; }

    std::uint32_t region_config(std::size_t full_state) const { return a_of_[full_state]; }
    std::uint32_t complement_col(std::size_t full_state) const { return col_of_[full_state]; }

private:
    int chain_length_ = 0;
    int spin_ = 0;
    std::vector<int> region_sites_;
    std::size_t region_dim_ = 0;
    std::size_t complement_cols_ = 0;
    std::vector<std::uint32_t> a_of_;
    std::vector<std::uint32_t> col_of_;
};

/// Tr_complement(|psi><phi|) over the region of the map.
Eigen::MatrixXcd cross_reduced_dm(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& phi,
                                  const RegionMap& region);

/// Reduced density matrix of a pure full-basis state.
Eigen::MatrixXcd reduced_dm(const Eigen::VectorXcd& psi, const RegionMap& region);

/// Trace-norm distance (1/2) sum |eig(rho - sigma)| between Hermitian matrices.
double trace_distance(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma);

}  // namespace scarlab
