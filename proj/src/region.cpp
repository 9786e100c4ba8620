#include "scarlab/region.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <unordered_map>

namespace scarlab {

RegionMap::RegionMap(const ConstrainedBasis& basis, std::vector<int> region_sites)
    : chain_length_(basis.chain_length()), spin_(basis.spin()), region_sites_(std::move(region_sites)) {
    if (region_sites_.empty()) throw std::invalid_argument("RegionMap: region must be nonempty");
    std::sort(region_sites_.begin(), region_sites_.end());
    region_sites_.erase(std::unique(region_sites_.begin(), region_sites_.end()), region_sites_.end());
    for (int s : region_sites_)
        if (s < 0 || s >= chain_length_) throw std::invalid_argument("RegionMap: site out of range");

    const int q = basis.local_dim();
    std::vector<bool> in_region(chain_length_, false);
    for (int s : region_sites_) in_region[s] = true;

    region_dim_ = 1;
    for (std::size_t i = 0; i < region_sites_.size(); ++i) region_dim_ *= q;

    a_of_.resize(basis.dim());
    col_of_.resize(basis.dim());
    std::unordered_map<std::uint64_t, std::uint32_t> col_ids;
    col_ids.reserve(basis.dim());
    for (std::size_t s = 0; s < basis.dim(); ++s) {
        ProductState ps = basis.state(s);
        std::uint64_t a = 0, b = 0;
        for (int k = 0; k < chain_length_; ++k) {
            if (in_region[k])
                a = a * q + ps.levels[k];
            else
                b = b * q + ps.levels[k];
        }
        a_of_[s] = static_cast<std::uint32_t>(a);
        auto [it, inserted] = col_ids.emplace(b, static_cast<std::uint32_t>(col_ids.size()));
        col_of_[s] = it->second;
    }
    complement_cols_ = col_ids.size();
}

Eigen::MatrixXcd cross_reduced_dm(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& phi,
                                  const RegionMap& region) {
    if (static_cast<std::size_t>(psi.size()) != region.full_dim() ||
        static_cast<std::size_t>(phi.size()) != region.full_dim())
        throw std::invalid_argument("cross_reduced_dm: dimension mismatch");
    const std::size_t a_dim = region.region_dim();
    Eigen::MatrixXcd pa = Eigen::MatrixXcd::Zero(a_dim, region.complement_cols());
    Eigen::MatrixXcd pb = Eigen::MatrixXcd::Zero(a_dim, region.complement_cols());
    for (std::size_t s = 0; s < region.full_dim(); ++s) {
        pa(region.region_config(s), region.complement_col(s)) = psi[s];
        pb(region.region_config(s), region.complement_col(s)) = phi[s];
    }
    // rho[a,a'] = sum_b psi[a,b] conj(phi[a',b])
    return pa * pb.adjoint();
}

Eigen::MatrixXcd reduced_dm(const Eigen::VectorXcd& psi, const RegionMap& region) {
    return cross_reduced_dm(psi, psi, region);
}

double trace_distance(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho - sigma, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace scarlab
