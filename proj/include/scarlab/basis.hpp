#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace scarlab {

using Complex = std::complex<double>;

/// Magnetic quantum number of a single spin-j site.
struct SiteState {
    int m = 0;
};

/// Product state of a length-D chain, stored as levels lv = m + j in [0, 2j].
struct ProductState {
    std::vector<std::int8_t> levels;

    int size() const { return static_cast<int>(levels.size()); }
    int m(int site, int spin) const { return static_cast<int>(levels[site]) - spin; }

    bool operator==(const ProductState&) const = default;
};

/// Constrained Hilbert space of a periodic spin-j chain: all product states
/// with no adjacent |j,-j> pattern (cyclic). States are kept in lexicographic
/// order of (m_1,...,m_D) with m ascending from -j, so indices are stable.
class ConstrainedBasis {
public:
    static constexpr std::size_t kDefaultDimCap = 2'000'000;

    /// Enumerate the blockade-free states of a length-D, spin-j chain.
    /// Rejects D < 2, j < 1 and bases larger than dim_cap.
    static ConstrainedBasis enumerate(int chain_length, int spin,
                                      std::size_t dim_cap = kDefaultDimCap);

    /// Number of blockade-free cyclic strings, computed from the transfer
    /// matrix (all-ones with the j -> -j entry zeroed): Tr(T^D).
    static std::uint64_t transfer_matrix_dim(int chain_length, int spin);

    int chain_length() const { return chain_length_; }
    int spin() const { return spin_; }
    int local_dim() const { return 2 * spin_ + 1; }
    std::size_t dim() const { return keys_.size(); }

    ProductState state(std::size_t index) const;
    std::uint64_t state_key(std::size_t index) const { return keys_[index]; }

    /// Ordinal of s in the basis, or nullopt when s is blockaded.
    /// Throws on length mismatch or out-of-range levels.
    std::optional<std::size_t> index_of(const ProductState& s) const;

    bool blockade_free(const ProductState& s) const;

    /// Cyclic shift moving site k to site k+shift (mod D).
    ProductState translated(const ProductState& s, int shift) const;
    std::size_t translated_index(std::size_t index, int shift) const;

    /// Combined site inversion (k -> D-k+1) and global spin flip (m -> -m).
    ProductState spin_flip_inverted(const ProductState& s) const;
    std::size_t spin_flip_inverted_index(std::size_t index) const;

    std::uint64_t pack(const ProductState& s) const;
    ProductState unpack(std::uint64_t key) const;

private:
    ConstrainedBasis(int chain_length, int spin) : chain_length_(chain_length), spin_(spin) {}

    int chain_length_ = 0;
    int spin_ = 0;
    std::vector<std::uint64_t> keys_;  // sorted base-q keys, site 1 most significant
};

/// Momentum-zero (translation-invariant) sector of a ConstrainedBasis, with
/// optional resolution into blocks of the site-inversion + spin-flip symmetry.
/// Sector basis vectors are orthonormal real combinations of full-basis states;
/// with parity resolved the even block comes first, then the odd block.
class SymmetrySector {
public:
    struct BasisVector {
        std::vector<std::uint32_t> states;  // full-basis indices
        std::vector<double> coeff;
        std::int8_t parity = 0;  // +1 even, -1 odd, 0 unresolved
    };

    static SymmetrySector momentum_zero(const ConstrainedBasis& basis, bool resolve_parity = true);

    int chain_length() const { return chain_length_; }
    int spin() const { return spin_; }
    int momentum() const { return 0; }
    bool parity_resolved() const { return parity_resolved_; }

    std::size_t dim() const { return vectors_.size(); }
    std::size_t dim_even() const { return dim_even_; }
    std::size_t dim_odd() const { return dim() - dim_even_; }
    std::size_t full_dim() const { return full_dim_; }

    const BasisVector& vec(std::size_t p) const { return vectors_[p]; }
    std::int8_t parity(std::size_t p) const { return vectors_[p].parity; }

    /// Image of each full-basis state under a unit translation.
    std::uint32_t translated_state(std::size_t full_index) const { return translation_image_[full_index]; }

    /// Orbits of the translation group, ordered by smallest member index.
    std::size_t orbit_count() const { return orbit_period_.size(); }
    int orbit_period(std::size_t orbit) const { return orbit_period_[orbit]; }
    std::uint32_t orbit_representative(std::size_t orbit) const { return orbit_rep_[orbit]; }
    std::size_t orbit_of_state(std::size_t full_index) const { return orbit_of_state_[full_index]; }

    /// Sector coordinates of the normalized momentum-zero vector built on one
    /// orbit (at most two nonzero entries when parity is resolved).
    std::vector<std::pair<std::size_t, double>> orbit_in_sector(std::size_t orbit) const;

    Eigen::VectorXd expand(const Eigen::VectorXd& sector_coords) const;
    Eigen::VectorXcd expand(const Eigen::VectorXcd& sector_coords) const;
    Eigen::VectorXd project(const Eigen::VectorXd& full) const;
    Eigen::VectorXcd project(const Eigen::VectorXcd& full) const;

private:
    int chain_length_ = 0;
    int spin_ = 0;
    bool parity_resolved_ = false;
    std::size_t dim_even_ = 0;
    std::size_t full_dim_ = 0;
    std::vector<BasisVector> vectors_;
    std::vector<int> orbit_period_;
    std::vector<std::uint32_t> orbit_rep_;
    std::vector<std::uint32_t> orbit_of_state_;
    std::vector<std::uint32_t> translation_image_;
    // orbit -> (sector index, coefficient) pairs
    std::vector<std::vector<std::pair<std::size_t, double>>> orbit_to_sector_;
};

}  // namespace scarlab
