#include "scarlab/basis.hpp"

#include <algorithm>
#include <cmath>

namespace scarlab {

namespace {

void check_geometry(int chain_length, int spin) {
    if (chain_length < 2)
        throw std::invalid_argument("ConstrainedBasis: chain length must be >= 2 (cyclic blockade undefined)");
    if (spin < 1) throw std::invalid_argument("ConstrainedBasis: spin size must be >= 1");
    if (chain_length > 40) throw std::invalid_argument("ConstrainedBasis: chain length out of supported range");
}

}  // namespace

std::uint64_t ConstrainedBasis::transfer_matrix_dim(int chain_length, int spin) {
    check_geometry(chain_length, spin);
    const int q = 2 * spin + 1;
    // T is all ones except T[j -> -j] = 0; levels: j is q-1, -j is 0.
    std::vector<std::uint64_t> t(q * q, 1);
    t[(q - 1) * q + 0] = 0;
    std::vector<std::uint64_t> power(q * q, 0);
    for (int a = 0; a < q; ++a) power[a * q + a] = 1;
    std::vector<std::uint64_t> base = t, tmp(q * q);
    int e = chain_length;
    while (e > 0) {
        if (e & 1) {
            std::fill(tmp.begin(), tmp.end(), 0);
            for (int a = 0; a < q; ++a)
                for (int c = 0; c < q; ++c)
                    for (int b = 0; b < q; ++b) tmp[a * q + b] += power[a * q + c] * base[c * q + b];
            power.swap(tmp);
        }
        e >>= 1;
        if (e == 0) break;
        std::fill(tmp.begin(), tmp.end(), 0);
        for (int a = 0; a < q; ++a)
            for (int c = 0; c < q; ++c)
                for (int b = 0; b < q; ++b) tmp[a * q + b] += base[a * q + c] * base[c * q + b];
        base.swap(tmp);
    }
    std::uint64_t trace = 0;
    for (int a = 0; a < q; ++a) trace += power[a * q + a];
    return trace;
}

ConstrainedBasis ConstrainedBasis::enumerate(int chain_length, int spin, std::size_t dim_cap) {
    check_geometry(chain_length, spin);
    const std::uint64_t expected = transfer_matrix_dim(chain_length, spin);
    if (expected > dim_cap)
        throw std::runtime_error("ConstrainedBasis: dimension " + std::to_string(expected) +
                                 " exceeds cap " + std::to_string(dim_cap));

    ConstrainedBasis basis(chain_length, spin);
    const int q = 2 * spin + 1;
    const int D = chain_length;
    basis.keys_.reserve(expected);

    // Odometer over levels, site 1 most significant; prune open-chain blockade
    // violations as digits advance, check the wrap-around bond at the end.
    std::vector<std::int8_t> lv(D, 0);
    int pos = 0;
    while (true) {
        if (pos == D) {
            if (!(lv[D - 1] == q - 1 && lv[0] == 0)) {
                std::uint64_t key = 0;
                for (int k = 0; k < D; ++k) key = key * q + lv[k];
                basis.keys_.push_back(key);
            }
            --pos;
            while (pos >= 0 && lv[pos] == q - 1) --pos;
            if (pos < 0) break;
            ++lv[pos];
            for (int k = pos + 1; k < D; ++k) lv[k] = 0;
            ++pos;
            continue;
        }
        if (pos > 0 && lv[pos - 1] == q - 1 && lv[pos] == 0) {
            // adjacent |j,-j>: skip this digit value
            ++lv[pos];
            continue;
        }
        ++pos;
    }
    // The odometer emits keys in increasing order already.
    return basis;
}

std::uint64_t ConstrainedBasis::pack(const ProductState& s) const {
    const int q = local_dim();
    if (s.size() != chain_length_) throw std::invalid_argument("ProductState: length mismatch");
    std::uint64_t key = 0;
    for (int k = 0; k < chain_length_; ++k) {
        if (s.levels[k] < 0 || s.levels[k] >= q) throw std::invalid_argument("ProductState: |m| > j");
        key = key * q + s.levels[k];
    }
    return key;
}

ProductState ConstrainedBasis::unpack(std::uint64_t key) const {
    const int q = local_dim();
    ProductState s;
    s.levels.assign(chain_length_, 0);
    for (int k = chain_length_ - 1; k >= 0; --k) {
        s.levels[k] = static_cast<std::int8_t>(key % q);
        key /= q;
    }
    return s;
}

ProductState ConstrainedBasis::state(std::size_t index) const { return unpack(keys_.at(index)); }

std::optional<std::size_t> ConstrainedBasis::index_of(const ProductState& s) const {
    const std::uint64_t key = pack(s);
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - keys_.begin());
}

bool ConstrainedBasis::blockade_free(const ProductState& s) const {
    const int q = local_dim();
    if (s.size() != chain_length_) throw std::invalid_argument("ProductState: length mismatch");
    for (int k = 0; k < chain_length_; ++k)
        if (s.levels[k] == q - 1 && s.levels[(k + 1) % chain_length_] == 0) return false;
    return true;
}

ProductState ConstrainedBasis::translated(const ProductState& s, int shift) const {
    const int D = chain_length_;
    int r = ((shift % D) + D) % D;
    ProductState out;
    out.levels.resize(D);
    for (int k = 0; k < D; ++k) out.levels[(k + r) % D] = s.levels[k];
    return out;
}

std::size_t ConstrainedBasis::translated_index(std::size_t index, int shift) const {
    auto t = index_of(translated(state(index), shift));
    if (!t) throw std::logic_error("ConstrainedBasis: translation left the constrained space");
    return *t;
}

ProductState ConstrainedBasis::spin_flip_inverted(const ProductState& s) const {
    const int D = chain_length_;
    const int q = local_dim();
    ProductState out;
    out.levels.resize(D);
    for (int k = 0; k < D; ++k) out.levels[D - 1 - k] = static_cast<std::int8_t>(q - 1 - s.levels[k]);
    return out;
}

std::size_t ConstrainedBasis::spin_flip_inverted_index(std::size_t index) const {
    auto t = index_of(spin_flip_inverted(state(index)));
    if (!t) throw std::logic_error("ConstrainedBasis: spin-flip inversion left the constrained space");
    return *t;
}

SymmetrySector SymmetrySector::momentum_zero(const ConstrainedBasis& basis, bool resolve_parity) {
    SymmetrySector sector;
    sector.chain_length_ = basis.chain_length();
    sector.spin_ = basis.spin();
    sector.parity_resolved_ = resolve_parity;
    sector.full_dim_ = basis.dim();

    const int D = basis.chain_length();
    const std::size_t dim = basis.dim();
    constexpr std::uint32_t kUnseen = 0xffffffffu;
    sector.orbit_of_state_.assign(dim, kUnseen);
    sector.translation_image_.resize(dim);
    for (std::size_t s = 0; s < dim; ++s)
        sector.translation_image_[s] = static_cast<std::uint32_t>(basis.translated_index(s, 1));

    // Translation orbits in order of smallest member: lexicographic sweep.
    std::vector<std::uint32_t> members;
    for (std::size_t s = 0; s < dim; ++s) {
        if (sector.orbit_of_state_[s] != kUnseen) continue;
        const std::uint32_t orbit = static_cast<std::uint32_t>(sector.orbit_rep_.size());
        members.clear();
        std::size_t t = s;
        do {
            sector.orbit_of_state_[t] = orbit;
            members.push_back(static_cast<std::uint32_t>(t));
            t = sector.translation_image_[t];
        } while (t != s);
        sector.orbit_rep_.push_back(static_cast<std::uint32_t>(s));
        sector.orbit_period_.push_back(static_cast<int>(members.size()));
        if (static_cast<int>(members.size()) > D || D % static_cast<int>(members.size()) != 0)
            throw std::logic_error("SymmetrySector: orbit period does not divide D");
    }

    const std::size_t n_orbits = sector.orbit_rep_.size();
    auto orbit_vector = [&](std::size_t orbit) {
        BasisVector v;
        const double a = 1.0 / std::sqrt(static_cast<double>(sector.orbit_period_[orbit]));
        std::size_t t = sector.orbit_rep_[orbit];
        do {
            v.states.push_back(static_cast<std::uint32_t>(t));
            v.coeff.push_back(a);
            t = basis.translated_index(t, 1);
        } while (t != sector.orbit_rep_[orbit]);
        std::sort(v.states.begin(), v.states.end());
        return v;
    };

    sector.orbit_to_sector_.assign(n_orbits, {});
    if (!resolve_parity) {
        sector.vectors_.reserve(n_orbits);
        for (std::size_t o = 0; o < n_orbits; ++o) {
            sector.vectors_.push_back(orbit_vector(o));
            sector.orbit_to_sector_[o] = {{o, 1.0}};
        }
        sector.dim_even_ = 0;
        return sector;
    }

    // Orbit image under the spin-flip inversion; fixed orbits give even
    // vectors, swapped pairs give one even and one odd combination.
    std::vector<std::uint32_t> image(n_orbits);
    for (std::size_t o = 0; o < n_orbits; ++o)
        image[o] = sector.orbit_of_state_[basis.spin_flip_inverted_index(sector.orbit_rep_[o])];

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> fixed;
    for (std::size_t o = 0; o < n_orbits; ++o) {
        if (image[o] == o)
            fixed.push_back(o);
        else if (image[o] > o)
            pairs.emplace_back(o, image[o]);
    }

    auto combine = [&](std::size_t a, std::size_t b, double sign) {
        BasisVector va = orbit_vector(a), vb = orbit_vector(b);
        BasisVector v;
        for (std::size_t i = 0; i < va.states.size(); ++i) {
            v.states.push_back(va.states[i]);
            v.coeff.push_back(va.coeff[i] * inv_sqrt2);
        }
        for (std::size_t i = 0; i < vb.states.size(); ++i) {
            v.states.push_back(vb.states[i]);
            v.coeff.push_back(sign * vb.coeff[i] * inv_sqrt2);
        }
        return v;
    };

    for (std::size_t o : fixed) {
        BasisVector v = orbit_vector(o);
        v.parity = +1;
        sector.orbit_to_sector_[o] = {{sector.vectors_.size(), 1.0}};
        sector.vectors_.push_back(std::move(v));
    }
    for (auto [a, b] : pairs) {
        BasisVector v = combine(a, b, +1.0);
        v.parity = +1;
        sector.orbit_to_sector_[a].emplace_back(sector.vectors_.size(), inv_sqrt2);
        sector.orbit_to_sector_[b].emplace_back(sector.vectors_.size(), inv_sqrt2);
        sector.vectors_.push_back(std::move(v));
    }
    sector.dim_even_ = sector.vectors_.size();
    for (auto [a, b] : pairs) {
        BasisVector v = combine(a, b, -1.0);
        v.parity = -1;
        sector.orbit_to_sector_[a].emplace_back(sector.vectors_.size(), inv_sqrt2);
        sector.orbit_to_sector_[b].emplace_back(sector.vectors_.size(), -inv_sqrt2);
        sector.vectors_.push_back(std::move(v));
    }
    return sector;
}

std::vector<std::pair<std::size_t, double>> SymmetrySector::orbit_in_sector(std::size_t orbit) const {
    return orbit_to_sector_.at(orbit);
}

template <typename Scalar>
static Eigen::Matrix<Scalar, Eigen::Dynamic, 1> expand_impl(
    const SymmetrySector& sector, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
    if (static_cast<std::size_t>(v.size()) != sector.dim())
        throw std::invalid_argument("SymmetrySector::expand: dimension mismatch");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(sector.full_dim());
    for (std::size_t p = 0; p < sector.dim(); ++p) {
        const auto& bv = sector.vec(p);
        for (std::size_t i = 0; i < bv.states.size(); ++i) out[bv.states[i]] += bv.coeff[i] * v[p];
    }
    return out;
}

template <typename Scalar>
static Eigen::Matrix<Scalar, Eigen::Dynamic, 1> project_impl(
    const SymmetrySector& sector, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& full) {
    if (static_cast<std::size_t>(full.size()) != sector.full_dim())
        throw std::invalid_argument("SymmetrySector::project: dimension mismatch");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(sector.dim());
    for (std::size_t p = 0; p < sector.dim(); ++p) {
        const auto& bv = sector.vec(p);
        Scalar acc{};
        for (std::size_t i = 0; i < bv.states.size(); ++i) acc += bv.coeff[i] * full[bv.states[i]];
        out[p] = acc;
    }
    return out;
}

Eigen::VectorXd SymmetrySector::expand(const Eigen::VectorXd& v) const { return expand_impl(*this, v); }
Eigen::VectorXcd SymmetrySector::expand(const Eigen::VectorXcd& v) const { return expand_impl(*this, v); }
Eigen::VectorXd SymmetrySector::project(const Eigen::VectorXd& v) const { return project_impl(*this, v); }
Eigen::VectorXcd SymmetrySector::project(const Eigen::VectorXcd& v) const { return project_impl(*this, v); }

}  // namespace scarlab
