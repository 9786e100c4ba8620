#include "scarlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace scarlab {

Eigen::MatrixXd real_sector_matrix(const SectorOperator& op, double tol) {
    const double scale = op.mat.norm();
    if (op.mat.imag().norm() > tol * std::max(1.0, scale))
        throw std::invalid_argument("sector operator has non-negligible imaginary part");
    return op.mat.real();
}

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index imax = 0;
    double best = -1;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best) {
            best = a;
            imax = i;
        }
    }
    if (v[imax] < 0) v = -v;
}

}  // namespace

Spectrum diagonalize(const SectorOperator& op, int chain_length, int spin) {
    const Eigen::Index n = op.mat.rows();
    if (n != op.mat.cols()) throw std::invalid_argument("diagonalize: matrix not square");
    const double scale = std::max(1.0, op.mat.norm());
    if ((op.mat - op.mat.adjoint()).norm() > 1e-12 * scale)
        throw std::invalid_argument("diagonalize: matrix not Hermitian");
    Eigen::MatrixXd m = real_sector_matrix(op);

    Spectrum out;
    out.chain_length = chain_length;
    out.spin = spin;
    out.parity_resolved = op.parity_resolved;
    out.dim_even = op.dim_even;
    out.dim_odd = op.dim_odd;
    out.energies.resize(n);
    out.vectors = Eigen::MatrixXd::Zero(n, n);
    out.parity.assign(n, 0);

    struct Block {
        Eigen::Index offset, size;
        std::int8_t parity;
    };
    std::vector<Block> blocks;
    if (op.parity_resolved) {
        if (static_cast<Eigen::Index>(op.dim_even + op.dim_odd) != n)
            throw std::invalid_argument("diagonalize: parity block sizes inconsistent");
        const Eigen::Index ne = static_cast<Eigen::Index>(op.dim_even);
        if (m.topRightCorner(ne, n - ne).norm() > 1e-10 * scale)
            throw std::invalid_argument("diagonalize: operator mixes parity blocks");
        blocks.push_back({0, ne, +1});
        blocks.push_back({ne, n - ne, -1});
    } else {
        blocks.push_back({0, n, 0});
    }

    std::vector<std::pair<double, Eigen::Index>> order;  // (energy, column in scratch)
    Eigen::MatrixXd scratch(n, n);
    std::vector<std::int8_t> scratch_parity(n);
    Eigen::Index filled = 0;
    for (const auto& b : blocks) {
        if (b.size == 0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.block(b.offset, b.offset, b.size, b.size));
        if (es.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver failed");
        for (Eigen::Index k = 0; k < b.size; ++k) {
            scratch.col(filled).setZero();
            scratch.col(filled).segment(b.offset, b.size) = es.eigenvectors().col(k);
            fix_sign(scratch.col(filled));
            scratch_parity[filled] = b.parity;
            order.emplace_back(es.eigenvalues()[k], filled);
            ++filled;
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (Eigen::Index i = 0; i < n; ++i) {
        out.energies[i] = order[i].first;
        out.vectors.col(i) = scratch.col(order[i].second);
        out.parity[i] = scratch_parity[order[i].second];
    }

    // residual check per eigenpair
    const double hnorm = m.norm();
    Eigen::MatrixXd resid = m * out.vectors - out.vectors * out.energies.asDiagonal();
    const double worst = resid.colwise().norm().maxCoeff();
    if (worst > 1e-10 * std::max(1.0, hnorm))
        throw std::runtime_error("diagonalize: residual exceeds tolerance");

    out.degeneracy_tolerance = 1e-10 * hnorm;
    out.degeneracy_group.assign(n, 0);
    std::uint32_t group = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
        if (out.energies[i] - out.energies[i - 1] > out.degeneracy_tolerance) ++group;
        out.degeneracy_group[i] = group;
    }
    out.degeneracy_group_count = group + 1;
    return out;
}

EEVTable eev_table(const Spectrum& spectrum, const SectorOperator& number_op,
                   const std::vector<std::pair<std::string, SectorOperator>>& observables,
                   const std::vector<Eigen::VectorXd>& references) {
    const Eigen::Index n = spectrum.energies.size();
    EEVTable table;
    table.energy = spectrum.energies;
    table.parity = spectrum.parity;
    table.scar.assign(n, 0);

    auto diagonal_of = [&](const SectorOperator& op) -> Eigen::VectorXd {
        if (op.mat.rows() != n) throw std::invalid_argument("eev_table: operator dimension mismatch");
        Eigen::MatrixXd m = real_sector_matrix(op);
        Eigen::MatrixXd w = m * spectrum.vectors;
        return (spectrum.vectors.array() * w.array()).colwise().sum().transpose();
    };

    table.number = diagonal_of(number_op);
    table.observables.resize(n, static_cast<Eigen::Index>(observables.size()));
    for (std::size_t c = 0; c < observables.size(); ++c) {
        table.observable_names.push_back(observables[c].first);
        table.observables.col(static_cast<Eigen::Index>(c)) = diagonal_of(observables[c].second);
    }
    table.overlaps.resize(n, static_cast<Eigen::Index>(references.size()));
    for (std::size_t r = 0; r < references.size(); ++r) {
        if (references[r].size() != n) throw std::invalid_argument("eev_table: reference dimension mismatch");
        table.overlaps.col(static_cast<Eigen::Index>(r)) =
            (spectrum.vectors.transpose() * references[r]).array().square();
    }
    return table;
}

std::vector<std::size_t> tag_scars(EEVTable& table, int overlap_column, double theta_rel) {
    if (overlap_column < 0 || overlap_column >= table.overlaps.cols())
        throw std::invalid_argument("tag_scars: no such overlap column");
    const Eigen::Index n = table.energy.size();
    const auto w = table.overlaps.col(overlap_column);
    const double threshold = theta_rel * w.maxCoeff();

    // bin center -> argmax state
    std::vector<std::pair<long long, Eigen::Index>> best;  // (bin, state)
    for (Eigen::Index i = 0; i < n; ++i) {
        const long long bin = std::llround(table.energy[i]);
        auto it = std::find_if(best.begin(), best.end(), [&](const auto& p) { return p.first == bin; });
        if (it == best.end())
            best.emplace_back(bin, i);
        else if (w[i] > w[it->second])
            it->second = i;
    }
    std::vector<std::size_t> tagged;
    for (auto& s : table.scar) s = 0;
    for (const auto& [bin, i] : best) {
        if (w[i] >= threshold && w[i] > 0) {
            table.scar[i] = 1;
            tagged.push_back(static_cast<std::size_t>(i));
        }
    }
    std::sort(tagged.begin(), tagged.end());
    return tagged;
}

namespace {

// graded-lexicographic exponents for the surface monomials
std::vector<std::pair<int, int>> monomials(SurfaceMode mode, int degree) {
    std::vector<std::pair<int, int>> out;
    if (mode == SurfaceMode::EnergyOnly) {
        for (int p = 0; p <= degree; ++p) out.emplace_back(p, 0);
    } else {
        for (int total = 0; total <= degree; ++total)
            for (int p = total; p >= 0; --p) out.emplace_back(p, total - p);
    }
    return out;
}

}  // namespace

double SurfaceFit::evaluate(double energy, double number) const {
    const double x = (energy - e_center) / e_scale;
    const double y = (number - n_center) / n_scale;
    const auto mons = monomials(mode, degree);
    double acc = 0;
    for (std::size_t k = 0; k < mons.size(); ++k)
        acc += coeffs[static_cast<Eigen::Index>(k)] * std::pow(x, mons[k].first) * std::pow(y, mons[k].second);
    return acc;
}

SurfaceFit fit_eev_surface(const EEVTable& table, int observable_column, SurfaceMode mode,
                           int degree) {
    if (observable_column < 0 || observable_column >= table.observables.cols())
        throw std::invalid_argument("fit_eev_surface: no such observable column");
    if (degree < 0) throw std::invalid_argument("fit_eev_surface: negative degree");
    const Eigen::Index n = table.energy.size();
    const auto mons = monomials(mode, degree);
    const Eigen::Index cols = static_cast<Eigen::Index>(mons.size());
    const Eigen::Index needed = static_cast<Eigen::Index>((degree + 1)) * (degree + 1);
    if (n < needed) throw std::invalid_argument("fit_eev_surface: too few states for requested degree");

    SurfaceFit fit;
    fit.mode = mode;
    fit.degree = degree;
    fit.e_center = table.energy.mean();
    fit.n_center = table.number.mean();
    const auto sd = [](const Eigen::VectorXd& v, double mean) {
        const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size());
        return var > 0 ? std::sqrt(var) : 1.0;
    };
    fit.e_scale = sd(table.energy, fit.e_center);
    fit.n_scale = sd(table.number, fit.n_center);

    Eigen::MatrixXd design(n, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = (table.energy[i] - fit.e_center) / fit.e_scale;
        const double y = (table.number[i] - fit.n_center) / fit.n_scale;
        for (Eigen::Index k = 0; k < cols; ++k)
            design(i, k) = std::pow(x, mons[k].first) * std::pow(y, mons[k].second);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < cols) throw std::runtime_error("fit_eev_surface: rank-deficient design matrix");
    const Eigen::VectorXd y = table.observables.col(observable_column);
    fit.coeffs = qr.solve(y);
    fit.deviations = y - design * fit.coeffs;
    fit.rmse = std::sqrt(fit.deviations.squaredNorm() / static_cast<double>(n));
    return fit;
}

namespace {

constexpr char kCacheMagic[8] = {'S', 'C', 'A', 'R', 'S', 'P', 'C', '1'};

std::uint64_t fnv1a(const char* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (std::size_t i = 0; i < size; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ull;
    }
    return h;
}

template <typename T>
void put(std::string& buf, const T& v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw std::runtime_error("spectrum cache: truncated file");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

void cache_store(const Spectrum& spectrum, const std::filesystem::path& path) {
    const std::uint64_t n = spectrum.dim();
    std::string payload;
    put<std::int32_t>(payload, spectrum.chain_length);
    put<std::int32_t>(payload, spectrum.spin);
    put<std::int32_t>(payload, spectrum.parity_resolved ? 1 : 0);
    put<std::uint64_t>(payload, spectrum.dim_even);
    put<std::uint64_t>(payload, spectrum.dim_odd);
    put<std::uint64_t>(payload, n);
    put<double>(payload, spectrum.degeneracy_tolerance);
    payload.append(reinterpret_cast<const char*>(spectrum.energies.data()), n * sizeof(double));
    payload.append(reinterpret_cast<const char*>(spectrum.parity.data()), n * sizeof(std::int8_t));
    payload.append(reinterpret_cast<const char*>(spectrum.vectors.data()), n * n * sizeof(double));
    payload.append(reinterpret_cast<const char*>(spectrum.degeneracy_group.data()),
                   n * sizeof(std::uint32_t));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("spectrum cache: cannot open " + path.string());
    out.write(kCacheMagic, sizeof(kCacheMagic));
    const std::uint64_t size = payload.size();
    const std::uint64_t checksum = fnv1a(payload.data(), payload.size());
    out.write(reinterpret_cast<const char*>(&size), sizeof(size));
    out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw std::runtime_error("spectrum cache: write failed for " + path.string());
}

Spectrum cache_load(const std::filesystem::path& path, int chain_length, int spin,
                    bool parity_resolved) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("spectrum cache: cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw std::runtime_error("spectrum cache: bad magic or version in " + path.string());
    std::uint64_t size = 0, checksum = 0;
    in.read(reinterpret_cast<char*>(&size), sizeof(size));
    in.read(reinterpret_cast<char*>(&checksum), sizeof(checksum));
    if (!in) throw std::runtime_error("spectrum cache: truncated header in " + path.string());
    std::string payload(size, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(size));
    if (!in || in.gcount() != static_cast<std::streamsize>(size) || in.peek() != EOF)
        throw std::runtime_error("spectrum cache: truncated or oversized payload in " + path.string());
    if (fnv1a(payload.data(), payload.size()) != checksum)
        throw std::runtime_error("spectrum cache: checksum mismatch in " + path.string());

    std::size_t pos = 0;
    Spectrum s;
    s.chain_length = take<std::int32_t>(payload, pos);
    s.spin = take<std::int32_t>(payload, pos);
    s.parity_resolved = take<std::int32_t>(payload, pos) != 0;
    s.dim_even = take<std::uint64_t>(payload, pos);
    s.dim_odd = take<std::uint64_t>(payload, pos);
    const std::uint64_t n = take<std::uint64_t>(payload, pos);
    s.degeneracy_tolerance = take<double>(payload, pos);
    if (s.chain_length != chain_length || s.spin != spin || s.parity_resolved != parity_resolved)
        throw std::runtime_error("spectrum cache: geometry/sector mismatch in " + path.string());
    const std::size_t expect = pos + n * sizeof(double) + n * sizeof(std::int8_t) +
                               n * n * sizeof(double) + n * sizeof(std::uint32_t);
    if (expect != payload.size()) throw std::runtime_error("spectrum cache: payload size mismatch");

    s.energies.resize(static_cast<Eigen::Index>(n));
    std::memcpy(s.energies.data(), payload.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    s.parity.resize(n);
    std::memcpy(s.parity.data(), payload.data() + pos, n * sizeof(std::int8_t));
    pos += n * sizeof(std::int8_t);
    s.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::memcpy(s.vectors.data(), payload.data() + pos, n * n * sizeof(double));
    pos += n * n * sizeof(double);
    s.degeneracy_group.resize(n);
    std::memcpy(s.degeneracy_group.data(), payload.data() + pos, n * sizeof(std::uint32_t));
    s.degeneracy_group_count = n == 0 ? 0 : (*std::max_element(s.degeneracy_group.begin(),
                                                               s.degeneracy_group.end()) + 1);
    return s;
}

}  // namespace scarlab
