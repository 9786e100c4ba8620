#include "scarlab/coherence.hpp"

#include "scarlab/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace scarlab {

DosModel::DosModel(Eigen::VectorXd energies, Eigen::VectorXd numbers, double h1, double h2)
    : energies_(std::move(energies)), numbers_(std::move(numbers)), h1_(h1), h2_(h2) {
    if (!(h1_ > 0) || !(h2_ > 0)) throw std::invalid_argument("DosModel: kernel widths must be positive");
    if (energies_.size() != numbers_.size() || energies_.size() == 0)
        throw std::invalid_argument("DosModel: bad state list");
}

DosModel DosModel::with_default_widths(const Eigen::VectorXd& energies,
                                       const Eigen::VectorXd& numbers) {
    auto sd = [](const Eigen::VectorXd& v) {
        const double mean = v.mean();
        return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
    };
    return DosModel(energies, numbers, sd(energies), sd(numbers));
}

double DosModel::normalization() const {
    return 1.0 / (2.0 * std::numbers::pi * static_cast<double>(energies_.size()) * h1_ * h2_);
}

double DosModel::operator()(double energy, double number) const {
    const double inv1 = 1.0 / (2.0 * h1_ * h1_);
    const double inv2 = 1.0 / (2.0 * h2_ * h2_);
    const double acc = (-(energies_.array() - energy).square() * inv1 -
                        (numbers_.array() - number).square() * inv2)
                           .exp()
                           .sum();
    return normalization() * acc;
}

Eigen::MatrixXd pairwise_dos_matrix(const DosModel& dos, const Eigen::VectorXd& energies,
                                    const Eigen::VectorXd& numbers, int threads) {
    const Eigen::Index n = energies.size();
    if (numbers.size() != n) throw std::invalid_argument("pairwise_dos_matrix: dimension mismatch");
    Eigen::MatrixXd out(n, n);
    parallel_for_chunks(static_cast<std::size_t>(n), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t k = i; k < static_cast<std::size_t>(n); ++k)
                out(i, k) = dos(0.5 * (energies[i] + energies[k]), 0.5 * (numbers[i] + numbers[k]));
    });
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < i; ++k) out(i, k) = out(k, i);
    return out;
}

RegionComponents::RegionComponents(const Spectrum& spectrum, const SymmetrySector& sector,
                                   const RegionMap& region) {
    n_states_ = spectrum.dim();
    region_dim_ = region.region_dim();
    cols_ = region.complement_cols();
    if (sector.dim() != n_states_)
        throw std::invalid_argument("RegionComponents: spectrum/sector dimension mismatch");
    if (sector.full_dim() != region.full_dim())
        throw std::invalid_argument("RegionComponents: sector/region dimension mismatch");

    blocks_.assign(region_dim_, Eigen::MatrixXd::Zero(n_states_, cols_));
    for (std::size_t p = 0; p < sector.dim(); ++p) {
        const auto& bv = sector.vec(p);
        for (std::size_t k = 0; k < bv.states.size(); ++k) {
            const std::uint32_t s = bv.states[k];
            blocks_[region.region_config(s)].col(region.complement_col(s)) +=
                bv.coeff[k] * spectrum.vectors.row(p).transpose();
        }
    }

    state_dm_table_.resize(region_dim_ * region_dim_);
    for (std::size_t a = 0; a < region_dim_; ++a)
        for (std::size_t a2 = 0; a2 < region_dim_; ++a2)
            state_dm_table_[a * region_dim_ + a2] =
                (blocks_[a].array() * blocks_[a2].array()).rowwise().sum();
}

Eigen::MatrixXd RegionComponents::cross_reduced_dm(std::size_t i, std::size_t i2) const {
    if (i >= n_states_ || i2 >= n_states_)
        throw std::invalid_argument("cross_reduced_dm: state index out of range");
    Eigen::MatrixXd rho(region_dim_, region_dim_);
    for (std::size_t a = 0; a < region_dim_; ++a)
        for (std::size_t a2 = 0; a2 < region_dim_; ++a2)
            rho(a, a2) = blocks_[a].row(i).dot(blocks_[a2].row(i2));
    return rho;
}

double RegionComponents::ccp(std::size_t i, std::size_t i2) const {
    return cross_reduced_dm(i, i2).squaredNorm();
}

Eigen::MatrixXd RegionComponents::ccp_matrix(int threads) const {
    const Eigen::Index n = static_cast<Eigen::Index>(n_states_);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    // T(i,i2) = sum_{a,a2} (X_a.row(i) . X_{a2}.row(i2))^2 over ordered (a,a2);
    // row-chunked Gram blocks keep every write row-local and deterministic.
    for (std::size_t a = 0; a < region_dim_; ++a) {
        for (std::size_t a2 = 0; a2 < region_dim_; ++a2) {
            parallel_for_chunks(static_cast<std::size_t>(n), threads,
                                [&](std::size_t b, std::size_t e) {
                                    const Eigen::Index rows = static_cast<Eigen::Index>(e - b);
                                    Eigen::MatrixXd g = blocks_[a].middleRows(b, rows) *
                                                        blocks_[a2].transpose();
                                    t.middleRows(b, rows).array() += g.array().square();
                                });
        }
    }
    return t;
}

Eigen::MatrixXd RegionComponents::state_dm(std::size_t i) const {
    if (i >= n_states_) throw std::invalid_argument("state_dm: state index out of range");
    Eigen::MatrixXd rho(region_dim_, region_dim_);
    for (std::size_t a = 0; a < region_dim_; ++a)
        for (std::size_t a2 = 0; a2 < region_dim_; ++a2)
            rho(a, a2) = state_dm_table_[a * region_dim_ + a2][static_cast<Eigen::Index>(i)];
    return rho;
}

Eigen::MatrixXd RegionComponents::mixture_dm(const Eigen::VectorXd& weights) const {
    if (static_cast<std::size_t>(weights.size()) != n_states_)
        throw std::invalid_argument("mixture_dm: weight dimension mismatch");
    Eigen::MatrixXd rho(region_dim_, region_dim_);
    for (std::size_t a = 0; a < region_dim_; ++a)
        for (std::size_t a2 = 0; a2 < region_dim_; ++a2)
            rho(a, a2) = state_dm_table_[a * region_dim_ + a2].dot(weights);
    return rho;
}

std::vector<PairSample> make_pair_samples(const Eigen::VectorXd& energies,
                                          const Eigen::VectorXd& numbers,
                                          const Eigen::MatrixXd* values) {
    const Eigen::Index n = energies.size();
    if (numbers.size() != n) throw std::invalid_argument("make_pair_samples: dimension mismatch");
    std::vector<PairSample> out;
    out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = i + 1; k < n; ++k) {
            PairSample p;
            p.i = static_cast<std::uint32_t>(i);
            p.i2 = static_cast<std::uint32_t>(k);
            p.mean_energy = 0.5 * (energies[i] + energies[k]);
            p.mean_number = 0.5 * (numbers[i] + numbers[k]);
            p.omega = energies[i] - energies[k];
            p.nu = numbers[i] - numbers[k];
            p.value = values != nullptr ? (*values)(i, k) : 0.0;
            out.push_back(p);
        }
    }
    return out;
}

std::vector<std::uint32_t> select_pairs_by_density(const std::vector<PairSample>& samples,
                                                   double percentile) {
    if (!(percentile > 0.0 && percentile <= 100.0))
        throw std::invalid_argument("select_pairs_by_density: percentile must be in (0, 100]");
    if (samples.empty()) return {};
    // zero-mean Gaussian surrogate: the cloud is symmetric under pair exchange
    double sxx = 0, syy = 0, sxy = 0;
    for (const auto& s : samples) {
        sxx += s.omega * s.omega;
        syy += s.nu * s.nu;
        sxy += s.omega * s.nu;
    }
    const double m = static_cast<double>(samples.size());
    sxx /= m;
    syy /= m;
    sxy /= m;
    const double det = sxx * syy - sxy * sxy;
    if (det <= 1e-300 || sxx <= 0 || syy <= 0)
        throw std::runtime_error("select_pairs_by_density: degenerate covariance");

    std::vector<double> d2(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double x = samples[k].omega, y = samples[k].nu;
        d2[k] = (syy * x * x - 2.0 * sxy * x * y + sxx * y * y) / det;
    }
    if (percentile >= 100.0) {
        std::vector<std::uint32_t> all(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k) all[k] = static_cast<std::uint32_t>(k);
        return all;
    }
    std::vector<double> sorted = d2;
    const std::size_t cut = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(samples.size()))));
    std::nth_element(sorted.begin(), sorted.begin() + (cut - 1), sorted.end());
    const double threshold = sorted[cut - 1];
    std::vector<std::uint32_t> keep;
    keep.reserve(cut);
    for (std::size_t k = 0; k < samples.size(); ++k)
        if (d2[k] <= threshold) keep.push_back(static_cast<std::uint32_t>(k));
    return keep;
}

BinnedMeans bin_samples_2d(const std::vector<PairSample>& samples,
                           const std::vector<std::uint32_t>& selection, int nx, int ny,
                           std::size_t min_count) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("bin_samples_2d: bad grid");
    if (selection.empty()) return {};
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (auto k : selection) {
        xmin = std::min(xmin, samples[k].mean_energy);
        xmax = std::max(xmax, samples[k].mean_energy);
        ymin = std::min(ymin, samples[k].mean_number);
        ymax = std::max(ymax, samples[k].mean_number);
    }
    const double dx = (xmax - xmin) / nx, dy = (ymax - ymin) / ny;
    if (dx <= 0 || dy <= 0) throw std::runtime_error("bin_samples_2d: degenerate sample extent");

    std::vector<double> sx(static_cast<std::size_t>(nx) * ny, 0), sy(static_cast<std::size_t>(nx) * ny, 0),
        sv(static_cast<std::size_t>(nx) * ny, 0);
    std::vector<std::size_t> cnt(static_cast<std::size_t>(nx) * ny, 0);
    for (auto k : selection) {
        const int bx = std::min(nx - 1, static_cast<int>((samples[k].mean_energy - xmin) / dx));
        const int by = std::min(ny - 1, static_cast<int>((samples[k].mean_number - ymin) / dy));
        const std::size_t b = static_cast<std::size_t>(bx) * ny + by;
        sx[b] += samples[k].mean_energy;
        sy[b] += samples[k].mean_number;
        sv[b] += samples[k].value;
        ++cnt[b];
    }
    BinnedMeans out;
    for (std::size_t b = 0; b < cnt.size(); ++b) {
        if (cnt[b] < min_count) continue;
        const double n = static_cast<double>(cnt[b]);
        out.mean_x.push_back(sx[b] / n);
        out.mean_y.push_back(sy[b] / n);
        out.mean_value.push_back(sv[b] / n);
        out.count.push_back(cnt[b]);
    }
    return out;
}

namespace {

// profiled log-amplitude fit of y ~ log a + log_omega, with R^2 in log space
struct LogFitResult {
    double sse = 0, log_a = 0, r2 = 0;
    bool valid = false;
};

LogFitResult log_amplitude_fit(const std::vector<double>& y, const std::vector<double>& log_omega) {
    LogFitResult r;
    const std::size_t n = y.size();
    if (n < 2) return r;
    double acc = 0;
    for (std::size_t b = 0; b < n; ++b) acc += y[b] - log_omega[b];
    r.log_a = acc / static_cast<double>(n);
    double mean_y = 0;
    for (double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    double sse = 0, sst = 0;
    for (std::size_t b = 0; b < n; ++b) {
        const double resid = y[b] - (r.log_a + log_omega[b]);
        sse += resid * resid;
        sst += (y[b] - mean_y) * (y[b] - mean_y);
    }
    r.sse = sse;
    r.r2 = sst > 0 ? 1.0 - sse / sst : 0.0;
    r.valid = true;
    return r;
}

}  // namespace

CcpDosFit fit_ccp_vs_dos(const std::vector<PairSample>& samples,
                         const std::vector<std::uint32_t>& selection,
                         const Eigen::VectorXd& energies, const Eigen::VectorXd& numbers,
                         double seed_h1, double seed_h2, int grid_e, int grid_n,
                         std::size_t min_count) {
    BinnedMeans bins = bin_samples_2d(samples, selection, grid_e, grid_n, min_count);
    std::vector<double> bx, by, ylog;
    for (std::size_t b = 0; b < bins.mean_value.size(); ++b) {
        if (bins.mean_value[b] > 0) {
            bx.push_back(bins.mean_x[b]);
            by.push_back(bins.mean_y[b]);
            ylog.push_back(-std::log(bins.mean_value[b]));  // log of inverse CCP
        }
    }
    if (bx.size() <= 10) throw std::runtime_error("fit_ccp_vs_dos: under-occupied grid");

    auto objective = [&](double log_h1, double log_h2) {
        DosModel dos(energies, numbers, std::exp(log_h1), std::exp(log_h2));
        std::vector<double> log_omega(bx.size());
        for (std::size_t b = 0; b < bx.size(); ++b) {
            const double w = dos(bx[b], by[b]);
            log_omega[b] = w > 0 ? std::log(w) : -745.0;
        }
        return log_amplitude_fit(ylog, log_omega);
    };

    // Nelder-Mead over (log h1, log h2)
    struct Vertex {
        double x, y, f;
    };
    auto eval = [&](double x, double y) { return objective(x, y).sse; };
    const double x0 = std::log(seed_h1), y0 = std::log(seed_h2);
    std::array<Vertex, 3> simplex{Vertex{x0, y0, eval(x0, y0)},
                                  Vertex{x0 + 0.25, y0, eval(x0 + 0.25, y0)},
                                  Vertex{x0, y0 + 0.25, eval(x0, y0 + 0.25)}};
    for (int it = 0; it < 300; ++it) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        if (std::abs(simplex[2].f - simplex[0].f) < 1e-13 * (1.0 + std::abs(simplex[0].f))) break;
        const double cx = 0.5 * (simplex[0].x + simplex[1].x);
        const double cy = 0.5 * (simplex[0].y + simplex[1].y);
        const double rx = cx + (cx - simplex[2].x), ry = cy + (cy - simplex[2].y);
        const double fr = eval(rx, ry);
        if (fr < simplex[0].f) {
            const double ex = cx + 2.0 * (cx - simplex[2].x), ey = cy + 2.0 * (cy - simplex[2].y);
            const double fe = eval(ex, ey);
            simplex[2] = fe < fr ? Vertex{ex, ey, fe} : Vertex{rx, ry, fr};
        } else if (fr < simplex[1].f) {
            simplex[2] = {rx, ry, fr};
        } else {
            const double kx = cx + 0.5 * (simplex[2].x - cx), ky = cy + 0.5 * (simplex[2].y - cy);
            const double fk = eval(kx, ky);
            if (fk < simplex[2].f) {
                simplex[2] = {kx, ky, fk};
            } else {  // shrink toward the best vertex
                for (int v = 1; v < 3; ++v) {
                    simplex[v].x = simplex[0].x + 0.5 * (simplex[v].x - simplex[0].x);
                    simplex[v].y = simplex[0].y + 0.5 * (simplex[v].y - simplex[0].y);
                    simplex[v].f = eval(simplex[v].x, simplex[v].y);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const auto best = objective(simplex[0].x, simplex[0].y);
    CcpDosFit fit;
    fit.a = std::exp(best.log_a);
    fit.h1 = std::exp(simplex[0].x);
    fit.h2 = std::exp(simplex[0].y);
    fit.r2 = best.r2;
    fit.bins_used = bx.size();
    return fit;
}

AmplitudeFit fit_inverse_vs_dos(const BinnedMeans& bins, const DosModel& dos) {
    std::vector<double> ylog, log_omega;
    for (std::size_t b = 0; b < bins.mean_value.size(); ++b) {
        if (bins.mean_value[b] <= 0) continue;
        const double w = dos(bins.mean_x[b], bins.mean_y[b]);
        if (w <= 0) continue;
        ylog.push_back(-std::log(bins.mean_value[b]));
        log_omega.push_back(std::log(w));
    }
    if (ylog.size() < 2) throw std::runtime_error("fit_inverse_vs_dos: too few usable bins");
    const auto r = log_amplitude_fit(ylog, log_omega);
    return {std::exp(r.log_a), r.r2, ylog.size()};
}

}  // namespace scarlab
