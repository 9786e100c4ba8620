#include "scarlab/dynamics.hpp"

#include "scarlab/parallel.hpp"

#include <cmath>
#include <sstream>

namespace scarlab {

namespace {

std::string orbit_name(const ProductState& rep, int spin) {
    std::ostringstream os;
    os << "m=";
    for (int k = 0; k < rep.size(); ++k) {
        if (k) os << ",";
        os << rep.m(k, spin);
    }
    return os.str();
}

Eigen::VectorXd orbit_coords(const SymmetrySector& sector, std::size_t orbit) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(sector.dim());
    for (auto [p, c] : sector.orbit_in_sector(orbit)) v[p] = c;
    return v;
}

}  // namespace

InitialState make_product_initial_state(const ProductState& state, const ConstrainedBasis& basis,
                                        const SymmetrySector& sector) {
    auto idx = basis.index_of(state);
    if (!idx)
        throw std::invalid_argument("make_initial_state: product state is blockaded or malformed");
    InitialState out;
    out.name = orbit_name(state, basis.spin());
    out.sector_coords = orbit_coords(sector, sector.orbit_of_state(*idx));
    return out;
}

InitialState make_initial_state(const std::string& spec, const ConstrainedBasis& basis,
                                const SymmetrySector& sector) {
    const int D = basis.chain_length();
    const int j = basis.spin();
    ProductState ps;
    ps.levels.assign(D, static_cast<std::int8_t>(2 * j));
    if (spec == "psi1") {
        auto out = make_product_initial_state(ps, basis, sector);
        out.name = "psi1";
        return out;
    }
    if (spec == "psi2") {
        ps.levels[0] = static_cast<std::int8_t>(2 * j - 1);
        auto out = make_product_initial_state(ps, basis, sector);
        out.name = "psi2";
        return out;
    }
    if (spec.rfind("product:", 0) == 0) {
        std::istringstream is(spec.substr(8));
        ps.levels.clear();
        std::string tok;
        while (std::getline(is, tok, ',')) {
            const int m = std::stoi(tok);
            if (m < -j || m > j) throw std::invalid_argument("make_initial_state: |m| > j");
            ps.levels.push_back(static_cast<std::int8_t>(m + j));
        }
        if (ps.size() != D) throw std::invalid_argument("make_initial_state: wrong chain length");
        return make_product_initial_state(ps, basis, sector);
    }
    throw std::invalid_argument("make_initial_state: unknown spec '" + spec + "'");
}

std::vector<InitialState> enumerate_initial_states(const ConstrainedBasis& basis,
                                                   const SymmetrySector& sector) {
    std::vector<InitialState> out;
    out.reserve(sector.orbit_count());
    for (std::size_t o = 0; o < sector.orbit_count(); ++o) {
        InitialState s;
        s.name = orbit_name(basis.state(sector.orbit_representative(o)), basis.spin());
        s.sector_coords = orbit_coords(sector, o);
        out.push_back(std::move(s));
    }
    return out;
}

EigenbasisObservable::EigenbasisObservable(const Spectrum& spectrum, const SectorOperator& obs)
    : spectrum_(&spectrum) {
    const Eigen::Index n = spectrum.energies.size();
    if (obs.mat.rows() != n) throw std::invalid_argument("EigenbasisObservable: dimension mismatch");
    Eigen::MatrixXd m = real_sector_matrix(obs);
    a_ = spectrum.vectors.transpose() * (m * spectrum.vectors);
    a_ = ((a_ + a_.transpose()) / 2.0).eval();
    a_sq_ = a_.array().square();
    diag_ = a_.diagonal();
    groups_.resize(spectrum.degeneracy_group_count);
    for (Eigen::Index i = 0; i < n; ++i)
        groups_[spectrum.degeneracy_group[i]].push_back(static_cast<std::uint32_t>(i));
}

Eigen::VectorXd EigenbasisObservable::coefficients(const Eigen::VectorXd& psi0_sector) const {
    if (psi0_sector.size() != spectrum_->energies.size())
        throw std::invalid_argument("coefficients: dimension mismatch");
    return spectrum_->vectors.transpose() * psi0_sector;
}

double EigenbasisObservable::long_time_average(const Eigen::VectorXd& coeffs) const {
    const Eigen::VectorXd w = coeffs.array().square();
    double acc = w.dot(diag_);
    for (const auto& g : groups_) {
        if (g.size() < 2) continue;
        for (std::size_t x = 0; x < g.size(); ++x)
            for (std::size_t y = 0; y < g.size(); ++y) {
                if (x == y) continue;
                acc += coeffs[g[x]] * coeffs[g[y]] * a_(g[x], g[y]);
            }
    }
    const double norm = w.sum();
    return norm > 0 ? acc / norm : 0.0;
}

double EigenbasisObservable::same_group_quadratic(const Eigen::VectorXd& squared_weights) const {
    double acc = 0;
    for (const auto& g : groups_) {
        if (g.size() == 1) {
            acc += squared_weights[g[0]] * squared_weights[g[0]] * a_sq_(g[0], g[0]);
            continue;
        }
        for (std::size_t x = 0; x < g.size(); ++x)
            for (std::size_t y = 0; y < g.size(); ++y)
                acc += squared_weights[g[x]] * squared_weights[g[y]] * a_sq_(g[x], g[y]);
    }
    return acc;
}

double EigenbasisObservable::exact_fluctuation(const Eigen::VectorXd& coeffs) const {
    const Eigen::VectorXd w = coeffs.array().square();
    return std::max(0.0, w.dot(a_sq_ * w) - same_group_quadratic(w));
}

double EigenbasisObservable::estimate_fluctuation(const Eigen::VectorXd& coeffs,
                                                  const Eigen::MatrixXd& pair_summands) const {
    const Eigen::Index n = coeffs.size();
    if (pair_summands.rows() != n)
        throw std::invalid_argument("estimate_fluctuation: dimension mismatch");
    const Eigen::VectorXd w = coeffs.array().square();
    return w.dot(pair_summands * w) - (w.array().square() * pair_summands.diagonal().array()).sum();
}

TimeSeries EigenbasisObservable::expectation_series(const Eigen::VectorXd& coeffs,
                                                    const std::vector<double>& times) const {
    const Eigen::Index n = coeffs.size();
    TimeSeries out;
    out.times = times;
    out.values.resize(times.size());
    const Eigen::Index block = 256;
    Eigen::MatrixXd zr(n, block), zi(n, block);
    for (std::size_t t0 = 0; t0 < times.size(); t0 += block) {
        const Eigen::Index b = std::min<Eigen::Index>(block, times.size() - t0);
        for (Eigen::Index c = 0; c < b; ++c) {
            const double t = times[t0 + c];
            zr.col(c) = (spectrum_->energies.array() * (-t)).cos() * coeffs.array();
            zi.col(c) = (spectrum_->energies.array() * (-t)).sin() * coeffs.array();
        }
        const Eigen::MatrixXd ar = a_ * zr.leftCols(b);
        const Eigen::MatrixXd ai = a_ * zi.leftCols(b);
        for (Eigen::Index c = 0; c < b; ++c)
            out.values[t0 + c] = zr.col(c).dot(ar.col(c)) + zi.col(c).dot(ai.col(c));
    }
    return out;
}

TimeSeries evolve_expectation(const Spectrum& spectrum, const Eigen::VectorXd& psi0_sector,
                              const SectorOperator& obs, const std::vector<double>& times) {
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw std::invalid_argument("evolve_expectation: times must be strictly increasing");
    EigenbasisObservable eo(spectrum, obs);
    return eo.expectation_series(eo.coefficients(psi0_sector), times);
}

TimeSeries fidelity_series(const Spectrum& spectrum, const Eigen::VectorXd& psi0_sector,
                           const std::vector<double>& times) {
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw std::invalid_argument("fidelity_series: times must be strictly increasing");
    if (psi0_sector.size() != spectrum.energies.size())
        throw std::invalid_argument("fidelity_series: dimension mismatch");
    const Eigen::VectorXd c = spectrum.vectors.transpose() * psi0_sector;
    const Eigen::ArrayXd w = c.array().square();
    TimeSeries out;
    out.times = times;
    out.observable = "fidelity";
    out.values.reserve(times.size());
    for (double t : times) {
        const double re = (w * (spectrum.energies.array() * t).cos()).sum();
        const double im = (w * (spectrum.energies.array() * t).sin()).sum();
        out.values.push_back(re * re + im * im);
    }
    return out;
}

double long_time_average(const Spectrum& spectrum, const Eigen::VectorXd& psi0_sector,
                         const SectorOperator& obs) {
    EigenbasisObservable eo(spectrum, obs);
    return eo.long_time_average(eo.coefficients(psi0_sector));
}

TimeOracleResult time_average_oracle(const EigenbasisObservable& obs, const Eigen::VectorXd& coeffs,
                                     const TimeOracleOptions& options) {
    const std::size_t steps = static_cast<std::size_t>(std::llround(options.t_max / options.dt));
    std::vector<double> times(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) times[k] = static_cast<double>(k) * options.dt;
    TimeSeries series = obs.expectation_series(coeffs, times);

    // trapezoid weights: half at the ends
    double mean = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
        mean += w * series.values[k];
    }
    mean /= static_cast<double>(steps);
    double var = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
        const double d = series.values[k] - mean;
        var += w * d * d;
    }
    var /= static_cast<double>(steps);
    return {mean, var};
}

TemporalFluctuation temporal_fluctuation(const EigenbasisObservable& obs,
                                         const Eigen::VectorXd& psi0_sector,
                                         const Eigen::MatrixXd* dos_pairs_inv,
                                         const Eigen::MatrixXd* ccp_pairs,
                                         const TimeOracleOptions* oracle) {
    TemporalFluctuation out;
    const Eigen::VectorXd c = obs.coefficients(psi0_sector);
    out.exact_sum = obs.exact_fluctuation(c);
    if (dos_pairs_inv != nullptr) out.dos_estimate = obs.estimate_fluctuation(c, *dos_pairs_inv);
    if (ccp_pairs != nullptr) out.ccp_estimate = obs.estimate_fluctuation(c, *ccp_pairs);
    if (oracle != nullptr) out.time_oracle = time_average_oracle(obs, c, *oracle).variance;
    return out;
}

BulkDynamics bulk_dynamics(const EigenbasisObservable& obs, const ConstrainedBasis& basis,
                           const SymmetrySector& sector, const Eigen::VectorXd& state_numbers,
                           const Eigen::MatrixXd* dos_pairs_inv, const Eigen::MatrixXd* ccp_pairs,
                           int threads) {
    const Eigen::Index n = obs.spectrum().energies.size();
    if (state_numbers.size() != n) throw std::invalid_argument("bulk_dynamics: N_i column mismatch");
    const std::size_t n_orbits = sector.orbit_count();

    // coefficient and squared-weight matrices over all orbit states
    Eigen::MatrixXd coeffs(n, n_orbits);
    for (std::size_t o = 0; o < n_orbits; ++o) {
        Eigen::VectorXd psi = Eigen::VectorXd::Zero(n);
        for (auto [p, c] : sector.orbit_in_sector(o)) psi[p] = c;
        coeffs.col(o) = obs.spectrum().vectors.transpose() * psi;
    }
    Eigen::MatrixXd w = coeffs.array().square();

    BulkDynamics out;
    out.names.reserve(n_orbits);
    for (std::size_t o = 0; o < n_orbits; ++o)
        out.names.push_back(orbit_name(basis.state(sector.orbit_representative(o)), basis.spin()));
    out.energy = w.transpose() * obs.spectrum().energies;
    out.number = w.transpose() * state_numbers;
    out.longtime_avg.resize(n_orbits);
    out.fluct_exact.resize(n_orbits);
    out.fluct_dos.resize(n_orbits);
    out.fluct_ccp.resize(n_orbits);

    // one GEMM per pair matrix, then per-orbit dots and small corrections
    auto gemm_into = [&](const Eigen::MatrixXd& m, Eigen::MatrixXd& dst) {
        dst.resize(n, static_cast<Eigen::Index>(n_orbits));
        parallel_for_chunks(n_orbits, threads, [&](std::size_t b, std::size_t e) {
            const Eigen::Index c0 = static_cast<Eigen::Index>(b), nc = static_cast<Eigen::Index>(e - b);
            dst.middleCols(c0, nc) = m * w.middleCols(c0, nc);
        });
    };
    Eigen::MatrixXd kw, dw, cw;
    gemm_into(obs.a_sq(), kw);
    if (dos_pairs_inv != nullptr) gemm_into(*dos_pairs_inv, dw);
    if (ccp_pairs != nullptr) gemm_into(*ccp_pairs, cw);

    parallel_for_chunks(n_orbits, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t o = b; o < e; ++o) {
            const Eigen::VectorXd c = coeffs.col(o);
            const Eigen::VectorXd wc = w.col(o);
            out.longtime_avg[o] = obs.long_time_average(c);
            out.fluct_exact[o] =
                std::max(0.0, wc.dot(kw.col(o)) - obs.same_group_quadratic(wc));
            out.fluct_dos[o] = dos_pairs_inv != nullptr
                                   ? wc.dot(dw.col(o)) -
                                         (wc.array().square() * dos_pairs_inv->diagonal().array()).sum()
                                   : 0.0;
            out.fluct_ccp[o] = ccp_pairs != nullptr
                                   ? wc.dot(cw.col(o)) -
                                         (wc.array().square() * ccp_pairs->diagonal().array()).sum()
                                   : 0.0;
        }
    });
    return out;
}

}  // namespace scarlab
