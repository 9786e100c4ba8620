#include "scarlab/ensembles.hpp"

#include <algorithm>
#include <cmath>

namespace scarlab {

Eigen::VectorXd gibbs_weights(const Eigen::VectorXd& energies, const Eigen::VectorXd& numbers,
                              double beta, double lambda) {
    Eigen::ArrayXd log_w = -beta * energies.array() + lambda * numbers.array();
    const double shift = log_w.maxCoeff();
    Eigen::ArrayXd w = (log_w - shift).exp();
    return (w / w.sum()).matrix();
}

namespace {

struct Moments {
    double mean_e, mean_n, var_e, var_n, cov;
};

Moments moments(const Eigen::VectorXd& e, const Eigen::VectorXd& n, const Eigen::VectorXd& w) {
    Moments m{};
    m.mean_e = w.dot(e);
    m.mean_n = w.dot(n);
    const Eigen::ArrayXd de = e.array() - m.mean_e;
    const Eigen::ArrayXd dn = n.array() - m.mean_n;
    m.var_e = (w.array() * de.square()).sum();
    m.var_n = (w.array() * dn.square()).sum();
    m.cov = (w.array() * de * dn).sum();
    return m;
}

// log of the shifted partition sum, the convex dual objective's smooth part
double log_partition(const Eigen::VectorXd& e, const Eigen::VectorXd& n, double beta, double lambda) {
    Eigen::ArrayXd log_w = -beta * e.array() + lambda * n.array();
    const double shift = log_w.maxCoeff();
    return shift + std::log((log_w - shift).exp().sum());
}

// mean energy at fixed lambda is strictly decreasing in beta; bisect it
double bisect_beta(const Eigen::VectorXd& e, const Eigen::VectorXd& n, double lambda,
                   double target, double beta_cap, double tol, int& iterations, bool& hit_cap) {
    auto mean_e = [&](double beta) { return gibbs_weights(e, n, beta, lambda).dot(e); };
    double lo = -beta_cap, hi = beta_cap;
    hit_cap = false;
    if (mean_e(lo) < target) {  // target above even the hottest negative-temperature mean
        hit_cap = true;
        return lo;
    }
    if (mean_e(hi) > target) {  // target below the coldest reachable mean
        hit_cap = true;
        return hi;
    }
    double mid = 0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double v = mean_e(mid);
        ++iterations;
        (v > target ? lo : hi) = mid;
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(mid)) && std::abs(v - target) < tol) break;
    }
    return mid;
}

}  // namespace

EnsembleSolution solve_canonical(const Eigen::VectorXd& energies, double energy_target,
                                 const EnsembleOptions& options) {
    if (energies.size() == 0) throw std::invalid_argument("solve_canonical: empty spectrum");
    const double emin = energies.minCoeff(), emax = energies.maxCoeff();
    const bool interior = (energy_target > emin && energy_target < emax) || emin == emax;
    if (!interior && options.boundary == BoundaryPolicy::Throw)
        throw std::invalid_argument("solve_canonical: target outside the open spectral interval");
    Eigen::VectorXd zeros = Eigen::VectorXd::Zero(energies.size());
    EnsembleSolution sol;
    sol.kind = EnsembleKind::Canonical;
    bool hit_cap = false;
    sol.beta = bisect_beta(energies, zeros, 0.0, energy_target, options.beta_cap,
                           options.tolerance, sol.iterations, hit_cap);
    sol.weights = gibbs_weights(energies, zeros, sol.beta, 0.0);
    sol.residual_energy = sol.weights.dot(energies) - energy_target;
    sol.flag = (hit_cap || !interior) ? EnsembleFlag::BoundaryBeta : EnsembleFlag::Ok;
    return sol;
}

bool strictly_inside_hull(const Eigen::VectorXd& energies, const Eigen::VectorXd& numbers,
                          double energy_target, double number_target, double margin) {
    // Andrew monotone chain on the (E, N) cloud, then strict half-plane tests.
    const Eigen::Index n = energies.size();
    std::vector<std::pair<double, double>> pts(n);
    for (Eigen::Index i = 0; i < n; ++i) pts[i] = {energies[i], numbers[i]};
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return false;
    auto cross = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                    const std::pair<double, double>& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    if (hull.size() < 3) return false;
    const std::pair<double, double> t{energy_target, number_target};
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        const double edge = std::hypot(b.first - a.first, b.second - a.second);
        if (cross(a, b, t) <= margin * std::max(edge, 1.0)) return false;
    }
    return true;
}

EnsembleSolution solve_grand_canonical(const Eigen::VectorXd& energies,
                                       const Eigen::VectorXd& numbers, double energy_target,
                                       double number_target, const EnsembleOptions& options) {
    if (energies.size() != numbers.size() || energies.size() == 0)
        throw std::invalid_argument("solve_grand_canonical: bad spectrum arrays");
    EnsembleSolution sol;
    sol.kind = EnsembleKind::Grand;

    // Degenerate number spread: grand constraints are not independent.
    const double n_spread = numbers.maxCoeff() - numbers.minCoeff();
    if (n_spread < 1e-12) {
        sol = solve_canonical(energies, energy_target, options);
        sol.kind = EnsembleKind::Grand;
        sol.flag = EnsembleFlag::CanonicalFallback;
        sol.residual_number = sol.weights.dot(numbers) - number_target;
        return sol;
    }

    const bool inside = strictly_inside_hull(energies, numbers, energy_target, number_target);
    if (!inside && options.boundary == BoundaryPolicy::Throw)
        throw std::runtime_error("solve_grand_canonical: target outside the eigenstate hull");

    double beta = 0, lambda = 0;
    bool converged = false, diverged = false;
    int it = 0;
    if (inside) {
        // damped Newton on F = log Z + beta E_t - lambda N_t (convex in (beta, lambda))
        double f = log_partition(energies, numbers, beta, lambda) + beta * energy_target -
                   lambda * number_target;
        for (; it < options.max_iterations; ++it) {
            Eigen::VectorXd w = gibbs_weights(energies, numbers, beta, lambda);
            Moments m = moments(energies, numbers, w);
            const double ge = energy_target - m.mean_e;   // dF/dbeta
            const double gn = m.mean_n - number_target;   // dF/dlambda
            if (std::abs(ge) < options.tolerance && std::abs(gn) < options.tolerance) {
                converged = true;
                break;
            }
            // Hessian [[var_e, -cov], [-cov, var_n]]
            const double det = m.var_e * m.var_n - m.cov * m.cov;
            double db, dl;
            if (det > 1e-300) {
                db = -(m.var_n * ge + m.cov * gn) / det;
                dl = -(m.cov * ge + m.var_e * gn) / det;
            } else {  // fall back to gradient descent scaled by the larger variance
                const double s = std::max({m.var_e, m.var_n, 1e-12});
                db = -ge / s;
                dl = -gn / s;
            }
            double step = 1.0;
            for (int ls = 0; ls < 60; ++ls) {
                const double nb = beta + step * db, nl = lambda + step * dl;
                const double nf = log_partition(energies, numbers, nb, nl) + nb * energy_target -
                                  nl * number_target;
                if (nf <= f + 1e-14 * std::abs(f)) {
                    beta = nb;
                    lambda = nl;
                    f = nf;
                    break;
                }
                step *= 0.5;
            }
            if (std::abs(beta) > options.beta_cap || std::abs(lambda) > options.lambda_cap) {
                diverged = true;
                break;
            }
        }
    }

    if (!inside || diverged || !converged) {
        // Boundary-limit solution: clamp lambda in the diverging direction and
        // fit the energy constraint alone.
        const EnsembleSolution canon = solve_canonical(energies, energy_target, options);
        double direction;
        if (diverged && std::abs(lambda) >= options.lambda_cap)
            direction = lambda > 0 ? 1.0 : -1.0;
        else
            direction = (number_target < canon.weights.dot(numbers)) ? -1.0 : 1.0;
        lambda = direction * options.lambda_cap;
        bool hit_beta_cap = false;
        beta = bisect_beta(energies, numbers, lambda, energy_target, options.beta_cap,
                           options.tolerance, it, hit_beta_cap);
        sol.flag = hit_beta_cap ? EnsembleFlag::BoundaryBeta : EnsembleFlag::BoundaryMu;
    }

    sol.beta = beta;
    sol.lambda = lambda;
    sol.mu = std::abs(beta) > 1e-12 ? lambda / beta : 0.0;
    sol.weights = gibbs_weights(energies, numbers, beta, lambda);
    sol.residual_energy = sol.weights.dot(energies) - energy_target;
    sol.residual_number = sol.weights.dot(numbers) - number_target;
    sol.iterations = it;
    return sol;
}

double ensemble_average(const EnsembleSolution& solution, const Eigen::VectorXd& eev_column) {
    if (solution.weights.size() != eev_column.size())
        throw std::invalid_argument("ensemble_average: dimension mismatch");
    return solution.weights.dot(eev_column);
}

Eigen::MatrixXcd reduced_dm_mixture(const Eigen::VectorXd& weights, const Spectrum& spectrum,
                                    const SymmetrySector& sector, const RegionMap& region) {
    if (static_cast<std::size_t>(weights.size()) != spectrum.dim())
        throw std::invalid_argument("reduced_dm_mixture: weight dimension mismatch");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(region.region_dim(), region.region_dim());
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights[i] < 1e-300) continue;
        Eigen::VectorXcd full =
            sector.expand(Eigen::VectorXcd(spectrum.vectors.col(i).cast<Complex>()));
        rho += weights[i] * reduced_dm(full, region);
    }
    return rho;
}

}  // namespace scarlab
