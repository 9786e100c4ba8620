#include "scarlab/ensembles.hpp"

#include <doctest.h>

#include <cmath>

using namespace scarlab;

namespace {

struct Workspace {
    ConstrainedBasis basis;
    SymmetrySector sector;
    Spectrum spectrum;
    Eigen::VectorXd numbers;
};

Workspace make_workspace(int D, int j) {
    auto basis = ConstrainedBasis::enumerate(D, j);
    auto sector = SymmetrySector::momentum_zero(basis, true);
    auto h = project_to_sector(build_hamiltonian(basis), sector);
    auto n = project_to_sector(build_number_operator(basis), sector);
    auto spec = diagonalize(h, D, j);
    auto table = eev_table(spec, n, {}, {});
    return {std::move(basis), std::move(sector), std::move(spec), table.number};
}

}  // namespace

TEST_CASE("canonical solver: flat mean, boundaries, dense-grid oracle") {
    auto ws = make_workspace(3, 1);
    const auto& e = ws.spectrum.energies;

    // E_target at the flat mean gives beta = 0
    auto flat = solve_canonical(e, e.mean());
    CHECK(std::abs(flat.beta) < 1e-6);
    CHECK(flat.flag == EnsembleFlag::Ok);
    CHECK(std::abs(flat.residual_energy) < 1e-9);

    // target at the spectral edge: boundary report, weights pile on the edge state
    auto edge = solve_canonical(e, e.minCoeff());
    CHECK(edge.flag == EnsembleFlag::BoundaryBeta);
    CHECK(edge.beta > 10.0);
    CHECK(std::abs(edge.residual_energy) < 1e-8);
    EnsembleOptions strict;
    strict.boundary = BoundaryPolicy::Throw;
    CHECK_THROWS(solve_canonical(e, e.minCoeff() - 1.0, strict));

    // dense beta-grid oracle for a target from an equal mix of two eigenstates
    const double target = 0.5 * (e[1] + e[4]);
    auto sol = solve_canonical(e, target);
    REQUIRE(sol.flag == EnsembleFlag::Ok);
    auto scan = [&](double lo, double hi, double step) {
        double best_beta = lo, best_err = 1e300;
        for (double b = lo; b <= hi; b += step) {
            const Eigen::VectorXd w = gibbs_weights(e, Eigen::VectorXd::Zero(e.size()), b, 0.0);
            const double err = std::abs(w.dot(e) - target);
            if (err < best_err) {
                best_err = err;
                best_beta = b;
            }
        }
        return best_beta;
    };
    const double coarse = scan(-30.0, 30.0, 1e-3);
    const double best_beta = scan(coarse - 2e-3, coarse + 2e-3, 1e-7);
    CHECK(sol.beta == doctest::Approx(best_beta).epsilon(1e-6));
    // constraint identity: <H> = target
    CHECK(ensemble_average(sol, e) == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("grand-canonical solver: self-consistency round trip") {
    auto ws = make_workspace(4, 1);
    const auto& e = ws.spectrum.energies;
    const auto& n = ws.numbers;

    const Eigen::VectorXd w_true = gibbs_weights(e, n, 0.5, 0.5 * 0.3);  // beta=0.5, mu=0.3
    const double et = w_true.dot(e), nt = w_true.dot(n);
    auto sol = solve_grand_canonical(e, n, et, nt);
    CHECK(sol.flag == EnsembleFlag::Ok);
    CHECK(sol.beta == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sol.mu == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(std::abs(sol.residual_energy) < 1e-8);
    CHECK(std::abs(sol.residual_number) < 1e-8);
    CHECK(sol.iterations < 100);

    // flat target: beta = 0, mu reported as 0
    auto flat = solve_grand_canonical(e, n, e.mean(), n.mean());
    CHECK(std::abs(flat.beta) < 1e-6);
    CHECK(flat.mu == 0.0);

    // ensemble averages hit both constraints
    CHECK(ensemble_average(sol, e) == doctest::Approx(et).epsilon(1e-8));
    CHECK(ensemble_average(sol, n) == doctest::Approx(nt).epsilon(1e-8));
}

TEST_CASE("grand-canonical solver: boundary targets and fallbacks") {
    auto ws = make_workspace(4, 1);
    const auto& e = ws.spectrum.energies;
    const auto& n = ws.numbers;

    // psi1-like target (E, N) = (0, 0): N below every eigenstate's N_i
    REQUIRE(n.minCoeff() > 0.0);
    CHECK_FALSE(strictly_inside_hull(e, n, 0.0, 0.0));
    auto sol = solve_grand_canonical(e, n, 0.0, 0.0);
    CHECK(sol.flag == EnsembleFlag::BoundaryMu);
    CHECK(sol.lambda == doctest::Approx(-200.0));  // beta*mu clamped negative
    CHECK(std::abs(sol.residual_energy) < 1e-8);   // energy constraint still met
    CHECK(std::isfinite(sol.mu));

    EnsembleOptions strict;
    strict.boundary = BoundaryPolicy::Throw;
    CHECK_THROWS(solve_grand_canonical(e, n, 0.0, 0.0, strict));

    // singular covariance: all numbers equal -> canonical fallback
    Eigen::VectorXd n_const = Eigen::VectorXd::Constant(e.size(), 2.0);
    auto fb = solve_grand_canonical(e, n_const, e.mean(), 2.0);
    CHECK(fb.flag == EnsembleFlag::CanonicalFallback);

    // interior eigenstate targets converge
    int inside_count = 0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (!strictly_inside_hull(e, n, e[i], n[i])) continue;
        ++inside_count;
        auto s = solve_grand_canonical(e, n, e[i], n[i]);
        CHECK(s.flag == EnsembleFlag::Ok);
        CHECK(s.iterations < 100);
        CHECK(std::abs(s.residual_energy) < 1e-8);
        CHECK(std::abs(s.residual_number) < 1e-8);
    }
    CHECK(inside_count > 0);
}

TEST_CASE("reduced density matrices") {
    auto basis = ConstrainedBasis::enumerate(3, 1);
    RegionMap region(basis, {0});

    // product state |1,1,1>: single-site DM = diag(0,0,1) in (-1,0,1) ordering
    ProductState uniform;
    uniform.levels = {2, 2, 2};
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.dim());
    psi[basis.index_of(uniform).value()] = 1.0;
    Eigen::MatrixXcd rho = reduced_dm(psi, region);
    CHECK(std::abs(rho(2, 2) - Complex(1, 0)) < 1e-14);
    CHECK(std::abs(rho.trace() - Complex(1, 0)) < 1e-14);
    CHECK(rho.norm() == doctest::Approx(1.0));

    // flat mixture over all 18 basis states: diagonal (5, 8, 5)/18 by direct count
    Eigen::MatrixXcd flat_mix = Eigen::MatrixXcd::Zero(3, 3);
    for (std::size_t s = 0; s < basis.dim(); ++s) {
        Eigen::VectorXcd es_vec = Eigen::VectorXcd::Zero(basis.dim());
        es_vec[s] = 1.0;
        flat_mix += reduced_dm(es_vec, region) / static_cast<double>(basis.dim());
    }
    CHECK(std::abs(flat_mix(0, 0).real() - 5.0 / 18.0) < 1e-14);
    CHECK(std::abs(flat_mix(1, 1).real() - 8.0 / 18.0) < 1e-14);
    CHECK(std::abs(flat_mix(2, 2).real() - 5.0 / 18.0) < 1e-14);

    // eigenstate mixture built through the sector machinery
    auto ws = make_workspace(3, 1);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(ws.spectrum.dim(),
                                                  1.0 / static_cast<double>(ws.spectrum.dim()));
    Eigen::MatrixXcd mix = reduced_dm_mixture(w, ws.spectrum, ws.sector, region);
    CHECK(std::abs(mix.trace() - Complex(1, 0)) < 1e-12);
    CHECK((mix - mix.adjoint()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mix);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);

    // region = all sites reproduces the projector itself
    RegionMap whole(basis, {0, 1, 2});
    Eigen::MatrixXcd proj = reduced_dm(psi, whole);
    CHECK(std::abs(proj.trace() - Complex(1, 0)) < 1e-14);
    CHECK((proj * proj - proj).norm() < 1e-12);

    CHECK_THROWS_AS(RegionMap(basis, {}), std::invalid_argument);
    CHECK_THROWS_AS(RegionMap(basis, {7}), std::invalid_argument);
}

TEST_CASE("trace distance") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2), b = a, c = a;
    a(0, 0) = 1.0;
    b(1, 1) = 1.0;
    c(0, 0) = c(1, 1) = 0.5;
    CHECK(trace_distance(a, a) == doctest::Approx(0.0));
    CHECK(trace_distance(a, b) == doctest::Approx(1.0));  // orthogonal pure states
    CHECK(trace_distance(a, c) == doctest::Approx(0.5));  // diag(1,0) vs diag(1/2,1/2)

    // triangle inequality on deterministic pseudo-random Hermitian triples
    auto make_dm = [](int seed) {
        Eigen::MatrixXcd m(3, 3);
        for (int r = 0; r < 3; ++r)
            for (int col = 0; col < 3; ++col)
                m(r, col) = Complex(std::sin(seed + 3.1 * r + col), std::cos(2.0 * seed - r + 1.7 * col));
        Eigen::MatrixXcd dm = m * m.adjoint();
        return (dm / dm.trace().real()).eval();
    };
    for (int seed = 0; seed < 10; ++seed) {
        auto x = make_dm(3 * seed), y = make_dm(3 * seed + 1), z = make_dm(3 * seed + 2);
        CHECK(trace_distance(x, z) <= trace_distance(x, y) + trace_distance(y, z) + 1e-10);
    }
    Eigen::MatrixXcd wrong = Eigen::MatrixXcd::Zero(3, 3);
    CHECK_THROWS_AS(trace_distance(a, wrong), std::invalid_argument);
}
