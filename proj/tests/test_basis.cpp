#include "scarlab/basis.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

using namespace scarlab;

namespace {

// Independent brute-force enumeration: all base-q strings, cyclic blockade scan.
std::vector<std::vector<int>> brute_force_states(int D, int j) {
    const int q = 2 * j + 1;
    std::vector<std::vector<int>> out;
    std::vector<int> lv(D, 0);
    while (true) {
        bool ok = true;
        for (int k = 0; k < D; ++k)
            if (lv[k] == q - 1 && lv[(k + 1) % D] == 0) ok = false;
        if (ok) out.push_back(lv);
        int pos = D - 1;
        while (pos >= 0 && lv[pos] == q - 1) lv[pos--] = 0;
        if (pos < 0) break;
        ++lv[pos];
    }
    return out;
}

ProductState make_state(std::initializer_list<int> levels) {
    ProductState s;
    for (int lv : levels) s.levels.push_back(static_cast<std::int8_t>(lv));
    return s;
}

}  // namespace

TEST_CASE("constrained basis dimensions match brute force and transfer matrix") {
    for (int j = 1; j <= 2; ++j) {
        for (int D = 2; D <= 6; ++D) {
            auto basis = ConstrainedBasis::enumerate(D, j);
            auto brute = brute_force_states(D, j);
            REQUIRE(basis.dim() == brute.size());
            REQUIRE(basis.dim() == ConstrainedBasis::transfer_matrix_dim(D, j));
            // and in the same lexicographic order
            for (std::size_t i = 0; i < brute.size(); ++i) {
                ProductState s = basis.state(i);
                for (int k = 0; k < D; ++k) CHECK(s.levels[k] == brute[i][k]);
            }
        }
    }
    CHECK(ConstrainedBasis::transfer_matrix_dim(2, 1) == 7);
    CHECK(ConstrainedBasis::transfer_matrix_dim(3, 1) == 18);
    CHECK(ConstrainedBasis::transfer_matrix_dim(4, 1) == 47);
    CHECK(ConstrainedBasis::transfer_matrix_dim(10, 1) == 15127);
    CHECK(ConstrainedBasis::enumerate(10, 1).dim() == 15127);
}

TEST_CASE("basis rejects bad geometry and oversized requests") {
    CHECK_THROWS_AS(ConstrainedBasis::enumerate(1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ConstrainedBasis::enumerate(10, 0), std::invalid_argument);
    CHECK_THROWS_AS(ConstrainedBasis::enumerate(10, 1, 100), std::runtime_error);
}

TEST_CASE("index_of is the lexicographic ordinal and rejects blockaded states") {
    auto basis = ConstrainedBasis::enumerate(2, 1);
    REQUIRE(basis.dim() == 7);
    CHECK(basis.index_of(make_state({0, 0})).value() == 0);  // |-1,-1>
    CHECK_FALSE(basis.index_of(make_state({2, 0})).has_value());  // |1,-1> blockaded
    CHECK_FALSE(basis.index_of(make_state({0, 2})).has_value());  // |-1,1> blockaded
    for (std::size_t k = 0; k < basis.dim(); ++k) CHECK(basis.index_of(basis.state(k)).value() == k);
    CHECK_THROWS_AS(basis.index_of(make_state({0, 0, 0})), std::invalid_argument);
    CHECK_THROWS_AS(basis.index_of(make_state({0, 5})), std::invalid_argument);
}

TEST_CASE("translation and spin-flip inversion map the basis onto itself") {
    for (int j = 1; j <= 2; ++j) {
        auto basis = ConstrainedBasis::enumerate(4, j);
        std::set<std::size_t> t_images, i_images;
        for (std::size_t s = 0; s < basis.dim(); ++s) {
            t_images.insert(basis.translated_index(s, 1));
            i_images.insert(basis.spin_flip_inverted_index(s));
        }
        CHECK(t_images.size() == basis.dim());
        CHECK(i_images.size() == basis.dim());
    }
}

TEST_CASE("momentum-zero sector dimensions") {
    auto b3 = ConstrainedBasis::enumerate(3, 1);
    auto s3 = SymmetrySector::momentum_zero(b3, true);
    CHECK(s3.dim() == 8);  // Burnside: (18 + 3 + 3)/3
    CHECK(s3.dim_even() + s3.dim_odd() == 8);
    CHECK(s3.dim_even() == 5);
    CHECK(s3.dim_odd() == 3);

    auto b2 = ConstrainedBasis::enumerate(2, 1);
    auto s2 = SymmetrySector::momentum_zero(b2, false);
    CHECK(s2.dim() == 5);  // orbits of the 7 states under the 2-cycle
    CHECK_FALSE(s2.parity_resolved());
}

TEST_CASE("uniform state is its own momentum-zero vector") {
    auto basis = ConstrainedBasis::enumerate(4, 1);
    auto sector = SymmetrySector::momentum_zero(basis, false);
    ProductState uniform = make_state({2, 2, 2, 2});
    const std::size_t full = basis.index_of(uniform).value();
    const std::size_t orbit = sector.orbit_of_state(full);
    CHECK(sector.orbit_period(orbit) == 1);
    auto coords = sector.orbit_in_sector(orbit);
    REQUIRE(coords.size() == 1);
    CHECK(coords[0].second == doctest::Approx(1.0));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(sector.dim());
    v[coords[0].first] = 1.0;
    Eigen::VectorXd fullv = sector.expand(v);
    CHECK(fullv[full] == doctest::Approx(1.0));
    CHECK(fullv.norm() == doctest::Approx(1.0));

    // parity-resolved, the same orbit splits across its inversion partner
    auto resolved = SymmetrySector::momentum_zero(basis, true);
    auto rcoords = resolved.orbit_in_sector(resolved.orbit_of_state(full));
    REQUIRE(rcoords.size() == 2);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(resolved.dim());
    for (auto [p, coeff] : rcoords) w[p] = coeff;
    Eigen::VectorXd fullw = resolved.expand(w);
    CHECK((fullw - fullv).norm() < 1e-14);
}

TEST_CASE("sector vectors are orthonormal translation eigenvectors with eigenvalue 1") {
    for (int D : {3, 5}) {
        auto basis = ConstrainedBasis::enumerate(D, 1);
        auto sector = SymmetrySector::momentum_zero(basis, true);
        Eigen::MatrixXd v(basis.dim(), sector.dim());
        for (std::size_t p = 0; p < sector.dim(); ++p) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(sector.dim());
            e[p] = 1.0;
            v.col(p) = sector.expand(e);
        }
        Eigen::MatrixXd gram = v.transpose() * v;
        CHECK((gram - Eigen::MatrixXd::Identity(sector.dim(), sector.dim())).norm() < 1e-12);
        // translation acts as identity on every sector vector
        for (std::size_t p = 0; p < sector.dim(); ++p) {
            Eigen::VectorXd shifted = Eigen::VectorXd::Zero(basis.dim());
            for (std::size_t s = 0; s < basis.dim(); ++s) shifted[sector.translated_state(s)] += v(s, p);
            CHECK((shifted - v.col(p)).norm() < 1e-12);
        }
    }
}

TEST_CASE("expand/project are mutually inverse isometries on the sector") {
    auto basis = ConstrainedBasis::enumerate(5, 1);
    auto sector = SymmetrySector::momentum_zero(basis, true);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(sector.dim());
    CHECK(sector.expand(zero).norm() == 0.0);

    Eigen::VectorXd a(sector.dim()), b(sector.dim());
    for (std::size_t i = 0; i < sector.dim(); ++i) {
        a[i] = std::sin(0.7 * static_cast<double>(i) + 0.3);
        b[i] = std::cos(1.3 * static_cast<double>(i));
    }
    a.normalize();
    b -= a * a.dot(b);
    b.normalize();
    Eigen::VectorXd fa = sector.expand(a), fb = sector.expand(b);
    CHECK(fa.norm() == doctest::Approx(1.0));
    CHECK(fb.norm() == doctest::Approx(1.0));
    CHECK(std::abs(fa.dot(fb)) < 1e-12);
    CHECK((sector.project(fa) - a).norm() < 1e-12);

    Eigen::VectorXd wrong_size = Eigen::VectorXd::Zero(sector.dim() + 1);
    CHECK_THROWS_AS(sector.expand(wrong_size), std::invalid_argument);
}

TEST_CASE("parity blocks partition the sector and match the inversion symmetry") {
    auto basis = ConstrainedBasis::enumerate(4, 1);
    auto sector = SymmetrySector::momentum_zero(basis, true);
    for (std::size_t p = 0; p < sector.dim(); ++p) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(sector.dim());
        e[p] = 1.0;
        Eigen::VectorXd v = sector.expand(e);
        Eigen::VectorXd iv = Eigen::VectorXd::Zero(basis.dim());
        for (std::size_t s = 0; s < basis.dim(); ++s) iv[basis.spin_flip_inverted_index(s)] += v[s];
        const double sign = sector.parity(p);
        CHECK((iv - sign * v).norm() < 1e-12);
        CHECK(((p < sector.dim_even()) ? 1 : -1) == sector.parity(p));
    }
}
