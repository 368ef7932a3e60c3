#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "triad/features.hpp"
#include "triad/matrix.hpp"
#include "triad/rng.hpp"

using namespace triad;

TEST_CASE("matrix products against hand values") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
    const Matrix ab = matmul(a, b);
    CHECK(ab(0, 0) == 19);
    CHECK(ab(0, 1) == 22);
    CHECK(ab(1, 0) == 43);
    CHECK(ab(1, 1) == 50);

    const Matrix abt = matmul_nt(a, b);
    CHECK(abt(0, 0) == 17); // (1,2)·(5,6)
    CHECK(abt(1, 1) == 53); // (3,4)·(7,8)

    const Matrix atb = matmul_tn(a, b);
    CHECK(atb(0, 0) == 26); // (1,3)·(5,7)

    CHECK_THROWS_AS(matmul(a, Matrix(3, 2)), ShapeMismatch);

    const Matrix cs = col_sums(a);
    CHECK(cs(0, 0) == 4);
    CHECK(cs(0, 1) == 6);
}

TEST_CASE("l2_normalize hand cases") {
    FeatureMatrix x;
    x.values = Matrix::from_rows({{3, 4}});
    const FeatureMatrix n = l2_normalize(x);
    CHECK(n.values(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(n.values(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(n.normalized);

    FeatureMatrix unit;
    unit.values = Matrix::from_rows({{1, 0}});
    const FeatureMatrix nu = l2_normalize(unit);
    CHECK(nu.values(0, 0) == 1.0);
    CHECK(nu.values(0, 1) == 0.0);

    FeatureMatrix neg;
    neg.values = Matrix::from_rows({{-2, 0, 0}});
    const FeatureMatrix nn = l2_normalize(neg);
    CHECK(nn.values(0, 0) == -1.0);
    CHECK(nn.values(0, 1) == 0.0);
    CHECK(nn.values(0, 2) == 0.0);
}

TEST_CASE("l2_normalize rejects zero rows") {
    FeatureMatrix x;
    x.values = Matrix::from_rows({{1, 0}, {0, 0}});
    CHECK_THROWS_AS(l2_normalize(x), ZeroRowNorm);
}

TEST_CASE("l2_normalize is idempotent") {
    RngStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = oracle::random_matrix(rng, 5, 8);
        const Matrix once = l2_normalize_rows(m);
        const Matrix twice = l2_normalize_rows(once);
        CHECK(max_abs_diff(once, twice) < 1e-6);
        for (int i = 0; i < once.rows(); ++i) {
            CHECK(row_norm(once, i) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("cosine_similarity_rows hand cases") {
    const Matrix a = Matrix::from_rows({{1, 0}, {0, 2}});

    SUBCASE("identical rows give 1") {
        const auto sims = cosine_similarity_rows(a, a);
        CHECK(sims[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sims[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("orthogonal rows give 0") {
        const Matrix b = Matrix::from_rows({{0, 3}, {5, 0}});
        const auto sims = cosine_similarity_rows(a, b);
        CHECK(sims[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sims[1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("antiparallel rows give -1") {
        const Matrix b = Matrix::from_rows({{-2, 0}, {0, -7}});
        const auto sims = cosine_similarity_rows(a, b);
        CHECK(sims[0] == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(sims[1] == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(cosine_similarity_rows(a, Matrix(2, 3)), ShapeMismatch);
    }
    SUBCASE("zero row") {
        const Matrix z = Matrix::from_rows({{0, 0}, {1, 1}});
        CHECK_THROWS_AS(cosine_similarity_rows(a, z), ZeroRowNorm);
    }
}

TEST_CASE("cosine similarity is invariant to positive row scaling") {
    RngStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = oracle::random_matrix(rng, 4, 6);
        const Matrix b = oracle::random_matrix(rng, 4, 6);
        Matrix a_scaled = a;
        for (int i = 0; i < a_scaled.rows(); ++i) {
            const double s = rng.uniform(0.1, 10.0);
            for (int j = 0; j < a_scaled.cols(); ++j) {
                a_scaled(i, j) *= s;
            }
        }
        const auto base = cosine_similarity_rows(a, b);
        const auto scaled = cosine_similarity_rows(a_scaled, b);
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(std::fabs(base[i] - scaled[i]) < 1e-6);
            CHECK(base[i] >= -1.0);
            CHECK(base[i] <= 1.0);
        }
    }
}

TEST_CASE("rng determinism and stream independence") {
    RngStream a(42);
    RngStream b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }

    RngStream c(42);
    RngStream d(43);
    bool any_diff = false;
    for (int i = 0; i < 10; ++i) {
        any_diff |= (c.next_u64() != d.next_u64());
    }
    CHECK(any_diff);

    // split() derives from the seed, not the position.
    RngStream parent(7);
    parent.next_u64();
    RngStream s1 = parent.split(3);
    RngStream s2 = RngStream(7).split(3);
    CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("rng gauss consumes exactly two draws and repeats per seed") {
    RngStream a(5);
    RngStream b(5);
    const double g1 = a.gauss();
    CHECK(a.position() == 2);
    const double g2 = b.gauss();
    CHECK(g1 == g2);
}

TEST_CASE("rng permutation is a permutation") {
    RngStream rng(3);
    const auto p = rng.permutation(50);
    std::vector<bool> seen(50, false);
    for (int v : p) {
        REQUIRE(v >= 0);
        REQUIRE(v < 50);
        CHECK(!seen[static_cast<std::size_t>(v)]);
        seen[static_cast<std::size_t>(v)] = true;
    }
}
