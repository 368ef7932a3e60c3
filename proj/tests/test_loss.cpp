#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "triad/loss.hpp"

using namespace triad;

namespace {

FeatureMatrix feat(Matrix m, Modality mod = Modality::Eeg, bool normalized = true) {
    return FeatureMatrix{std::move(m), mod, normalized};
}

} // namespace

TEST_CASE("info_nce single pair is exactly zero") {
    const FeatureMatrix a = feat(Matrix::from_rows({{0.6, 0.8}}));
    const FeatureMatrix t = feat(Matrix::from_rows({{1.0, 0.0}}));
    CHECK(info_nce(a, t, 0.07) == 0.0);
}

TEST_CASE("info_nce uniform similarities give ln 2") {
    // Two identical rows: every pairwise similarity is equal, so the softmax
    // is uniform over the two candidates.
    const Matrix rows = Matrix::from_rows({{1.0, 0.0}, {1.0, 0.0}});
    const double loss = info_nce(feat(rows), feat(rows), 0.07);
    CHECK(std::fabs(loss - std::log(2.0)) < 1e-9);
}

TEST_CASE("info_nce orthonormal pairs at tau 0.07") {
    const Matrix eye = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    const double loss = info_nce(feat(eye), feat(eye), 0.07);
    const double expected = std::log(1.0 + std::exp(-1.0 / 0.07));
    CHECK(std::fabs(loss - expected) < 1e-12);
    CHECK(loss == doctest::Approx(6.2e-7).epsilon(0.05));
}

TEST_CASE("info_nce input validation") {
    const FeatureMatrix a = feat(Matrix::from_rows({{1.0, 0.0}}));
    CHECK_THROWS_AS(info_nce(a, feat(Matrix(1, 3)), 0.07), ShapeMismatch);

    Matrix bad = Matrix::from_rows({{1.0, 0.0}});
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(info_nce(a, feat(std::move(bad)), 0.07), NonFiniteInput);

    CHECK_THROWS_AS(info_nce(a, a, 0.0), InvalidConfig);
}

TEST_CASE("info_nce symmetry when anchor equals target") {
    RngStream rng(2);
    const Matrix m = oracle::random_normalized(rng, 4, 6);
    CHECK(info_nce(feat(m), feat(m), 0.07) == info_nce(feat(m), feat(m), 0.07));
}

TEST_CASE("info_nce decreases when a positive-pair similarity increases") {
    // With anchors as basis rows, target row j holds column j of the
    // similarity matrix, so similarities can be dialed in directly.
    RngStream rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int b = 4;
        Matrix anchors(b, b);
        for (int i = 0; i < b; ++i) anchors(i, i) = 1.0;
        Matrix sims(b, b);
        for (double& v : sims.flat()) v = rng.uniform(-0.5, 0.5);

        Matrix bumped = sims;
        const int k = static_cast<int>(rng.below(b));
        bumped(k, k) += 0.05;

        const double before = info_nce(feat(anchors), feat(transpose(sims)), 0.1);
        const double after = info_nce(feat(anchors), feat(transpose(bumped)), 0.1);
        CHECK(after < before);
    }
}

TEST_CASE("cosine alignment loss endpoints") {
    const Matrix a = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});

    CHECK(cosine_alignment_loss(feat(a), feat(a)) == doctest::Approx(0.0).epsilon(1e-12));

    const Matrix orth = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    CHECK(cosine_alignment_loss(feat(a), feat(orth)) == doctest::Approx(1.0).epsilon(1e-12));

    Matrix anti = a;
    anti.scale_in_place(-1.0);
    CHECK(cosine_alignment_loss(feat(a), feat(anti)) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(cosine_alignment_loss(feat(a), feat(Matrix(2, 3))), ShapeMismatch);
    CHECK_THROWS_AS(cosine_alignment_loss(feat(a), feat(Matrix(2, 2))), ZeroRowNorm);
}

TEST_CASE("adapter consistency loss is scale invariant") {
    RngStream rng(5);
    const Matrix orig = oracle::random_matrix(rng, 3, 4);

    CHECK(adapter_consistency_loss(feat(orig), feat(orig)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    Matrix scaled = orig;
    scaled.scale_in_place(3.0);
    CHECK(adapter_consistency_loss(feat(scaled), feat(orig)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    const Matrix a = Matrix::from_rows({{1.0, 0.0}});
    const Matrix b = Matrix::from_rows({{0.0, 1.0}});
    CHECK(adapter_consistency_loss(feat(a), feat(b)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("total_loss with B=1 reduces to the cosine term") {
    RngStream rng(3);
    const Matrix e = oracle::random_normalized(rng, 1, 4);
    const Matrix i = oracle::random_normalized(rng, 1, 4);
    const Matrix t = oracle::random_normalized(rng, 1, 4);
    const LossReport r = total_loss(feat(e), feat(i, Modality::Image), feat(t, Modality::Text),
                                    feat(t, Modality::Text), LossConfig{0.07, 1.0});
    CHECK(r.ce_eeg_img == 0.0);
    CHECK(r.ce_img_eeg == 0.0);
    CHECK(r.ce_eeg_text == 0.0);
    CHECK(r.ce_text_eeg == 0.0);
    CHECK(r.adapter_consistency == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.total == doctest::Approx(r.cos_img_text / 5.0).epsilon(1e-12));
}

TEST_CASE("total_loss on identical modalities with equal similarities") {
    const Matrix rows = Matrix::from_rows({{1.0, 0.0}, {1.0, 0.0}});
    const LossReport r = total_loss(feat(rows), feat(rows, Modality::Image),
                                    feat(rows, Modality::Text), feat(rows, Modality::Text),
                                    LossConfig{0.07, 1.0});
    CHECK(std::fabs(r.total - 4.0 * std::log(2.0) / 5.0) < 1e-9);
    CHECK(r.total == doctest::Approx(0.554518).epsilon(1e-5));
    CHECK(r.adapter_consistency == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("total_loss matches the direct-summation oracle on 100 random instances") {
    RngStream rng(0);
    for (int trial = 0; trial < 100; ++trial) {
        const int b = 4, d = 8;
        const Matrix e = oracle::random_normalized(rng, b, d);
        const Matrix i = oracle::random_normalized(rng, b, d);
        const Matrix t = oracle::random_normalized(rng, b, d);
        const Matrix traw = oracle::random_normalized(rng, b, d);
        const double lambda_r = rng.uniform(0.0, 2.0);

        const LossReport r = total_loss(feat(e), feat(i, Modality::Image),
                                        feat(t, Modality::Text), feat(traw, Modality::Text),
                                        LossConfig{0.07, lambda_r});
        const double expected = oracle::total_loss_direct(e, i, t, traw, 0.07, lambda_r);
        CHECK(std::fabs(r.total - expected) < 1e-9);

        // The report's parts recombine into its total.
        const double recombined =
            (r.ce_eeg_img + r.ce_img_eeg + r.ce_eeg_text + r.ce_text_eeg + r.cos_img_text) / 5.0 +
            lambda_r * r.adapter_consistency;
        CHECK(std::fabs(r.total - recombined) < 1e-9);
    }
}

TEST_CASE("every loss term is invariant to a joint batch permutation") {
    RngStream rng(8);
    const int b = 5, d = 6;
    const Matrix e = oracle::random_normalized(rng, b, d);
    const Matrix i = oracle::random_normalized(rng, b, d);
    const Matrix t = oracle::random_normalized(rng, b, d);

    std::vector<int> perm = rng.permutation(b);
    auto apply = [&](const Matrix& m) {
        Matrix out(b, d);
        for (int r = 0; r < b; ++r) {
            for (int c = 0; c < d; ++c) {
                out(r, c) = m(perm[static_cast<std::size_t>(r)], c);
            }
        }
        return out;
    };

    const LossReport base = total_loss(feat(e), feat(i, Modality::Image),
                                       feat(t, Modality::Text), feat(t, Modality::Text),
                                       LossConfig{0.07, 1.0});
    const LossReport permuted = total_loss(feat(apply(e)), feat(apply(i), Modality::Image),
                                           feat(apply(t), Modality::Text),
                                           feat(apply(t), Modality::Text), LossConfig{0.07, 1.0});
    CHECK(std::fabs(base.ce_eeg_img - permuted.ce_eeg_img) < 1e-9);
    CHECK(std::fabs(base.ce_img_eeg - permuted.ce_img_eeg) < 1e-9);
    CHECK(std::fabs(base.ce_eeg_text - permuted.ce_eeg_text) < 1e-9);
    CHECK(std::fabs(base.ce_text_eeg - permuted.ce_text_eeg) < 1e-9);
    CHECK(std::fabs(base.cos_img_text - permuted.cos_img_text) < 1e-9);
    CHECK(std::fabs(base.total - permuted.total) < 1e-9);
}

TEST_CASE("combine_loss_report with the text modality off averages two terms") {
    const LossReport r = combine_loss_report(0.4, 0.6, 9.0, 9.0, 9.0, 9.0,
                                             /*text_active=*/false, 1.0);
    CHECK(r.total == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.ce_eeg_text == 0.0);
    CHECK(r.cos_img_text == 0.0);
    CHECK(r.adapter_consistency == 0.0);
}
