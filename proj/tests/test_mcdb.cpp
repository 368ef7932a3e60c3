#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "triad/mcdb.hpp"

using namespace triad;

namespace {

BalanceConfig cfg_with(double gamma = 0.7, SimilarityNorm mode = SimilarityNorm::JointAcrossModalities,
                       double tau = 0.07) {
    BalanceConfig c;
    c.gamma = gamma;
    c.mode = mode;
    c.tau = tau;
    return c;
}

std::map<Modality, SimilarityMatrix> sims_for(const Matrix& eeg, const Matrix& img,
                                              const Matrix& txt, const BalanceConfig& c) {
    FeatureMatrix f{eeg, Modality::Eeg, true};
    return cross_modal_similarity(f, {{Modality::Image, &img}, {Modality::Text, &txt}}, c);
}

} // namespace

TEST_CASE("joint similarity with identical features is uniform at 1/(2B)") {
    RngStream rng(1);
    const Matrix m = oracle::random_normalized(rng, 3, 5);
    // All rows identical across samples and modalities -> uniform logits.
    Matrix same(3, 5);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 5; ++j) {
            same(i, j) = m(0, j);
        }
    }
    const auto sims = sims_for(same, same, same, cfg_with());
    for (const auto& [mod, s] : sims) {
        for (double v : s.values.flat()) {
            CHECK(v == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("per-row-literal similarity rows sum to one per modality") {
    RngStream rng(2);
    const Matrix e = oracle::random_normalized(rng, 4, 6);
    const Matrix i = oracle::random_normalized(rng, 4, 6);
    const Matrix t = oracle::random_normalized(rng, 4, 6);
    const auto sims = sims_for(e, i, t, cfg_with(0.7, SimilarityNorm::PerRowLiteral));
    for (const auto& [mod, s] : sims) {
        for (int r = 0; r < 4; ++r) {
            double row = 0.0;
            for (int c = 0; c < 4; ++c) {
                row += s.values(r, c);
                CHECK(s.values(r, c) >= 0.0);
                CHECK(s.values(r, c) <= 1.0);
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("joint similarity rows sum to one across all target modalities") {
    RngStream rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const int b = 2 + static_cast<int>(rng.below(5));
        const Matrix e = oracle::random_normalized(rng, b, 6);
        const Matrix i = oracle::random_normalized(rng, b, 6);
        const Matrix t = oracle::random_normalized(rng, b, 6);
        const auto sims = sims_for(e, i, t, cfg_with());
        for (int r = 0; r < b; ++r) {
            double row = 0.0;
            for (const auto& [m, s] : sims) {
                for (int c = 0; c < b; ++c) {
                    row += s.values(r, c);
                    CHECK(s.values(r, c) >= 0.0);
                    CHECK(s.values(r, c) <= 1.0);
                }
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("joint similarity two-way softmax at B=1") {
    // Image candidate at similarity 1, text candidate at 0, tau = 1:
    // a textbook two-way softmax.
    const Matrix e = Matrix::from_rows({{1.0, 0.0}});
    const Matrix img = Matrix::from_rows({{1.0, 0.0}});
    const Matrix txt = Matrix::from_rows({{0.0, 1.0}});
    const auto sims = sims_for(e, img, txt, cfg_with(0.7, SimilarityNorm::JointAcrossModalities, 1.0));
    const double expected_img = std::exp(1.0) / (std::exp(1.0) + 1.0);
    CHECK(sims.at(Modality::Image).values(0, 0) == doctest::Approx(expected_img).epsilon(1e-9));
    CHECK(sims.at(Modality::Text).values(0, 0) ==
          doctest::Approx(1.0 - expected_img).epsilon(1e-9));
    CHECK(sims.at(Modality::Image).values(0, 0) == doctest::Approx(0.7311).epsilon(1e-3));
}

TEST_CASE("contribution_vector is the column sums") {
    SimilarityMatrix s;
    s.target = Modality::Image;

    SUBCASE("uniform joint matrix gives 1/2 per element") {
        s.values = Matrix(2, 2);
        s.values.fill(0.25); // 1/(2B) with B=2
        const ContributionVector c = contribution_vector(s);
        CHECK(c.values[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(c.values[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("identity-like matrix gives all ones") {
        s.values = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
        const ContributionVector c = contribution_vector(s);
        CHECK(c.values[0] == 1.0);
        CHECK(c.values[1] == 1.0);
    }
    SUBCASE("hand-computed column sums") {
        s.values = Matrix::from_rows({{0.6, 0.1}, {0.2, 0.1}});
        const ContributionVector c = contribution_vector(s);
        CHECK(c.values[0] == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(c.values[1] == doctest::Approx(0.2).epsilon(1e-12));
    }
}

TEST_CASE("imbalance_rate ratio arithmetic") {
    BalanceConfig c = cfg_with();
    std::map<Modality, ContributionVector> contribs;

    SUBCASE("symmetric contributions give rho near 1") {
        contribs[Modality::Image] = {{0.5, 0.5, 0.5, 0.5}, Modality::Image}; // sums to 2
        contribs[Modality::Text] = {{0.5, 0.5, 0.5, 0.5}, Modality::Text};
        const auto rho = imbalance_rate(contribs, c);
        CHECK(rho.at(Modality::Image) == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(rho.at(Modality::Text) == doctest::Approx(1.0).epsilon(1e-7));
    }
    SUBCASE("3:1 contribution split") {
        contribs[Modality::Image] = {{1.5}, Modality::Image};
        contribs[Modality::Text] = {{0.5}, Modality::Text};
        const auto rho = imbalance_rate(contribs, c);
        CHECK(rho.at(Modality::Image) == doctest::Approx(3.0).epsilon(1e-7));
        CHECK(rho.at(Modality::Text) == doctest::Approx(1.0 / 3.0).epsilon(1e-7));
    }
    SUBCASE("needs two modalities") {
        contribs[Modality::Image] = {{1.0}, Modality::Image};
        CHECK_THROWS_AS(imbalance_rate(contribs, c), InvalidConfig);
    }
}

TEST_CASE("joint mode: product of the two imbalance rates is 1 up to epsilon") {
    RngStream rng(6);
    const BalanceConfig c = cfg_with();
    for (int trial = 0; trial < 20; ++trial) {
        const int b = 4, d = 8;
        const Matrix e = oracle::random_normalized(rng, b, d);
        const Matrix i = oracle::random_normalized(rng, b, d);
        const Matrix t = oracle::random_normalized(rng, b, d);
        const auto sims = sims_for(e, i, t, c);
        std::map<Modality, ContributionVector> contribs;
        for (const auto& [m, s] : sims) {
            contribs.emplace(m, contribution_vector(s));
        }
        const auto rho = imbalance_rate(contribs, c);
        CHECK(rho.at(Modality::Image) * rho.at(Modality::Text) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("per-row-literal mode is provably inert with two targets") {
    // Each row sums to 1 inside every modality, so each contribution totals B
    // and rho collapses to B/(B+eps) for both modalities.
    RngStream rng(7);
    const BalanceConfig c = cfg_with(0.7, SimilarityNorm::PerRowLiteral);
    for (int trial = 0; trial < 20; ++trial) {
        const int b = 3 + static_cast<int>(rng.below(4));
        const Matrix e = oracle::random_normalized(rng, b, 6);
        const Matrix i = oracle::random_normalized(rng, b, 6);
        const Matrix t = oracle::random_normalized(rng, b, 6);
        const auto sims = sims_for(e, i, t, c);
        std::map<Modality, ContributionVector> contribs;
        for (const auto& [m, s] : sims) {
            contribs.emplace(m, contribution_vector(s));
        }
        const auto rho = imbalance_rate(contribs, c);
        const double expected = b / (b + c.epsilon);
        CHECK(std::fabs(rho.at(Modality::Image) - expected) < 1e-9);
        CHECK(std::fabs(rho.at(Modality::Text) - expected) < 1e-9);
        // And the resulting weights are exactly 1: the mechanism is inert.
        CHECK(modality_weight(rho.at(Modality::Image), c) == 1.0);
        CHECK(modality_weight(rho.at(Modality::Text), c) == 1.0);
    }
}

TEST_CASE("modality_weight schedule") {
    const BalanceConfig c = cfg_with(0.7);

    CHECK(modality_weight(1.0, c) == 1.0);
    CHECK(modality_weight(0.5, c) == 1.0);
    CHECK(modality_weight(2.0, c) == doctest::Approx(1.0 - std::tanh(0.7)).epsilon(1e-12));
    CHECK(modality_weight(2.0, c) == doctest::Approx(0.395637).epsilon(1e-5));

    SUBCASE("continuous at rho = 1") {
        CHECK(modality_weight(1.0 + 1e-12, c) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("non-increasing and strictly positive") {
        double prev = 2.0;
        for (double rho = 0.25; rho < 50.0; rho *= 1.3) {
            const double k = modality_weight(rho, c);
            CHECK(k <= prev + 1e-15);
            CHECK(k > 0.0);
            CHECK(k <= 1.0);
            prev = k;
        }
    }
    SUBCASE("rho must be positive") {
        CHECK_THROWS_AS(modality_weight(0.0, c), InvalidConfig);
    }
}

TEST_CASE("modulate_gradients scales by attribution") {
    RngStream rng(10);
    ParamStore store;
    store.add("eeg_encoder", "w", Attribution::Eeg, oracle::random_matrix(rng, 3, 3));
    store.add("image_adapter", "w", Attribution::Image, oracle::random_matrix(rng, 2, 4));
    store.add("text_adapter", "w", Attribution::Text, oracle::random_matrix(rng, 4, 2));
    for (std::size_t i = 0; i < store.count(); ++i) {
        for (double& g : store.entry(i).grad.flat()) {
            g = rng.gauss();
        }
    }

    SUBCASE("all kappa 1 leaves gradients bitwise unchanged") {
        std::vector<Matrix> before;
        for (std::size_t i = 0; i < store.count(); ++i) {
            before.push_back(store.entry(i).grad);
        }
        ModalityWeights w;
        modulate_gradients(store, w);
        for (std::size_t i = 0; i < store.count(); ++i) {
            CHECK(store.entry(i).grad == before[i]);
        }
    }
    SUBCASE("kappa_text = 0.5 exactly halves the text gradients") {
        const Matrix text_before = store.at("text_adapter", "w").grad;
        const Matrix eeg_before = store.at("eeg_encoder", "w").grad;
        ModalityWeights w;
        w.kappa[Modality::Text] = 0.5;
        modulate_gradients(store, w);
        const Matrix& text_after = store.at("text_adapter", "w").grad;
        for (std::size_t k = 0; k < text_after.size(); ++k) {
            CHECK(text_after.flat()[k] == 0.5 * text_before.flat()[k]);
        }
        CHECK(store.at("eeg_encoder", "w").grad == eeg_before);
    }
    SUBCASE("matches an entrywise recomputation for mixed weights") {
        ModalityWeights w;
        w.kappa[Modality::Image] = 0.4;
        w.kappa[Modality::Text] = 0.9;
        std::vector<Matrix> expected;
        for (std::size_t i = 0; i < store.count(); ++i) {
            Matrix g = store.entry(i).grad;
            const Attribution a = store.entry(i).attribution;
            const double k = a == Attribution::Image ? 0.4 : (a == Attribution::Text ? 0.9 : 1.0);
            for (double& v : g.flat()) {
                v *= k;
            }
            expected.push_back(std::move(g));
        }
        modulate_gradients(store, w);
        for (std::size_t i = 0; i < store.count(); ++i) {
            CHECK(max_abs_diff(store.entry(i).grad, expected[i]) == 0.0);
        }
    }
    SUBCASE("scaling commutes with gradient accumulation") {
        // kappa * (g1 + g2) == kappa * g1 + kappa * g2 within double rounding.
        ModalityWeights w;
        w.kappa[Modality::Image] = 0.3;
        ParamStore s1, s2;
        const Matrix g1 = oracle::random_matrix(rng, 3, 3);
        const Matrix g2 = oracle::random_matrix(rng, 3, 3);
        auto& e1 = s1.add("image_adapter", "w", Attribution::Image, Matrix(3, 3));
        auto& e2 = s2.add("image_adapter", "w", Attribution::Image, Matrix(3, 3));
        // accumulate then scale
        e1.grad = g1;
        e1.grad.add_in_place(g2);
        modulate_gradients(s1, w);
        // scale each then accumulate
        e2.grad = g1;
        modulate_gradients(s2, w);
        Matrix g2_scaled = g2;
        g2_scaled.scale_in_place(0.3);
        e2.grad.add_in_place(g2_scaled);
        CHECK(max_abs_diff(e1.grad, e2.grad) < 1e-15);
    }
}

TEST_CASE("compute_balance pins the anchor weight to one") {
    RngStream rng(12);
    const Matrix e = oracle::random_normalized(rng, 4, 8);
    const Matrix i = oracle::random_normalized(rng, 4, 8);
    const Matrix t = oracle::random_normalized(rng, 4, 8);
    const BalanceOutcome out =
        compute_balance(FeatureMatrix{e, Modality::Eeg, true}, i, t, cfg_with());
    CHECK(out.weights.kappa[Modality::Eeg] == 1.0);
    CHECK(out.weights.kappa[Modality::Image] > 0.0);
    CHECK(out.weights.kappa[Modality::Image] <= 1.0);
    CHECK(out.weights.kappa[Modality::Text] > 0.0);
    CHECK(out.weights.kappa[Modality::Text] <= 1.0);
    CHECK(out.rho.at(Modality::Image) > 0.0);
    CHECK(out.rho.at(Modality::Text) > 0.0);
}
