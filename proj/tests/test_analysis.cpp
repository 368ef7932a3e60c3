#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "triad/analysis.hpp"
#include "triad/errors.hpp"
#include "triad/trainer.hpp"

using namespace triad;

namespace {

const char* kHeader =
    "epoch,step,global_step,loss_total,ce_eeg_img,ce_img_eeg,ce_eeg_text,ce_text_eeg,"
    "cos_img_text,adapter_consistency,grad_pre_eeg,grad_pre_image,grad_pre_text,"
    "grad_post_eeg,grad_post_image,grad_post_text,rho_image,rho_text,kappa_eeg,"
    "kappa_image,kappa_text,sigma";

struct Row {
    int epoch = 0;
    double pre_eeg = 1.0, pre_img = 1.0, pre_txt = 1.0;
    double post_eeg = 1.0, post_img = 1.0, post_txt = 1.0;
    double rho_img = 1.0, rho_txt = 1.0;
};

std::string csv_from(const std::vector<Row>& rows) {
    std::string out = std::string(kHeader) + "\n";
    int step = 0;
    for (const Row& r : rows) {
        out += std::to_string(r.epoch) + "," + std::to_string(step) + "," +
               std::to_string(step) + ",0.5,0.1,0.1,0.1,0.1,0.1,0,";
        out += std::to_string(r.pre_eeg) + "," + std::to_string(r.pre_img) + "," +
               std::to_string(r.pre_txt) + ",";
        out += std::to_string(r.post_eeg) + "," + std::to_string(r.post_img) + "," +
               std::to_string(r.post_txt) + ",";
        out += std::to_string(r.rho_img) + "," + std::to_string(r.rho_txt) + ",1,1,1,0\n";
        ++step;
    }
    return out;
}

std::string write_temp(const std::string& content, const std::string& name) {
    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream os(p);
    os << content;
    return p.string();
}

} // namespace

TEST_CASE("summarize on constant equal norms gives dominance one everywhere") {
    const std::string path = write_temp(csv_from({Row{}, Row{}, Row{}}), "triad_an_const.csv");
    const TrajectorySummary s = summarize_csv(path);
    CHECK(s.num_steps == 3);
    for (double d : s.dominance) {
        CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(s.mean_dominance == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dominance ratio is max over min of the pre-modulation norms") {
    Row r;
    r.pre_txt = 2.0; // text norm 2, others 1
    const std::string path = write_temp(csv_from({r}), "triad_an_dom.csv");
    const TrajectorySummary s = summarize_csv(path);
    CHECK(s.dominance[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.dominance[0] >= 1.0);
}

TEST_CASE("dominance is at least one on arbitrary rows") {
    std::vector<Row> rows;
    for (int i = 0; i < 10; ++i) {
        Row r;
        r.pre_eeg = 0.5 + 0.3 * i;
        r.pre_img = 2.0 - 0.1 * i;
        r.pre_txt = 1.0 + 0.05 * i * i;
        rows.push_back(r);
    }
    const std::string path = write_temp(csv_from(rows), "triad_an_ge1.csv");
    const TrajectorySummary s = summarize_csv(path);
    for (double d : s.dominance) {
        CHECK(d >= 1.0);
    }
}

TEST_CASE("per-epoch means aggregate the pre-modulation norms") {
    std::vector<Row> rows;
    Row a;
    a.epoch = 0;
    a.pre_img = 1.0;
    rows.push_back(a);
    a.pre_img = 3.0;
    rows.push_back(a);
    Row b;
    b.epoch = 1;
    b.pre_img = 5.0;
    rows.push_back(b);
    const std::string path = write_temp(csv_from(rows), "triad_an_epoch.csv");
    const TrajectorySummary s = summarize_csv(path);
    CHECK(s.num_epochs == 2);
    CHECK(s.epoch_mean_grad_pre[Modality::Image][0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.epoch_mean_grad_pre[Modality::Image][1] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("summarize is a pure function of the csv contents") {
    const std::string path = write_temp(csv_from({Row{}, Row{}}), "triad_an_pure.csv");
    const TrajectorySummary a = summarize_csv(path);
    const TrajectorySummary b = summarize_csv(path);
    CHECK(a.mean_dominance == b.mean_dominance);
    CHECK(a.imbalance_text == b.imbalance_text);
    CHECK(a.mean_grad_pre[Modality::Text] == b.mean_grad_pre[Modality::Text]);
}

TEST_CASE("identical runs compare with all-zero deltas") {
    const std::string path = write_temp(csv_from({Row{}, Row{}}), "triad_an_same.csv");
    const TrajectorySummary a = summarize_csv(path);
    const RunComparison c = compare_runs(a, a);
    for (Modality m : kAllModalities) {
        CHECK(c.delta_mean_grad_pre[m] == 0.0);
        CHECK(c.delta_mean_grad_post[m] == 0.0);
    }
    CHECK(c.delta_mean_abs_imbalance_text == 0.0);
    CHECK(c.imbalance_decreased.empty());
}

TEST_CASE("halved text kappa shows up as a halved post-modulation mean") {
    std::vector<Row> rows_a, rows_b;
    for (int i = 0; i < 5; ++i) {
        Row r;
        r.post_txt = 2.0;
        rows_a.push_back(r);
        r.post_txt = 1.0; // kappa halved throughout
        rows_b.push_back(r);
    }
    const TrajectorySummary a = summarize_csv(write_temp(csv_from(rows_a), "triad_an_ka.csv"));
    const TrajectorySummary b = summarize_csv(write_temp(csv_from(rows_b), "triad_an_kb.csv"));
    CHECK(b.mean_grad_post[Modality::Text] ==
          doctest::Approx(0.5 * a.mean_grad_post[Modality::Text]).epsilon(1e-12));
    const RunComparison c = compare_runs(a, b);
    CHECK(c.delta_mean_grad_post[Modality::Text] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("a run with smaller text imbalance is marked as decreased") {
    std::vector<Row> unmod, mod;
    for (int i = 0; i < 6; ++i) {
        Row r;
        r.rho_txt = 1.8; // text dominates without modulation
        r.rho_img = 1.0 / 1.8;
        unmod.push_back(r);
        r.rho_txt = 1.2;
        r.rho_img = 1.0 / 1.2;
        mod.push_back(r);
    }
    const TrajectorySummary a = summarize_csv(write_temp(csv_from(unmod), "triad_an_u.csv"));
    const TrajectorySummary b = summarize_csv(write_temp(csv_from(mod), "triad_an_m.csv"));
    const RunComparison c = compare_runs(a, b);
    CHECK(c.delta_mean_abs_imbalance_text < 0.0);
    bool text_marked = false;
    for (const std::string& m : c.imbalance_decreased) {
        text_marked |= (m == "text");
    }
    CHECK(text_marked);
}

TEST_CASE("step-count mismatches are rejected") {
    const TrajectorySummary a = summarize_csv(write_temp(csv_from({Row{}}), "triad_an_l1.csv"));
    const TrajectorySummary b =
        summarize_csv(write_temp(csv_from({Row{}, Row{}}), "triad_an_l2.csv"));
    CHECK_THROWS_AS(compare_runs(a, b), LengthMismatch);
}

TEST_CASE("malformed csv inputs are rejected with context") {
    CHECK_THROWS_AS(summarize_csv("/nonexistent/metrics.csv"), MalformedCsv);

    const std::string missing_col =
        write_temp("epoch,step\n0,0\n", "triad_an_missing.csv");
    CHECK_THROWS_AS(summarize_csv(missing_col), MalformedCsv);

    std::string bad_number = std::string(kHeader) + "\n0,0,0,x";
    for (int i = 0; i < 18; ++i) bad_number += ",0";
    bad_number += "\n";
    CHECK_THROWS_AS(summarize_csv(write_temp(bad_number, "triad_an_bad.csv")), MalformedCsv);

    const std::string ragged = std::string(kHeader) + "\n0,0,0\n";
    CHECK_THROWS_AS(summarize_csv(write_temp(ragged, "triad_an_ragged.csv")), MalformedCsv);

    CHECK_THROWS_AS(summarize_csv(write_temp("", "triad_an_empty.csv")), MalformedCsv);
}

TEST_CASE("nan imbalance rows are skipped in the means") {
    std::string csv = std::string(kHeader) + "\n";
    // One row with text off (nan rho columns), one with rho_text = 1.5.
    csv += "0,0,0,0.5,0.1,0.1,0,0,0,0,1,1,0,1,1,0,nan,nan,1,1,1,0\n";
    csv += "0,1,1,0.5,0.1,0.1,0.1,0.1,0.1,0,1,1,1,1,1,1,0.8,1.5,1,1,1,0\n";
    const TrajectorySummary s = summarize_csv(write_temp(csv, "triad_an_nan.csv"));
    CHECK(s.mean_abs_imbalance_text == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::isnan(s.imbalance_text[0]));
}

TEST_CASE("aggregate_summaries means step-aligned runs") {
    std::vector<Row> rows_a, rows_b;
    for (int i = 0; i < 4; ++i) {
        Row r;
        r.pre_txt = 1.0;
        r.rho_txt = 1.2;
        rows_a.push_back(r);
        r.pre_txt = 3.0;
        r.rho_txt = 1.6;
        rows_b.push_back(r);
    }
    const TrajectorySummary a = summarize_csv(write_temp(csv_from(rows_a), "triad_an_ag1.csv"));
    const TrajectorySummary b = summarize_csv(write_temp(csv_from(rows_b), "triad_an_ag2.csv"));
    const TrajectorySummary avg = aggregate_summaries({a, b});
    CHECK(avg.num_steps == 4);
    CHECK(avg.mean_grad_pre[Modality::Text] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(avg.imbalance_text[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(avg.mean_abs_imbalance_text == doctest::Approx(0.4).epsilon(1e-12));

    // Seeds-as-subjects averaging needs aligned runs.
    const TrajectorySummary shorter =
        summarize_csv(write_temp(csv_from({Row{}}), "triad_an_ag3.csv"));
    CHECK_THROWS_AS(aggregate_summaries({a, shorter}), LengthMismatch);
    CHECK_THROWS_AS(aggregate_summaries({}), LengthMismatch);
}

TEST_CASE("summary and comparison serialize to json") {
    namespace fs = std::filesystem;
    const TrajectorySummary s =
        summarize_csv(write_temp(csv_from({Row{}, Row{}}), "triad_an_ser.csv"));
    const fs::path dir = fs::temp_directory_path();
    const std::string sp = (dir / "triad_an_summary.json").string();
    write_summary_json(s, sp);
    CHECK(fs::exists(sp));
    const RunComparison c = compare_runs(s, s);
    const std::string cp = (dir / "triad_an_cmp.json").string();
    write_comparison_json(c, cp);
    CHECK(fs::exists(cp));
}
