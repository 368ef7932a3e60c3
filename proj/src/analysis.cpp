#include "triad/analysis.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "triad/errors.hpp"

namespace triad {

int MetricsTable::col(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    throw MalformedCsv("metrics csv is missing column '" + name + "'");
}

MetricsTable read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw MalformedCsv("cannot open metrics csv: " + path);

    MetricsTable table;
    std::string line;
    if (!std::getline(is, line)) {
        throw MalformedCsv("metrics csv is empty: " + path);
    }
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) {
            table.columns.push_back(cell);
        }
    }
    if (table.columns.empty()) {
        throw MalformedCsv("metrics csv has an empty header: " + path);
    }

    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(table.columns.size());
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const char* begin = cell.c_str();
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin || end != begin + cell.size()) {
                throw MalformedCsv("bad number '" + cell + "' at line " +
                                   std::to_string(line_no) + " of " + path);
            }
            row.push_back(v);
        }
        if (row.size() != table.columns.size()) {
            throw MalformedCsv("row at line " + std::to_string(line_no) + " has " +
                               std::to_string(row.size()) + " cells, header has " +
                               std::to_string(table.columns.size()));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

double nan_skipping_mean(const std::vector<double>& v) {
    double acc = 0.0;
    int n = 0;
    for (double x : v) {
        if (std::isnan(x)) continue;
        acc += x;
        ++n;
    }
    return n > 0 ? acc / n : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

TrajectorySummary summarize(const MetricsTable& table) {
    const int c_epoch = table.col("epoch");
    const int c_pre_eeg = table.col("grad_pre_eeg");
    const int c_pre_img = table.col("grad_pre_image");
    const int c_pre_txt = table.col("grad_pre_text");
    const int c_post_eeg = table.col("grad_post_eeg");
    const int c_post_img = table.col("grad_post_image");
    const int c_post_txt = table.col("grad_post_text");
    const int c_rho_img = table.col("rho_image");
    const int c_rho_txt = table.col("rho_text");

    TrajectorySummary s;
    s.num_steps = static_cast<int>(table.rows.size());

    std::map<int, std::array<double, 4>> per_epoch; // eeg, image, text, count
    std::vector<double> pre_eeg, pre_img, pre_txt, post_eeg, post_img, post_txt;
    for (const auto& row : table.rows) {
        const double e = row[static_cast<std::size_t>(c_pre_eeg)];
        const double i = row[static_cast<std::size_t>(c_pre_img)];
        const double t = row[static_cast<std::size_t>(c_pre_txt)];
        pre_eeg.push_back(e);
        pre_img.push_back(i);
        pre_txt.push_back(t);
        post_eeg.push_back(row[static_cast<std::size_t>(c_post_eeg)]);
        post_img.push_back(row[static_cast<std::size_t>(c_post_img)]);
        post_txt.push_back(row[static_cast<std::size_t>(c_post_txt)]);

        auto& acc = per_epoch[static_cast<int>(row[static_cast<std::size_t>(c_epoch)])];
        acc[0] += e;
        acc[1] += i;
        acc[2] += t;
        acc[3] += 1.0;

        s.imbalance_image.push_back(std::fabs(row[static_cast<std::size_t>(c_rho_img)] - 1.0));
        s.imbalance_text.push_back(std::fabs(row[static_cast<std::size_t>(c_rho_txt)] - 1.0));

        const double mx = std::max({e, i, t});
        const double mn = std::min({e, i, t});
        s.dominance.push_back(mn > 0.0 ? mx / mn
                                       : std::numeric_limits<double>::infinity());
    }

    s.num_epochs = static_cast<int>(per_epoch.size());
    for (const auto& [epoch, acc] : per_epoch) {
        (void)epoch;
        s.epoch_mean_grad_pre[Modality::Eeg].push_back(acc[0] / acc[3]);
        s.epoch_mean_grad_pre[Modality::Image].push_back(acc[1] / acc[3]);
        s.epoch_mean_grad_pre[Modality::Text].push_back(acc[2] / acc[3]);
    }

    s.mean_grad_pre[Modality::Eeg] = nan_skipping_mean(pre_eeg);
    s.mean_grad_pre[Modality::Image] = nan_skipping_mean(pre_img);
    s.mean_grad_pre[Modality::Text] = nan_skipping_mean(pre_txt);
    s.mean_grad_post[Modality::Eeg] = nan_skipping_mean(post_eeg);
    s.mean_grad_post[Modality::Image] = nan_skipping_mean(post_img);
    s.mean_grad_post[Modality::Text] = nan_skipping_mean(post_txt);
    s.mean_abs_imbalance_image = nan_skipping_mean(s.imbalance_image);
    s.mean_abs_imbalance_text = nan_skipping_mean(s.imbalance_text);
    s.mean_dominance = nan_skipping_mean(s.dominance);
    return s;
}

TrajectorySummary summarize_csv(const std::string& path) {
    return summarize(read_metrics_csv(path));
}

TrajectorySummary aggregate_summaries(const std::vector<TrajectorySummary>& runs) {
    if (runs.empty()) {
        throw LengthMismatch("aggregate_summaries: no runs");
    }
    const TrajectorySummary& first = runs.front();
    for (const TrajectorySummary& r : runs) {
        if (r.num_steps != first.num_steps || r.num_epochs != first.num_epochs) {
            throw LengthMismatch("aggregate_summaries: runs have different step/epoch counts");
        }
    }
    const double n = static_cast<double>(runs.size());

    TrajectorySummary out = first;
    auto mean_series = [&](auto getter) {
        auto series = getter(first);
        for (std::size_t r = 1; r < runs.size(); ++r) {
            const auto& other = getter(runs[r]);
            for (std::size_t i = 0; i < series.size(); ++i) {
                series[i] += other[i];
            }
        }
        for (double& v : series) v /= n;
        return series;
    };

    for (Modality m : kAllModalities) {
        out.epoch_mean_grad_pre[m] = mean_series(
            [m](const TrajectorySummary& s) { return s.epoch_mean_grad_pre[m]; });
        out.mean_grad_pre[m] = 0.0;
        out.mean_grad_post[m] = 0.0;
        for (const TrajectorySummary& r : runs) {
            out.mean_grad_pre[m] += r.mean_grad_pre[m] / n;
            out.mean_grad_post[m] += r.mean_grad_post[m] / n;
        }
    }
    out.imbalance_image =
        mean_series([](const TrajectorySummary& s) { return s.imbalance_image; });
    out.imbalance_text = mean_series([](const TrajectorySummary& s) { return s.imbalance_text; });
    out.dominance = mean_series([](const TrajectorySummary& s) { return s.dominance; });
    out.mean_abs_imbalance_image = 0.0;
    out.mean_abs_imbalance_text = 0.0;
    out.mean_dominance = 0.0;
    for (const TrajectorySummary& r : runs) {
        out.mean_abs_imbalance_image += r.mean_abs_imbalance_image / n;
        out.mean_abs_imbalance_text += r.mean_abs_imbalance_text / n;
        out.mean_dominance += r.mean_dominance / n;
    }
    return out;
}

RunComparison compare_runs(const TrajectorySummary& a, const TrajectorySummary& b) {
    if (a.num_steps != b.num_steps) {
        throw LengthMismatch("compare_runs: step counts differ (" + std::to_string(a.num_steps) +
                             " vs " + std::to_string(b.num_steps) + ")");
    }
    RunComparison c;
    for (Modality m : kAllModalities) {
        c.delta_mean_grad_pre[m] = b.mean_grad_pre[m] - a.mean_grad_pre[m];
        c.delta_mean_grad_post[m] = b.mean_grad_post[m] - a.mean_grad_post[m];
    }
    c.delta_mean_abs_imbalance_image = b.mean_abs_imbalance_image - a.mean_abs_imbalance_image;
    c.delta_mean_abs_imbalance_text = b.mean_abs_imbalance_text - a.mean_abs_imbalance_text;
    c.delta_mean_dominance = b.mean_dominance - a.mean_dominance;
    if (b.mean_abs_imbalance_image < a.mean_abs_imbalance_image) {
        c.imbalance_decreased.push_back("image");
    }
    if (b.mean_abs_imbalance_text < a.mean_abs_imbalance_text) {
        c.imbalance_decreased.push_back("text");
    }
    return c;
}

void write_summary_json(const TrajectorySummary& s, const std::string& path) {
    nlohmann::json doc;
    doc["num_steps"] = s.num_steps;
    doc["num_epochs"] = s.num_epochs;
    for (Modality m : kAllModalities) {
        doc["epoch_mean_grad_pre"][to_string(m)] = s.epoch_mean_grad_pre[m];
        doc["mean_grad_pre"][to_string(m)] = s.mean_grad_pre[m];
        doc["mean_grad_post"][to_string(m)] = s.mean_grad_post[m];
    }
    doc["mean_abs_imbalance"] = {{"image", s.mean_abs_imbalance_image},
                                 {"text", s.mean_abs_imbalance_text}};
    doc["mean_dominance"] = s.mean_dominance;

    std::ofstream os(path);
    if (!os) throw IoError("cannot write analysis summary: " + path);
    os << doc.dump(2) << "\n";
}

void write_comparison_json(const RunComparison& c, const std::string& path) {
    nlohmann::json doc;
    for (Modality m : kAllModalities) {
        doc["delta_mean_grad_pre"][to_string(m)] = c.delta_mean_grad_pre[m];
        doc["delta_mean_grad_post"][to_string(m)] = c.delta_mean_grad_post[m];
    }
    doc["delta_mean_abs_imbalance"] = {{"image", c.delta_mean_abs_imbalance_image},
                                       {"text", c.delta_mean_abs_imbalance_text}};
    doc["delta_mean_dominance"] = c.delta_mean_dominance;
    doc["imbalance_decreased"] = c.imbalance_decreased;

    std::ofstream os(path);
    if (!os) throw IoError("cannot write comparison: " + path);
    os << doc.dump(2) << "\n";
}

} // namespace triad
