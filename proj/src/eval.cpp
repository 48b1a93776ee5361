#include "wiom/eval.hpp"

#include "wiom/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wiom {

namespace fs = std::filesystem;

double horizontal_error(const Pose& pred, const Pose& truth) {
    return std::hypot(pred.x_e - truth.x_e, pred.x_n - truth.x_n);
}

double heading_error(double pred_deg, double truth_deg) {
    double d = std::fmod(std::abs(pred_deg - truth_deg), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

double heading_error(const Pose& pred, const Pose& truth) {
    return heading_error(pred.gamma, truth.gamma);
}

double percentile(std::vector<double> values, double level) {
    if (values.empty()) throw ConfigError("percentile of an empty list");
    if (!(level > 0.0) || !(level <= 100.0))
        throw ConfigError("percentile level must be in (0, 100]");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(level / 100.0 * n));
    rank = std::min(std::max<std::size_t>(rank, 1), values.size());
    return values[rank - 1];
}

void ErrorReport::compute_percentiles() {
    percentiles.clear();
    for (int level : {68, 95, 99}) {
        percentiles[level] = {percentile(position_errors, level),
                              percentile(heading_errors, level)};
    }
}

ErrorReport evaluate(const Model& model, const Dataset& ds, const SplitAssignment& split,
                     const std::string& source_name) {
    if (split.test_indices.empty()) throw ConfigError("evaluate needs a non-empty test set");
    ErrorReport report;
    report.source = source_name;
    report.split_kind = split_kind_name(split.kind);
    report.seed = split.seed;
    report.position_errors.reserve(split.test_indices.size());
    report.heading_errors.reserve(split.test_indices.size());
    for (std::size_t idx : split.test_indices) {
        const Pose pred = predict_record(model, ds, idx);
        report.position_errors.push_back(horizontal_error(pred, ds.poses[idx]));
        report.heading_errors.push_back(heading_error(pred, ds.poses[idx]));
    }
    report.compute_percentiles();
    return report;
}

ErrorReport knn_baseline(const Dataset& ds, const SplitAssignment& split, int k,
                         const std::vector<std::string>& bs_selection) {
    if (ds.storage != DatasetStorage::Wiometric)
        throw ConfigError("knn baseline needs a wiometric dataset");
    if (split.test_indices.empty()) throw ConfigError("knn baseline needs a non-empty test set");
    const std::size_t n_train = split.train_indices.size();
    if (k < 1 || static_cast<std::size_t>(k) > n_train)
        throw ConfigError("k must satisfy 1 <= k <= training-set size");

    std::vector<std::string> bs_ids = bs_selection.empty() ? ds.bs_ids : bs_selection;
    std::vector<std::size_t> slots;
    for (const std::string& id : bs_ids) slots.push_back(ds.bs_slot(id));
    std::vector<NormStats> norm;
    norm.reserve(slots.size());
    for (std::size_t s : slots) norm.push_back(fit_normalizer(ds, split.train_indices, s));

    const std::size_t dim = ds.record_size() * slots.size();
    auto feature = [&](std::size_t rec) {
        std::vector<double> v;
        v.reserve(dim);
        for (std::size_t ci = 0; ci < slots.size(); ++ci) {
            std::vector<double> one = normalized_record(ds, norm[ci], slots[ci], rec);
            v.insert(v.end(), one.begin(), one.end());
        }
        return v;
    };

    std::vector<std::vector<double>> train_feats;
    train_feats.reserve(n_train);
    for (std::size_t idx : split.train_indices) train_feats.push_back(feature(idx));

    ErrorReport report;
    report.source = "knn";
    report.split_kind = split_kind_name(split.kind);
    report.seed = split.seed;

    std::vector<std::pair<double, std::size_t>> dists(n_train);
    for (std::size_t t : split.test_indices) {
        const std::vector<double> q = feature(t);
        for (std::size_t i = 0; i < n_train; ++i) {
            const std::vector<double>& f = train_feats[i];
            double acc = 0.0;
            for (std::size_t e = 0; e < dim; ++e) {
                const double d = q[e] - f[e];
                acc += d * d;
            }
            dists[i] = {acc, split.train_indices[i]};
        }
        std::partial_sort(dists.begin(), dists.begin() + k, dists.end());

        double xe = 0.0, xn = 0.0, s = 0.0, c = 0.0;
        for (int j = 0; j < k; ++j) {
            const Pose& p = ds.poses[dists[static_cast<std::size_t>(j)].second];
            xe += p.x_e;
            xn += p.x_n;
            s += std::sin(p.gamma * kRadPerDeg);
            c += std::cos(p.gamma * kRadPerDeg);
        }
        const double inv_k = 1.0 / static_cast<double>(k);
        const Pose pred(xe * inv_k, xn * inv_k, std::atan2(s, c) * kDegPerRad);
        report.position_errors.push_back(horizontal_error(pred, ds.poses[t]));
        report.heading_errors.push_back(heading_error(pred, ds.poses[t]));
    }
    report.compute_percentiles();
    return report;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_cdf(const fs::path& file, std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw IoError("cannot write " + file.string());
    os << "error,cumulative_fraction\n";
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        os << fmt(values[i]) << "," << fmt(static_cast<double>(i + 1) / n) << "\n";
}

std::string summary_line(const ErrorReport& r) {
    std::ostringstream os;
    os << r.source << "," << r.split_kind;
    for (int level : {68, 95, 99}) os << "," << fmt(r.percentiles.at(level).first);
    for (int level : {68, 95, 99}) os << "," << fmt(r.percentiles.at(level).second);
    return os.str();
}

constexpr const char* kSummaryHeader =
    "network,split,p68_position_m,p95_position_m,p99_position_m,"
    "p68_heading_deg,p95_heading_deg,p99_heading_deg";

} // namespace

void write_report(const ErrorReport& report, const fs::path& dir) {
    fs::create_directories(dir);

    std::ofstream per(dir / "per_sample.csv", std::ios::trunc);
    if (!per) throw IoError("cannot write report in " + dir.string());
    per << "index,position_error_m,heading_error_deg\n";
    for (std::size_t i = 0; i < report.position_errors.size(); ++i)
        per << i << "," << fmt(report.position_errors[i]) << ","
            << fmt(report.heading_errors[i]) << "\n";

    write_cdf(dir / "cdf_position.csv", report.position_errors);
    write_cdf(dir / "cdf_heading.csv", report.heading_errors);

    std::ofstream sum(dir / "summary.csv", std::ios::trunc);
    sum << kSummaryHeader << "\n" << summary_line(report) << "\n";
}

void write_combined_summary(const std::vector<fs::path>& report_dirs, const fs::path& out_file) {
    std::ofstream os(out_file, std::ios::trunc);
    if (!os) throw IoError("cannot write " + out_file.string());
    os << kSummaryHeader << "\n";
    for (const fs::path& dir : report_dirs) {
        std::ifstream is(dir / "summary.csv");
        if (!is) throw IoError("missing summary.csv in " + dir.string());
        std::string header, line;
        if (!std::getline(is, header) || header != kSummaryHeader)
            throw IoError("unrecognized summary format in " + dir.string());
        while (std::getline(is, line))
            if (!line.empty()) os << line << "\n";
    }
}

} // namespace wiom
