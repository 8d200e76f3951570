#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldscan/hash.hpp"
#include "fieldscan/zonal.hpp"

namespace fieldscan {

enum class Sensor { S1, S2 };

inline const char* sensor_name(Sensor s) { return s == Sensor::S1 ? "S1" : "S2"; }

inline Sensor sensor_of(IndexKind k) { return is_sar_kind(k) ? Sensor::S1 : Sensor::S2; }

/// Identity of one matrix column. Columns are ordered (sensor, date,
/// feature, stat), so a given selection always enumerates identically.
struct FeatureColumnKey {
    Sensor sensor = Sensor::S2;
    Date date;
    IndexKind feature = IndexKind::NDVI;
    StatKind stat = StatKind::MEDIAN;

    auto operator<=>(const FeatureColumnKey&) const = default;

    [[nodiscard]] std::string to_string() const {
        std::string s = sensor_name(sensor);
        s += '|';
        s += date.to_string();
        s += '|';
        s += index_kind_name(feature);
        s += '|';
        s += stat_kind_name(stat);
        return s;
    }

    static FeatureColumnKey parse(const std::string& text) {
        std::stringstream ss(text);
        std::string sensor_s, date_s, feature_s, stat_s;
        if (!std::getline(ss, sensor_s, '|') || !std::getline(ss, date_s, '|') ||
            !std::getline(ss, feature_s, '|') || !std::getline(ss, stat_s)) {
            throw std::runtime_error("malformed column key: " + text);
        }
        FeatureColumnKey key;
        if (sensor_s == "S1") {
            key.sensor = Sensor::S1;
        } else if (sensor_s == "S2") {
            key.sensor = Sensor::S2;
        } else {
            throw std::runtime_error("unknown sensor in column key: " + text);
        }
        key.date = Date::parse(date_s);
        if (!parse_index_kind(feature_s, key.feature)) {
            throw std::runtime_error("unknown feature in column key: " + text);
        }
        if (!parse_stat_kind(stat_s, key.stat)) {
            throw std::runtime_error("unknown stat in column key: " + text);
        }
        return key;
    }
};

/// Column selection: per sensor, which dates, features and statistics enter
/// the matrix. Empty vectors mean "that sensor contributes nothing".
struct MatrixSpec {
    std::vector<Date> s1_dates;
    std::vector<IndexKind> s1_features;
    std::vector<StatKind> s1_stats;
    std::vector<Date> s2_dates;
    std::vector<IndexKind> s2_features;
    std::vector<StatKind> s2_stats;

    /// Enumerates columns in the canonical order. Dates are sorted
    /// chronologically; features/stats follow enum order regardless of how
    /// the selection listed them.
    [[nodiscard]] std::vector<FeatureColumnKey> columns() const {
        auto block = [](Sensor sensor, std::vector<Date> dates, std::vector<IndexKind> features,
                        std::vector<StatKind> stats, std::vector<FeatureColumnKey>& out) {
            std::sort(dates.begin(), dates.end());
            std::sort(features.begin(), features.end());
            std::sort(stats.begin(), stats.end());
            for (const Date& d : dates) {
                for (IndexKind f : features) {
                    if (sensor_of(f) != sensor) {
                        throw std::invalid_argument(std::string(index_kind_name(f)) +
                                                    " selected under the wrong sensor");
                    }
                    for (StatKind s : stats) out.push_back({sensor, d, f, s});
                }
            }
        };
        std::vector<FeatureColumnKey> out;
        block(Sensor::S1, s1_dates, s1_features, s1_stats, out);
        block(Sensor::S2, s2_dates, s2_features, s2_stats, out);
        return out;
    }
};

/// Date carving of a MatrixSpec. `every_kth_s2` keeps the multispectral
/// dates at chronological indices offset, offset+k, ... and all SAR dates;
/// `before` keeps dates strictly earlier than the cutoff on both sensors;
/// `after` keeps dates at or past the cutoff on both sensors.
struct TimeWindow {
    enum class Mode { full_season, before, after, every_kth_s2 };
    Mode mode = Mode::full_season;
    Date cutoff;
    int k = 2;
    int offset = 1;

    static TimeWindow full_season() { return {}; }
    static TimeWindow before(Date d) { return {Mode::before, d, 0, 0}; }
    static TimeWindow after(Date d) { return {Mode::after, d, 0, 0}; }
    static TimeWindow every_kth_s2(int k, int offset) {
        if (k < 1 || offset < 0) throw std::invalid_argument("bad every_kth_s2 window");
        return {Mode::every_kth_s2, Date{}, k, offset};
    }
};

inline MatrixSpec select_time_window(const MatrixSpec& spec, const TimeWindow& window) {
    MatrixSpec out = spec;
    auto keep_if = [](std::vector<Date>& dates, auto pred) {
        std::erase_if(dates, [&](const Date& d) { return !pred(d); });
    };
    switch (window.mode) {
        case TimeWindow::Mode::full_season:
            break;
        case TimeWindow::Mode::before:
            keep_if(out.s1_dates, [&](const Date& d) { return d < window.cutoff; });
            keep_if(out.s2_dates, [&](const Date& d) { return d < window.cutoff; });
            break;
        case TimeWindow::Mode::after:
            keep_if(out.s1_dates, [&](const Date& d) { return d >= window.cutoff; });
            keep_if(out.s2_dates, [&](const Date& d) { return d >= window.cutoff; });
            break;
        case TimeWindow::Mode::every_kth_s2: {
            std::vector<Date> sorted = out.s2_dates;
            std::sort(sorted.begin(), sorted.end());
            std::vector<Date> kept;
            for (std::size_t i = window.offset; i < sorted.size();
                 i += static_cast<std::size_t>(window.k)) {
                kept.push_back(sorted[i]);
            }
            out.s2_dates = std::move(kept);
            break;
        }
    }
    return out;
}

enum class Normalization { raw, minmax };

/// Dense parcels-by-columns matrix handed to the detectors. After
/// normalization the per-column raw min/max are retained for traceability.
struct FeatureMatrix {
    std::vector<std::string> row_ids;
    std::vector<FeatureColumnKey> columns;
    std::vector<double> values;  // row-major
    Normalization normalization = Normalization::raw;
    std::vector<double> col_min;  // filled by normalize_minmax
    std::vector<double> col_max;

    [[nodiscard]] std::size_t rows() const { return row_ids.size(); }
    [[nodiscard]] std::size_t cols() const { return columns.size(); }

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }

    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return {values.data() + r * cols(), cols()};
    }

    /// Content hash over ids, column keys and value bytes.
    [[nodiscard]] std::string fingerprint() const {
        Fnv1a h;
        h.update_pod(rows());
        h.update_pod(cols());
        for (const auto& id : row_ids) h.update(id);
        for (const auto& c : columns) h.update(c.to_string());
        h.update(values.data(), values.size() * sizeof(double));
        return h.hex();
    }
};

struct AssemblyResult {
    FeatureMatrix matrix;
    // parcels excluded because at least one selected cell had no value
    std::vector<std::pair<std::string, std::size_t>> dropped;
};

/// Builds the matrix from per-parcel series. Row order follows the input
/// order; parcels that cannot fill every selected column are dropped and
/// reported with their missing-cell count.
inline AssemblyResult assemble_feature_matrix(const std::vector<ParcelTimeSeries>& series,
                                              const MatrixSpec& spec) {
    AssemblyResult result;
    result.matrix.columns = spec.columns();
    const auto& columns = result.matrix.columns;
    if (columns.empty()) throw std::invalid_argument("matrix selection yields zero columns");

    std::vector<double> row(columns.size());
    for (const auto& ts : series) {
        std::size_t missing = 0;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto v = ts.value({columns[c].date, columns[c].feature, columns[c].stat});
            if (v.has_value()) {
                row[c] = *v;
            } else {
                ++missing;
            }
        }
        if (missing > 0) {
            result.dropped.push_back({ts.parcel_id, missing});
            continue;
        }
        result.matrix.row_ids.push_back(ts.parcel_id);
        result.matrix.values.insert(result.matrix.values.end(), row.begin(), row.end());
    }
    if (result.matrix.rows() == 0) {
        throw std::runtime_error("all parcels were dropped during matrix assembly");
    }
    return result;
}

/// Per-column min-max scaling to [0,1]; constant columns map to 0.
inline FeatureMatrix normalize_minmax(const FeatureMatrix& in) {
    if (in.normalization != Normalization::raw) {
        throw std::invalid_argument("matrix is already normalized");
    }
    FeatureMatrix out = in;
    out.normalization = Normalization::minmax;
    const std::size_t n_rows = in.rows(), n_cols = in.cols();
    out.col_min.resize(n_cols);
    out.col_max.resize(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
        double lo = in.at(0, c), hi = in.at(0, c);
        for (std::size_t r = 1; r < n_rows; ++r) {
            lo = std::min(lo, in.at(r, c));
            hi = std::max(hi, in.at(r, c));
        }
        out.col_min[c] = lo;
        out.col_max[c] = hi;
        const double span = hi - lo;
        for (std::size_t r = 0; r < n_rows; ++r) {
            out.at(r, c) = span > 0.0 ? (in.at(r, c) - lo) / span : 0.0;
        }
    }
    return out;
}

// --- CSV ------------------------------------------------------------------

inline void save_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                            const std::string& comment = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "parcel_id";
    for (const auto& c : m.columns) out << ',' << c.to_string();
    out << "\n";
    char buf[64];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << m.row_ids[r];
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", m.at(r, c));
            out << ',' << buf;
        }
        out << "\n";
    }
}

inline FeatureMatrix load_matrix_csv(const std::filesystem::path& path,
                                     Normalization assumed = Normalization::minmax) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    FeatureMatrix m;
    m.normalization = assumed;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        if (!header_seen) {
            header_seen = true;
            std::getline(ss, cell, ',');  // "parcel_id"
            while (std::getline(ss, cell, ',')) m.columns.push_back(FeatureColumnKey::parse(cell));
            continue;
        }
        std::getline(ss, cell, ',');
        m.row_ids.push_back(cell);
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            m.values.push_back(std::stod(cell));
            ++c;
        }
        if (c != m.columns.size()) {
            throw std::runtime_error("row width mismatch in " + path.string());
        }
    }
    if (!header_seen) throw std::runtime_error("empty matrix file " + path.string());
    return m;
}

}  // namespace fieldscan
