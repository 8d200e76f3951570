#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldscan/indices.hpp"
#include "fieldscan/parcel.hpp"
#include "fieldscan/stats.hpp"

namespace fieldscan {

struct SeriesKey {
    Date date;
    IndexKind kind = IndexKind::NDVI;
    StatKind stat = StatKind::MEDIAN;
    auto operator<=>(const SeriesKey&) const = default;
};

struct SeriesEntry {
    double value = 0.0;
    std::size_t used_pixels = 0;
};

/// All per-date statistics of one parcel. Absent keys are missing data
/// (cloud gaps, pixel counts below threshold), not zeros.
struct ParcelTimeSeries {
    std::string parcel_id;
    std::string crop_type;
    std::map<SeriesKey, SeriesEntry> entries;

    [[nodiscard]] std::optional<double> value(const SeriesKey& k) const {
        auto it = entries.find(k);
        if (it == entries.end()) return std::nullopt;
        return it->second.value;
    }
};

/// Statistics of one feature over one parcel at the feature's date, using
/// only clear, non-nodata pixels. Entries are omitted (and flagged) when
/// fewer than `min_pixels` samples remain.
struct DateSummary {
    std::vector<std::pair<SeriesKey, SeriesEntry>> entries;
    std::size_t used_pixels = 0;
    bool below_min = false;
};

inline DateSummary summarize_parcel_date(const PixelSet& pixels, const FeatureGrid& feature,
                                         std::span<const StatKind> stats,
                                         std::size_t min_pixels = 3) {
    if (!aligned(pixels.meta, feature.meta)) {
        throw std::invalid_argument("feature grid not aligned with parcel pixels");
    }
    const auto& flags = pixels.flags_at(feature.date);
    std::vector<double> samples;
    samples.reserve(pixels.pixels.size());
    for (std::size_t i = 0; i < pixels.pixels.size(); ++i) {
        if (!flags[i]) continue;
        const float v = feature.at(pixels.pixels[i].row, pixels.pixels[i].col);
        if (feature.is_nodata(v)) continue;
        samples.push_back(static_cast<double>(v));
    }

    DateSummary out;
    out.used_pixels = samples.size();
    if (samples.size() < min_pixels) {
        out.below_min = true;
        return out;
    }
    for (StatKind s : stats) {
        const auto value = zonal_statistic(samples, s);
        if (!value.has_value()) continue;  // zero variance: skew/kurt undefined
        out.entries.push_back({SeriesKey{feature.date, feature.kind, s},
                               SeriesEntry{*value, samples.size()}});
    }
    return out;
}

// --- parcel-level filtering --------------------------------------------

enum class FilterReason { kept, too_small_area, fully_clouded, outside_grid };

inline const char* filter_reason_name(FilterReason r) {
    switch (r) {
        case FilterReason::kept: return "kept";
        case FilterReason::too_small_area: return "too_small_area";
        case FilterReason::fully_clouded: return "fully_clouded";
        case FilterReason::outside_grid: return "outside_grid";
    }
    return "?";
}

struct FilterDecision {
    FilterReason reason = FilterReason::kept;
    std::optional<Date> date;  // first fully clouded date, when relevant

    [[nodiscard]] bool kept() const { return reason == FilterReason::kept; }
};

/// reason per parcel id; every input parcel appears exactly once.
using FilterReport = std::map<std::string, FilterDecision>;

/// Discards parcels whose post-buffer footprint is under `min_area_ha`, or
/// that have zero clear pixels at any of the (multispectral) dates. Parcels
/// whose id is missing from `pixel_sets` are reported as outside the grid.
inline FilterReport filter_parcels(const std::vector<std::string>& parcel_ids,
                                   const std::map<std::string, PixelSet>& pixel_sets,
                                   const std::vector<Date>& s2_dates,
                                   double min_area_ha = 0.5) {
    FilterReport report;
    for (const auto& id : parcel_ids) {
        auto it = pixel_sets.find(id);
        if (it == pixel_sets.end()) {
            report[id] = {FilterReason::outside_grid, std::nullopt};
            continue;
        }
        const PixelSet& ps = it->second;
        if (ps.survivor_area_m2() < min_area_ha * 10000.0) {
            report[id] = {FilterReason::too_small_area, std::nullopt};
            continue;
        }
        FilterDecision decision;
        for (const Date& d : s2_dates) {
            if (ps.clear_count(d) == 0) {
                decision = {FilterReason::fully_clouded, d};
                break;
            }
        }
        report[id] = decision;
    }
    return report;
}

// --- long-format CSV ------------------------------------------------------

inline void save_series_csv(const std::filesystem::path& path,
                            const std::vector<ParcelTimeSeries>& series,
                            const std::string& comment = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "parcel_id,date,feature,stat,value,clear_pixels\n";
    char buf[64];
    for (const auto& ts : series) {
        for (const auto& [key, entry] : ts.entries) {
            std::snprintf(buf, sizeof(buf), "%.17g", entry.value);
            out << ts.parcel_id << ',' << key.date.to_string() << ','
                << index_kind_name(key.kind) << ',' << stat_kind_name(key.stat) << ',' << buf
                << ',' << entry.used_pixels << "\n";
        }
    }
}

inline std::vector<ParcelTimeSeries> load_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::map<std::string, ParcelTimeSeries> by_id;
    std::vector<std::string> order;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column header
            continue;
        }
        std::stringstream ss(line);
        std::string id, date_s, feature_s, stat_s, value_s, count_s;
        if (!std::getline(ss, id, ',') || !std::getline(ss, date_s, ',') ||
            !std::getline(ss, feature_s, ',') || !std::getline(ss, stat_s, ',') ||
            !std::getline(ss, value_s, ',') || !std::getline(ss, count_s)) {
            throw std::runtime_error("malformed series row: " + line);
        }
        IndexKind kind;
        StatKind stat;
        if (!parse_index_kind(feature_s, kind)) throw std::runtime_error("unknown feature " + feature_s);
        if (!parse_stat_kind(stat_s, stat)) throw std::runtime_error("unknown stat " + stat_s);
        auto [it, inserted] = by_id.try_emplace(id);
        if (inserted) {
            it->second.parcel_id = id;
            order.push_back(id);
        }
        it->second.entries[SeriesKey{Date::parse(date_s), kind, stat}] =
            SeriesEntry{std::stod(value_s), static_cast<std::size_t>(std::stoul(count_s))};
    }
    std::vector<ParcelTimeSeries> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(std::move(by_id[id]));
    return out;
}

}  // namespace fieldscan
