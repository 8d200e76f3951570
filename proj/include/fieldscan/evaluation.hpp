#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldscan/score.hpp"

namespace fieldscan {

/// Ground-truth anomaly taxonomy. Heterogeneity, growth and database-error
/// categories count as true positives; the rest are false positives for
/// crop-monitoring purposes.
enum class AnomalyCategory {
    HETEROGENEITY,
    HETEROGENEITY_TWO_PARTS,
    HETEROGENEITY_AFTER_SENESCENCE,
    EARLY_HETEROGENEITY,
    LATE_GROWTH,
    VIGOROUS_CROP,
    EARLY_FLOWERING,
    EARLY_SENESCENCE,
    LATE_SENESCENCE,
    WRONG_TYPE,
    WRONG_SHAPE,
    NORMAL_CHECKED,
    TOO_SMALL,
    SAR_ANOMALY,
    SHADOW,
};

inline constexpr AnomalyCategory kAllCategories[] = {
    AnomalyCategory::HETEROGENEITY,
    AnomalyCategory::HETEROGENEITY_TWO_PARTS,
    AnomalyCategory::HETEROGENEITY_AFTER_SENESCENCE,
    AnomalyCategory::EARLY_HETEROGENEITY,
    AnomalyCategory::LATE_GROWTH,
    AnomalyCategory::VIGOROUS_CROP,
    AnomalyCategory::EARLY_FLOWERING,
    AnomalyCategory::EARLY_SENESCENCE,
    AnomalyCategory::LATE_SENESCENCE,
    AnomalyCategory::WRONG_TYPE,
    AnomalyCategory::WRONG_SHAPE,
    AnomalyCategory::NORMAL_CHECKED,
    AnomalyCategory::TOO_SMALL,
    AnomalyCategory::SAR_ANOMALY,
    AnomalyCategory::SHADOW,
};

inline const char* category_name(AnomalyCategory c) {
    switch (c) {
        case AnomalyCategory::HETEROGENEITY: return "HETEROGENEITY";
        case AnomalyCategory::HETEROGENEITY_TWO_PARTS: return "HETEROGENEITY_TWO_PARTS";
        case AnomalyCategory::HETEROGENEITY_AFTER_SENESCENCE:
            return "HETEROGENEITY_AFTER_SENESCENCE";
        case AnomalyCategory::EARLY_HETEROGENEITY: return "EARLY_HETEROGENEITY";
        case AnomalyCategory::LATE_GROWTH: return "LATE_GROWTH";
        case AnomalyCategory::VIGOROUS_CROP: return "VIGOROUS_CROP";
        case AnomalyCategory::EARLY_FLOWERING: return "EARLY_FLOWERING";
        case AnomalyCategory::EARLY_SENESCENCE: return "EARLY_SENESCENCE";
        case AnomalyCategory::LATE_SENESCENCE: return "LATE_SENESCENCE";
        case AnomalyCategory::WRONG_TYPE: return "WRONG_TYPE";
        case AnomalyCategory::WRONG_SHAPE: return "WRONG_SHAPE";
        case AnomalyCategory::NORMAL_CHECKED: return "NORMAL_CHECKED";
        case AnomalyCategory::TOO_SMALL: return "TOO_SMALL";
        case AnomalyCategory::SAR_ANOMALY: return "SAR_ANOMALY";
        case AnomalyCategory::SHADOW: return "SHADOW";
    }
    return "?";
}

inline bool parse_category(const std::string& s, AnomalyCategory& out) {
    for (AnomalyCategory c : kAllCategories) {
        if (s == category_name(c)) {
            out = c;
            return true;
        }
    }
    return false;
}

inline bool is_true_positive(AnomalyCategory c) {
    switch (c) {
        case AnomalyCategory::NORMAL_CHECKED:
        case AnomalyCategory::TOO_SMALL:
        case AnomalyCategory::SAR_ANOMALY:
        case AnomalyCategory::SHADOW:
            return false;
        default:
            return true;
    }
}

/// parcel id -> category; parcels absent from the map are unlabeled.
using LabelSet = std::map<std::string, AnomalyCategory>;

inline LabelSet labels_from_strings(const std::map<std::string, std::string>& raw) {
    LabelSet out;
    for (const auto& [id, name] : raw) {
        if (name.empty()) continue;
        AnomalyCategory c;
        if (!parse_category(name, c)) {
            throw std::runtime_error("unknown anomaly category '" + name + "' for parcel " + id);
        }
        out[id] = c;
    }
    return out;
}

namespace detail {

inline AnomalyCategory require_label(const LabelSet& labels, const std::string& id,
                                     std::vector<std::string>& missing) {
    auto it = labels.find(id);
    if (it == labels.end()) {
        missing.push_back(id);
        return AnomalyCategory::NORMAL_CHECKED;
    }
    return it->second;
}

[[noreturn]] inline void throw_unlabeled(const std::vector<std::string>& missing) {
    std::string msg = "detected parcels lack labels:";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " (+" + std::to_string(missing.size() - 10) + " more)";
    throw std::runtime_error(msg);
}

}  // namespace detail

/// TP / (TP + FP) over a detected set. Every detected parcel must carry a
/// label; unlabeled detections are an error so they surface for countercheck
/// instead of skewing the ratio silently.
inline double precision_at(const std::vector<std::string>& detected, const LabelSet& labels) {
    if (detected.empty()) throw std::invalid_argument("precision of an empty detection set");
    std::vector<std::string> missing;
    std::size_t tp = 0;
    for (const auto& id : detected) {
        if (is_true_positive(detail::require_label(labels, id, missing))) ++tp;
    }
    if (!missing.empty()) detail::throw_unlabeled(missing);
    return static_cast<double>(tp) / static_cast<double>(detected.size());
}

/// Sampled precision-vs-outlier-ratio curve.
struct PrecisionCurve {
    std::vector<std::pair<double, double>> points;  // (ratio, precision), ratios increasing
};

inline std::vector<double> default_ratio_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 50; ++i) grid.push_back(static_cast<double>(i) / 100.0);
    return grid;
}

inline PrecisionCurve precision_curve(const ScoreVector& scores, const LabelSet& labels,
                                      const std::vector<double>& ratio_grid = default_ratio_grid()) {
    PrecisionCurve curve;
    double prev = 0.0;
    for (double r : ratio_grid) {
        if (!(r > 0.0) || r > 0.5) {
            throw std::invalid_argument("ratio grid must lie in (0, 0.5]");
        }
        if (r <= prev) throw std::invalid_argument("ratio grid must be strictly increasing");
        prev = r;
        curve.points.push_back({r, precision_at(rank_outliers(scores, r), labels)});
    }
    return curve;
}

/// Trapezoidal area under the curve over [0, 0.5], divided by 0.5. The curve
/// extends to both edges with its first/last sampled precision.
inline double normalized_auc(const PrecisionCurve& curve) {
    if (curve.points.empty()) throw std::invalid_argument("empty precision curve");
    double area = curve.points.front().first * curve.points.front().second;  // [0, r0]
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& [r0, p0] = curve.points[i - 1];
        const auto& [r1, p1] = curve.points[i];
        area += (r1 - r0) * 0.5 * (p0 + p1);
    }
    area += (0.5 - curve.points.back().first) * curve.points.back().second;
    return area / 0.5;
}

/// 100 * |detected in category| / |detected|, empty categories omitted.
inline std::map<AnomalyCategory, double> category_histogram(
    const std::vector<std::string>& detected, const LabelSet& labels) {
    if (detected.empty()) throw std::invalid_argument("histogram of an empty detection set");
    std::vector<std::string> missing;
    std::map<AnomalyCategory, std::size_t> counts;
    for (const auto& id : detected) {
        ++counts[detail::require_label(labels, id, missing)];
    }
    if (!missing.empty()) detail::throw_unlabeled(missing);
    std::map<AnomalyCategory, double> out;
    for (const auto& [cat, count] : counts) {
        out[cat] = 100.0 * static_cast<double>(count) / static_cast<double>(detected.size());
    }
    return out;
}

/// 100 * |detected in category| / |labeled in category| for every category
/// present in the labels.
inline std::map<AnomalyCategory, double> per_category_recall(
    const std::vector<std::string>& detected, const LabelSet& labels) {
    std::set<std::string> detected_set(detected.begin(), detected.end());
    std::map<AnomalyCategory, std::size_t> total, hit;
    for (const auto& [id, cat] : labels) {
        ++total[cat];
        if (detected_set.count(id)) ++hit[cat];
    }
    std::map<AnomalyCategory, double> out;
    for (const auto& [cat, n] : total) {
        out[cat] = 100.0 * static_cast<double>(hit[cat]) / static_cast<double>(n);
    }
    return out;
}

/// Set overlap between two detection runs on the same parcel universe.
struct ComparisonReport {
    std::size_t common = 0;
    std::size_t only_a = 0;
    std::size_t only_b = 0;
    double jaccard = 1.0;
    std::map<AnomalyCategory, std::size_t> only_a_by_category;
    std::map<AnomalyCategory, std::size_t> only_b_by_category;
};

inline ComparisonReport compare_detections(const std::vector<std::string>& detected_a,
                                           const std::vector<std::string>& detected_b,
                                           const LabelSet& labels,
                                           const std::vector<std::string>& universe_a,
                                           const std::vector<std::string>& universe_b) {
    std::set<std::string> ua(universe_a.begin(), universe_a.end());
    std::set<std::string> ub(universe_b.begin(), universe_b.end());
    if (ua != ub) throw std::invalid_argument("detection runs cover different parcel universes");

    std::set<std::string> a(detected_a.begin(), detected_a.end());
    std::set<std::string> b(detected_b.begin(), detected_b.end());
    ComparisonReport rep;
    std::vector<std::string> missing;
    for (const auto& id : a) {
        if (b.count(id)) {
            ++rep.common;
        } else {
            ++rep.only_a;
            ++rep.only_a_by_category[detail::require_label(labels, id, missing)];
        }
    }
    for (const auto& id : b) {
        if (!a.count(id)) {
            ++rep.only_b;
            ++rep.only_b_by_category[detail::require_label(labels, id, missing)];
        }
    }
    if (!missing.empty()) detail::throw_unlabeled(missing);
    const std::size_t uni = rep.common + rep.only_a + rep.only_b;
    rep.jaccard = uni == 0 ? 1.0 : static_cast<double>(rep.common) / static_cast<double>(uni);
    return rep;
}

inline nlohmann::json comparison_to_json(const ComparisonReport& rep) {
    nlohmann::json a_cat = nlohmann::json::object(), b_cat = nlohmann::json::object();
    for (const auto& [cat, n] : rep.only_a_by_category) a_cat[category_name(cat)] = n;
    for (const auto& [cat, n] : rep.only_b_by_category) b_cat[category_name(cat)] = n;
    return {{"common", rep.common},          {"only_a", rep.only_a},
            {"only_b", rep.only_b},          {"jaccard", rep.jaccard},
            {"only_a_by_category", a_cat},   {"only_b_by_category", b_cat}};
}

// --- artifacts --------------------------------------------------------------

inline void save_curve_csv(const std::filesystem::path& path, const PrecisionCurve& curve,
                           const std::string& comment = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "ratio,precision\n";
    char buf[64];
    for (const auto& [r, p] : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.17g", p);
        out << r << ',' << buf << "\n";
    }
}

/// Minimal static line plot of one or more curves.
inline std::string curves_to_svg(const std::vector<std::pair<std::string, PrecisionCurve>>& curves,
                                 const std::string& title) {
    const double w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 50;
    const double pw = w - ml - mr, ph = h - mt - mb;
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    std::ostringstream s;
    s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    s << "<rect width='100%' height='100%' fill='white'/>\n";
    s << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = ml + pw * i / 5.0, y = mt + ph - ph * i / 5.0;
        s << "<line x1='" << ml << "' y1='" << y << "' x2='" << ml + pw << "' y2='" << y
          << "' stroke='#ddd'/>\n";
        s << "<text x='" << x << "' y='" << h - mb + 18 << "' text-anchor='middle' font-size='11'>"
          << 0.1 * i << "</text>\n";
        s << "<text x='" << ml - 8 << "' y='" << y + 4 << "' text-anchor='end' font-size='11'>"
          << 0.2 * i << "</text>\n";
    }
    s << "<text x='" << ml + pw / 2
      << "' y='" << h - 12 << "' text-anchor='middle' font-size='12'>outlier ratio</text>\n";
    std::size_t ci = 0;
    for (const auto& [name, curve] : curves) {
        s << "<polyline fill='none' stroke='" << palette[ci % 5] << "' stroke-width='2' points='";
        for (const auto& [r, p] : curve.points) {
            s << ml + pw * (r / 0.5) << ',' << mt + ph * (1.0 - p) << ' ';
        }
        s << "'/>\n";
        s << "<text x='" << ml + 10 << "' y='" << mt + 16 + 16 * ci << "' font-size='12' fill='"
          << palette[ci % 5] << "'>" << name << "</text>\n";
        ++ci;
    }
    s << "</svg>\n";
    return s.str();
}

/// Minimal static bar plot of per-category percentages.
inline std::string histogram_to_svg(const std::map<AnomalyCategory, double>& bars,
                                    const std::string& title) {
    const double w = 760, h = 420, ml = 60, mr = 20, mt = 40, mb = 140;
    const double pw = w - ml - mr, ph = h - mt - mb;
    double peak = 1.0;
    for (const auto& [cat, v] : bars) peak = std::max(peak, v);
    std::ostringstream s;
    s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    s << "<rect width='100%' height='100%' fill='white'/>\n";
    s << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
    const double bw = pw / std::max<std::size_t>(1, bars.size());
    std::size_t i = 0;
    for (const auto& [cat, v] : bars) {
        const double x = ml + bw * i, bh = ph * (v / peak);
        s << "<rect x='" << x + bw * 0.1 << "' y='" << mt + ph - bh << "' width='" << bw * 0.8
          << "' height='" << bh << "' fill='#1f77b4'/>\n";
        s << "<text x='" << x + bw / 2 << "' y='" << mt + ph - bh - 4
          << "' text-anchor='middle' font-size='10'>" << static_cast<int>(v * 10) / 10.0
          << "</text>\n";
        s << "<text transform='translate(" << x + bw / 2 << ',' << mt + ph + 8
          << ") rotate(45)' font-size='10'>" << category_name(cat) << "</text>\n";
        ++i;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace fieldscan
