#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fieldscan {

/// Zonal statistic kinds, in column order.
enum class StatKind { MEDIAN, IQR, SKEWNESS, KURTOSIS };

inline constexpr StatKind kAllStatKinds[] = {StatKind::MEDIAN, StatKind::IQR, StatKind::SKEWNESS,
                                             StatKind::KURTOSIS};

inline const char* stat_kind_name(StatKind k) {
    switch (k) {
        case StatKind::MEDIAN: return "MEDIAN";
        case StatKind::IQR: return "IQR";
        case StatKind::SKEWNESS: return "SKEWNESS";
        case StatKind::KURTOSIS: return "KURTOSIS";
    }
    return "?";
}

inline bool parse_stat_kind(const std::string& s, StatKind& out) {
    for (StatKind k : kAllStatKinds) {
        if (s == stat_kind_name(k)) {
            out = k;
            return true;
        }
    }
    return false;
}

/// Quantile with linear interpolation between order statistics: for sorted
/// values v and h = (n-1)*q, returns v[floor(h)] + frac(h)*(v[floor(h)+1] -
/// v[floor(h)]).
inline double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile of empty input");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile fraction outside [0,1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Computes one statistic over a multiset. SKEWNESS/KURTOSIS (normalized
/// third/fourth central moments; kurtosis is excess) return nullopt when the
/// variance vanishes.
inline std::optional<double> zonal_statistic(std::span<const double> values, StatKind stat) {
    if (values.empty()) throw std::invalid_argument("statistic of empty input");
    switch (stat) {
        case StatKind::MEDIAN:
            return percentile(values, 0.5);
        case StatKind::IQR:
            return percentile(values, 0.75) - percentile(values, 0.25);
        case StatKind::SKEWNESS:
        case StatKind::KURTOSIS: {
            const double n = static_cast<double>(values.size());
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= n;
            double m2 = 0.0, m3 = 0.0, m4 = 0.0;
            for (double v : values) {
                const double d = v - mean;
                const double d2 = d * d;
                m2 += d2;
                m3 += d2 * d;
                m4 += d2 * d2;
            }
            m2 /= n;
            m3 /= n;
            m4 /= n;
            if (m2 <= 0.0) return std::nullopt;
            if (stat == StatKind::SKEWNESS) return m3 / std::pow(m2, 1.5);
            return m4 / (m2 * m2) - 3.0;
        }
    }
    throw std::invalid_argument("unknown statistic");
}

}  // namespace fieldscan
