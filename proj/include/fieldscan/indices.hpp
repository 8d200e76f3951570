#pragma once

#include <cmath>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldscan/grid.hpp"
#include "fieldscan/grid_io.hpp"

namespace fieldscan {

/// Pixel-level features: five multispectral vegetation indices plus the SAR
/// backscatter features. GAMMA0_* are identity passthroughs of the linear
/// power values; RATIO_VH_VV and RVI_S1 are available but excluded from the
/// default feature set (they did not earn a slot).
enum class IndexKind {
    NDVI,
    NDWI_SWIR,
    NDWI_GREEN,
    MCARI_OSAVI,
    GRVI,
    GAMMA0_VH,
    GAMMA0_VV,
    RATIO_VH_VV,
    RVI_S1,
};

inline constexpr IndexKind kAllIndexKinds[] = {
    IndexKind::NDVI,       IndexKind::NDWI_SWIR, IndexKind::NDWI_GREEN,
    IndexKind::MCARI_OSAVI, IndexKind::GRVI,      IndexKind::GAMMA0_VH,
    IndexKind::GAMMA0_VV,  IndexKind::RATIO_VH_VV, IndexKind::RVI_S1,
};

inline const char* index_kind_name(IndexKind k) {
    switch (k) {
        case IndexKind::NDVI: return "NDVI";
        case IndexKind::NDWI_SWIR: return "NDWI_SWIR";
        case IndexKind::NDWI_GREEN: return "NDWI_GREEN";
        case IndexKind::MCARI_OSAVI: return "MCARI_OSAVI";
        case IndexKind::GRVI: return "GRVI";
        case IndexKind::GAMMA0_VH: return "GAMMA0_VH";
        case IndexKind::GAMMA0_VV: return "GAMMA0_VV";
        case IndexKind::RATIO_VH_VV: return "RATIO_VH_VV";
        case IndexKind::RVI_S1: return "RVI_S1";
    }
    return "?";
}

inline bool parse_index_kind(const std::string& s, IndexKind& out) {
    for (IndexKind k : kAllIndexKinds) {
        if (s == index_kind_name(k)) {
            out = k;
            return true;
        }
    }
    return false;
}

/// SAR-derived features come from Sentinel-1, the rest from Sentinel-2.
inline bool is_sar_kind(IndexKind k) {
    return k == IndexKind::GAMMA0_VH || k == IndexKind::GAMMA0_VV ||
           k == IndexKind::RATIO_VH_VV || k == IndexKind::RVI_S1;
}

/// Band roles a kind consumes.
inline std::vector<BandRole> required_bands(IndexKind k) {
    switch (k) {
        case IndexKind::NDVI: return {BandRole::NIR, BandRole::RED};
        case IndexKind::NDWI_SWIR: return {BandRole::NIR, BandRole::SWIR};
        case IndexKind::NDWI_GREEN: return {BandRole::GREEN, BandRole::NIR};
        case IndexKind::MCARI_OSAVI: return {BandRole::RE, BandRole::NIR, BandRole::RED};
        case IndexKind::GRVI: return {BandRole::GREEN, BandRole::RED};
        case IndexKind::GAMMA0_VH: return {BandRole::VH};
        case IndexKind::GAMMA0_VV: return {BandRole::VV};
        case IndexKind::RATIO_VH_VV: return {BandRole::VH, BandRole::VV};
        case IndexKind::RVI_S1: return {BandRole::VH, BandRole::VV};
    }
    return {};
}

/// One pixel feature at one date. nodata marks pixels where any input was
/// nodata or the formula was undefined.
struct FeatureGrid {
    GridMeta meta;
    Date date;
    IndexKind kind = IndexKind::NDVI;
    std::vector<float> values;

    [[nodiscard]] float at(std::int32_t row, std::int32_t col) const {
        return values[static_cast<std::size_t>(row) * meta.width + col];
    }
    float& at(std::int32_t row, std::int32_t col) {
        return values[static_cast<std::size_t>(row) * meta.width + col];
    }
    [[nodiscard]] bool is_nodata(float v) const { return v == meta.nodata || std::isnan(v); }
};

namespace detail {

// Denominators smaller than this poison the pixel instead of the statistics.
inline constexpr double kDenomGuard = 1e-12;

inline const BandGrid* find_band(std::span<const BandGrid> bands, BandRole role) {
    for (const auto& b : bands) {
        if (b.role == role) return &b;
    }
    return nullptr;
}

}  // namespace detail

/// Applies the index formula pixelwise over aligned same-date bands.
/// Any nodata input or near-zero denominator yields nodata.
inline FeatureGrid compute_vegetation_index(IndexKind kind, std::span<const BandGrid> bands) {
    if (is_sar_kind(kind)) throw std::invalid_argument("not a multispectral index");
    const auto roles = required_bands(kind);
    std::vector<const BandGrid*> in;
    for (BandRole r : roles) {
        const BandGrid* b = detail::find_band(bands, r);
        if (b == nullptr) {
            throw std::invalid_argument(std::string("missing band ") + band_role_name(r));
        }
        in.push_back(b);
    }
    for (const auto* b : in) {
        if (!aligned(b->meta, in[0]->meta)) throw std::invalid_argument("misaligned input bands");
        if (b->date != in[0]->date) throw std::invalid_argument("input bands differ in date");
    }

    const GridMeta& meta = in[0]->meta;
    FeatureGrid out{meta, in[0]->date, kind, std::vector<float>(meta.cells(), meta.nodata)};
    const std::size_t n = meta.cells();
    for (std::size_t i = 0; i < n; ++i) {
        bool bad = false;
        for (const auto* b : in) {
            if (b->is_nodata(b->values[i])) {
                bad = true;
                break;
            }
        }
        if (bad) continue;

        double v = 0.0;
        bool defined = true;
        auto norm_diff = [&](double a, double b) {
            const double den = a + b;
            if (std::abs(den) < detail::kDenomGuard) {
                defined = false;
                return 0.0;
            }
            return (a - b) / den;
        };
        switch (kind) {
            case IndexKind::NDVI:
                v = norm_diff(in[0]->values[i], in[1]->values[i]);  // NIR, RED
                break;
            case IndexKind::NDWI_SWIR:
                v = norm_diff(in[0]->values[i], in[1]->values[i]);  // NIR, SWIR
                break;
            case IndexKind::NDWI_GREEN:
                v = norm_diff(in[0]->values[i], in[1]->values[i]);  // GREEN, NIR
                break;
            case IndexKind::GRVI:
                v = norm_diff(in[0]->values[i], in[1]->values[i]);  // GREEN, RED
                break;
            case IndexKind::MCARI_OSAVI: {
                const double re = in[0]->values[i];
                const double nir = in[1]->values[i];
                const double red = in[2]->values[i];
                const double osavi_den = nir + red + 0.16;
                if (std::abs(osavi_den) < detail::kDenomGuard) {
                    defined = false;
                    break;
                }
                const double den = 1.16 * (nir - red) / osavi_den;
                if (std::abs(den) < detail::kDenomGuard) {
                    defined = false;
                    break;
                }
                v = ((re - nir) - 0.2 * (re - red)) / den;
                break;
            }
            default:
                defined = false;
        }
        if (defined) out.values[i] = static_cast<float>(v);
    }
    return out;
}

/// SAR features from linear-power backscatter grids. GAMMA0_* copy the input
/// through; ratio forms guard against zero denominators with nodata.
inline FeatureGrid compute_sar_feature(IndexKind kind, const BandGrid& vh, const BandGrid& vv) {
    if (!is_sar_kind(kind)) throw std::invalid_argument("not a SAR feature");
    const BandGrid& primary = (kind == IndexKind::GAMMA0_VV) ? vv : vh;
    if (kind == IndexKind::RATIO_VH_VV || kind == IndexKind::RVI_S1) {
        if (!aligned(vh.meta, vv.meta)) throw std::invalid_argument("misaligned VH/VV grids");
    }

    const GridMeta& meta = primary.meta;
    FeatureGrid out{meta, primary.date, kind, std::vector<float>(meta.cells(), meta.nodata)};
    const std::size_t n = meta.cells();
    for (std::size_t i = 0; i < n; ++i) {
        switch (kind) {
            case IndexKind::GAMMA0_VH:
            case IndexKind::GAMMA0_VV:
                if (!primary.is_nodata(primary.values[i])) out.values[i] = primary.values[i];
                break;
            case IndexKind::RATIO_VH_VV: {
                if (vh.is_nodata(vh.values[i]) || vv.is_nodata(vv.values[i])) break;
                const double den = vv.values[i];
                if (std::abs(den) < detail::kDenomGuard) break;
                out.values[i] = static_cast<float>(vh.values[i] / den);
                break;
            }
            case IndexKind::RVI_S1: {
                if (vh.is_nodata(vh.values[i]) || vv.is_nodata(vv.values[i])) break;
                const double den = static_cast<double>(vh.values[i]) + vv.values[i];
                if (std::abs(den) < detail::kDenomGuard) break;
                out.values[i] = static_cast<float>(4.0 * vh.values[i] / den);
                break;
            }
            default:
                break;
        }
    }
    return out;
}

/// 10*log10 view of a linear-power grid, for report plots only; the
/// detection pipeline stays in linear power.
inline FeatureGrid to_decibel(const FeatureGrid& g) {
    FeatureGrid out = g;
    for (auto& v : out.values) {
        if (g.is_nodata(v) || v <= 0.0f) {
            v = g.meta.nodata;
        } else {
            v = static_cast<float>(10.0 * std::log10(static_cast<double>(v)));
        }
    }
    return out;
}

inline FeatureGrid load_feature_grid(const std::filesystem::path& grid_path) {
    RawGrid raw = load_raw_grid(grid_path);
    IndexKind kind;
    if (!parse_index_kind(raw.role, kind)) {
        throw std::runtime_error("unknown feature kind '" + raw.role + "' in " + grid_path.string());
    }
    return FeatureGrid{raw.meta, raw.date, kind, std::move(raw.values)};
}

inline void save_feature_grid(const std::filesystem::path& grid_path, const FeatureGrid& g) {
    save_raw_grid(grid_path, RawGrid{g.meta, g.date, index_kind_name(g.kind), g.values});
}

}  // namespace fieldscan
