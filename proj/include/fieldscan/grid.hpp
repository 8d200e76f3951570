#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldscan/date.hpp"

namespace fieldscan {

/// Raster band semantics. Masks use 0 = clear, 1 = masked.
enum class BandRole {
    GREEN,
    RED,
    RE,
    NIR,
    SWIR,
    VH,
    VV,
    CLOUD_MASK,
    SHADOW_MASK,
};

inline const char* band_role_name(BandRole r) {
    switch (r) {
        case BandRole::GREEN: return "GREEN";
        case BandRole::RED: return "RED";
        case BandRole::RE: return "RE";
        case BandRole::NIR: return "NIR";
        case BandRole::SWIR: return "SWIR";
        case BandRole::VH: return "VH";
        case BandRole::VV: return "VV";
        case BandRole::CLOUD_MASK: return "CLOUD_MASK";
        case BandRole::SHADOW_MASK: return "SHADOW_MASK";
    }
    return "?";
}

inline bool parse_band_role(const std::string& s, BandRole& out) {
    static const std::pair<const char*, BandRole> table[] = {
        {"GREEN", BandRole::GREEN},   {"RED", BandRole::RED},
        {"RE", BandRole::RE},         {"NIR", BandRole::NIR},
        {"SWIR", BandRole::SWIR},     {"VH", BandRole::VH},
        {"VV", BandRole::VV},         {"CLOUD_MASK", BandRole::CLOUD_MASK},
        {"SHADOW_MASK", BandRole::SHADOW_MASK},
    };
    for (const auto& [name, role] : table) {
        if (s == name) {
            out = role;
            return true;
        }
    }
    return false;
}

inline bool is_mask_role(BandRole r) {
    return r == BandRole::CLOUD_MASK || r == BandRole::SHADOW_MASK;
}

inline bool is_sar_role(BandRole r) { return r == BandRole::VH || r == BandRole::VV; }

/// Pixel geometry of a north-up raster: square pixels of pixel_size meters,
/// (origin_x, origin_y) is the top-left corner of pixel (0,0), rows grow
/// southward. Two grids are alignable iff all five fields match.
struct GridMeta {
    std::int32_t width = 0;
    std::int32_t height = 0;
    double pixel_size = 10.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    float nodata = -9999.0f;

    [[nodiscard]] std::size_t cells() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    [[nodiscard]] double center_x(std::int32_t col) const {
        return origin_x + (col + 0.5) * pixel_size;
    }
    [[nodiscard]] double center_y(std::int32_t row) const {
        return origin_y - (row + 0.5) * pixel_size;
    }

    [[nodiscard]] bool in_bounds(std::int32_t row, std::int32_t col) const {
        return row >= 0 && row < height && col >= 0 && col < width;
    }

    void validate() const {
        if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
        if (!(pixel_size > 0.0)) throw std::invalid_argument("pixel_size must be positive");
    }
};

inline bool aligned(const GridMeta& a, const GridMeta& b) {
    return a.width == b.width && a.height == b.height && a.pixel_size == b.pixel_size &&
           a.origin_x == b.origin_x && a.origin_y == b.origin_y;
}

/// One raster band at one acquisition date, row-major samples.
struct BandGrid {
    GridMeta meta;
    Date date;
    BandRole role = BandRole::NIR;
    std::vector<float> values;

    [[nodiscard]] float at(std::int32_t row, std::int32_t col) const {
        return values[static_cast<std::size_t>(row) * meta.width + col];
    }
    float& at(std::int32_t row, std::int32_t col) {
        return values[static_cast<std::size_t>(row) * meta.width + col];
    }

    [[nodiscard]] bool is_nodata(float v) const { return v == meta.nodata || std::isnan(v); }

    void validate() const {
        meta.validate();
        if (values.size() != meta.cells()) {
            throw std::invalid_argument("band payload length does not match width*height");
        }
    }
};

inline BandGrid make_constant_grid(const GridMeta& meta, Date date, BandRole role, float value) {
    BandGrid g{meta, date, role, std::vector<float>(meta.cells(), value)};
    return g;
}

/// Nearest-neighbor upsampling of a 20 m grid onto the 10 m lattice: each
/// source pixel is replicated into its 2x2 block, nodata included. When a
/// 10 m reference is given, the source must cover the same extent from the
/// same origin or the call refuses.
inline BandGrid resample_to_10m(const BandGrid& src, const GridMeta* reference = nullptr) {
    if (src.meta.pixel_size != 20.0) {
        throw std::invalid_argument("resample_to_10m expects a 20 m grid");
    }
    GridMeta out = src.meta;
    out.pixel_size = 10.0;
    out.width = src.meta.width * 2;
    out.height = src.meta.height * 2;
    if (reference != nullptr) {
        if (reference->pixel_size != 10.0 || reference->origin_x != src.meta.origin_x ||
            reference->origin_y != src.meta.origin_y || reference->width != out.width ||
            reference->height != out.height) {
            throw std::invalid_argument("20 m grid is not aligned with the 10 m reference grid");
        }
        out.nodata = src.meta.nodata;
    }
    BandGrid dst{out, src.date, src.role, std::vector<float>(out.cells())};
    for (std::int32_t r = 0; r < out.height; ++r) {
        const std::int32_t sr = r / 2;
        for (std::int32_t c = 0; c < out.width; ++c) {
            dst.at(r, c) = src.at(sr, c / 2);
        }
    }
    return dst;
}

}  // namespace fieldscan
