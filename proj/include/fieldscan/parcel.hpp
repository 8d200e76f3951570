#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldscan/date.hpp"
#include "fieldscan/grid.hpp"

namespace fieldscan {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Ring = std::vector<Point>;  // closed implicitly: last vertex connects to first

/// A field polygon in the grid's planar frame (meters). rings[0] is the
/// exterior; any further rings are holes.
struct ParcelPolygon {
    std::string id;
    std::string crop_type;
    std::vector<Ring> rings;

    [[nodiscard]] const Ring& exterior() const { return rings.at(0); }
};

/// Signed shoelace area of one ring (positive if counter-clockwise).
inline double ring_area(const Ring& ring) {
    double acc = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

/// Exterior area minus hole areas, in square meters.
inline double polygon_area(const ParcelPolygon& poly) {
    if (poly.rings.empty()) return 0.0;
    double area = std::abs(ring_area(poly.rings[0]));
    for (std::size_t i = 1; i < poly.rings.size(); ++i) {
        area -= std::abs(ring_area(poly.rings[i]));
    }
    return area;
}

/// Even-odd crossing test against every ring, so holes flip the parity back out.
inline bool point_in_polygon(const ParcelPolygon& poly, double x, double y) {
    bool inside = false;
    for (const Ring& ring : poly.rings) {
        const std::size_t n = ring.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point& a = ring[i];
            const Point& b = ring[j];
            if ((a.y > y) != (b.y > y)) {
                const double x_cross = (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x;
                if (x < x_cross) inside = !inside;
            }
        }
    }
    return inside;
}

struct Bounds {
    double min_x, min_y, max_x, max_y;
};

inline Bounds polygon_bounds(const ParcelPolygon& poly) {
    Bounds b{1e300, 1e300, -1e300, -1e300};
    for (const Ring& ring : poly.rings) {
        for (const Point& p : ring) {
            b.min_x = std::min(b.min_x, p.x);
            b.min_y = std::min(b.min_y, p.y);
            b.max_x = std::max(b.max_x, p.x);
            b.max_y = std::max(b.max_y, p.y);
        }
    }
    return b;
}

struct PixelRC {
    std::int32_t row = 0;
    std::int32_t col = 0;
    auto operator<=>(const PixelRC&) const = default;
};

/// Per-cause tally of pixels dropped by quality masks at one date.
struct MaskRemoval {
    std::size_t cloud = 0;
    std::size_t shadow = 0;
};

/// A parcel's raster membership on a given grid. `pixels` holds every pixel
/// whose center fell inside the polygon; `survived_buffer` marks the subset
/// left after inward erosion; `clear` marks, per date, survivors untouched
/// by the quality masks. The subset chain pixels ⊇ survivors ⊇ clear(date)
/// holds by construction.
struct PixelSet {
    std::string parcel_id;
    GridMeta meta;
    std::vector<PixelRC> pixels;
    std::vector<std::uint8_t> survived_buffer;       // parallel to pixels
    std::map<Date, std::vector<std::uint8_t>> clear;  // parallel to pixels
    std::map<Date, MaskRemoval> removals;

    [[nodiscard]] std::size_t inside_count() const { return pixels.size(); }

    [[nodiscard]] std::size_t survivor_count() const {
        std::size_t n = 0;
        for (auto f : survived_buffer) n += f;
        return n;
    }

    [[nodiscard]] std::size_t clear_count(const Date& d) const {
        auto it = clear.find(d);
        if (it == clear.end()) return survivor_count();
        std::size_t n = 0;
        for (auto f : it->second) n += f;
        return n;
    }

    /// Survivor flags at a date, falling back to the buffer set when no
    /// masks were applied for that date.
    [[nodiscard]] const std::vector<std::uint8_t>& flags_at(const Date& d) const {
        auto it = clear.find(d);
        return it == clear.end() ? survived_buffer : it->second;
    }

    [[nodiscard]] double survivor_area_m2() const {
        return static_cast<double>(survivor_count()) * meta.pixel_size * meta.pixel_size;
    }
};

/// Collects every pixel whose center lies inside the polygon (even-odd
/// rule). Iteration is clipped to the polygon's bounding box; survivors are
/// initialized to the full set (no buffer applied yet).
inline PixelSet rasterize_polygon(const ParcelPolygon& poly, const GridMeta& meta) {
    meta.validate();
    if (poly.rings.empty() || poly.exterior().size() < 3 || polygon_area(poly) <= 0.0) {
        throw std::invalid_argument("degenerate polygon '" + poly.id + "'");
    }
    const Bounds b = polygon_bounds(poly);
    const double grid_max_x = meta.origin_x + meta.width * meta.pixel_size;
    const double grid_min_y = meta.origin_y - meta.height * meta.pixel_size;
    if (b.max_x <= meta.origin_x || b.min_x >= grid_max_x || b.max_y <= grid_min_y ||
        b.min_y >= meta.origin_y) {
        throw std::invalid_argument("polygon '" + poly.id + "' does not intersect the grid");
    }

    auto col_of = [&](double x) {
        return static_cast<std::int32_t>(std::floor((x - meta.origin_x) / meta.pixel_size));
    };
    auto row_of = [&](double y) {
        return static_cast<std::int32_t>(std::floor((meta.origin_y - y) / meta.pixel_size));
    };
    const std::int32_t c0 = std::max<std::int32_t>(0, col_of(b.min_x));
    const std::int32_t c1 = std::min<std::int32_t>(meta.width - 1, col_of(b.max_x));
    const std::int32_t r0 = std::max<std::int32_t>(0, row_of(b.max_y));
    const std::int32_t r1 = std::min<std::int32_t>(meta.height - 1, row_of(b.min_y));

    PixelSet out;
    out.parcel_id = poly.id;
    out.meta = meta;
    for (std::int32_t r = r0; r <= r1; ++r) {
        const double cy = meta.center_y(r);
        for (std::int32_t c = c0; c <= c1; ++c) {
            if (point_in_polygon(poly, meta.center_x(c), cy)) {
                out.pixels.push_back({r, c});
            }
        }
    }
    out.survived_buffer.assign(out.pixels.size(), 1);
    return out;
}

/// Whether the polygon lies fully within the grid extent. The pipeline skips
/// parcels that spill past the edge instead of scoring a truncated footprint.
inline bool polygon_within_grid(const ParcelPolygon& poly, const GridMeta& meta) {
    const Bounds b = polygon_bounds(poly);
    return b.min_x >= meta.origin_x && b.max_x <= meta.origin_x + meta.width * meta.pixel_size &&
           b.max_y <= meta.origin_y && b.min_y >= meta.origin_y - meta.height * meta.pixel_size;
}

/// Morphological erosion of the survivor set: a pixel stays iff every pixel
/// whose center is within `radius_m` of its center is itself a survivor.
/// At 10 m pixels a 10 m radius reduces to the 4-neighborhood. Radius 0 is
/// the identity, and successive erosions compose.
inline PixelSet erode_pixels(const PixelSet& in, double radius_m) {
    if (radius_m < 0.0) throw std::invalid_argument("erosion radius must be >= 0");
    PixelSet out = in;
    if (in.pixels.empty()) return out;
    const std::int32_t reach =
        static_cast<std::int32_t>(std::floor(radius_m / in.meta.pixel_size + 1e-9));
    if (reach == 0) return out;

    // structuring element: integer offsets within the Euclidean radius
    std::vector<PixelRC> offsets;
    const double r2 = (radius_m / in.meta.pixel_size) * (radius_m / in.meta.pixel_size) + 1e-9;
    for (std::int32_t dr = -reach; dr <= reach; ++dr) {
        for (std::int32_t dc = -reach; dc <= reach; ++dc) {
            if (static_cast<double>(dr) * dr + static_cast<double>(dc) * dc <= r2) {
                offsets.push_back({dr, dc});
            }
        }
    }

    // bitmap over the parcel's bounding box; anything outside counts as absent
    std::int32_t rmin = in.pixels[0].row, rmax = in.pixels[0].row;
    std::int32_t cmin = in.pixels[0].col, cmax = in.pixels[0].col;
    for (const auto& p : in.pixels) {
        rmin = std::min(rmin, p.row);
        rmax = std::max(rmax, p.row);
        cmin = std::min(cmin, p.col);
        cmax = std::max(cmax, p.col);
    }
    const std::int32_t bw = cmax - cmin + 1;
    const std::int32_t bh = rmax - rmin + 1;
    std::vector<std::uint8_t> bitmap(static_cast<std::size_t>(bw) * bh, 0);
    for (std::size_t i = 0; i < in.pixels.size(); ++i) {
        if (!in.survived_buffer[i]) continue;
        const auto& p = in.pixels[i];
        bitmap[static_cast<std::size_t>(p.row - rmin) * bw + (p.col - cmin)] = 1;
    }
    auto present = [&](std::int32_t r, std::int32_t c) {
        r -= rmin;
        c -= cmin;
        if (r < 0 || r >= bh || c < 0 || c >= bw) return false;
        return bitmap[static_cast<std::size_t>(r) * bw + c] != 0;
    };

    for (std::size_t i = 0; i < in.pixels.size(); ++i) {
        if (!in.survived_buffer[i]) {
            out.survived_buffer[i] = 0;
            continue;
        }
        bool keep = true;
        for (const auto& o : offsets) {
            if (!present(in.pixels[i].row + o.row, in.pixels[i].col + o.col)) {
                keep = false;
                break;
            }
        }
        out.survived_buffer[i] = keep ? 1 : 0;
    }
    // erosion shrinks the previously recorded clear sets too
    for (auto& [date, flags] : out.clear) {
        for (std::size_t i = 0; i < flags.size(); ++i) flags[i] &= out.survived_buffer[i];
    }
    return out;
}

/// Marks buffer survivors clear at `date` when both masks read 0 there.
/// Mask nodata counts as masked. Removal counts are recorded per cause
/// (a pixel masked by both is tallied as cloud).
inline PixelSet apply_quality_masks(const PixelSet& in, const BandGrid& cloud,
                                    const BandGrid& shadow, const Date& date) {
    if (cloud.role != BandRole::CLOUD_MASK || shadow.role != BandRole::SHADOW_MASK) {
        throw std::invalid_argument("mask grids must carry CLOUD_MASK / SHADOW_MASK roles");
    }
    if (!aligned(cloud.meta, in.meta) || !aligned(shadow.meta, in.meta)) {
        throw std::invalid_argument("mask grids are not aligned with the parcel grid");
    }
    PixelSet out = in;
    std::vector<std::uint8_t> flags(in.pixels.size(), 0);
    MaskRemoval tally;
    for (std::size_t i = 0; i < in.pixels.size(); ++i) {
        if (!in.survived_buffer[i]) continue;
        const auto& p = in.pixels[i];
        const float cv = cloud.at(p.row, p.col);
        const float sv = shadow.at(p.row, p.col);
        const bool cloudy = cloud.is_nodata(cv) || cv != 0.0f;
        const bool shadowed = shadow.is_nodata(sv) || sv != 0.0f;
        if (cloudy) {
            ++tally.cloud;
        } else if (shadowed) {
            ++tally.shadow;
        } else {
            flags[i] = 1;
        }
    }
    out.clear[date] = std::move(flags);
    out.removals[date] = tally;
    return out;
}

}  // namespace fieldscan
