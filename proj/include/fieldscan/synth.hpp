#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldscan/evaluation.hpp"
#include "fieldscan/geojson.hpp"
#include "fieldscan/grid_io.hpp"
#include "fieldscan/indices.hpp"
#include "fieldscan/parallel.hpp"
#include "fieldscan/parcel.hpp"
#include "fieldscan/rng.hpp"

namespace fieldscan {

// --- seasonal templates -----------------------------------------------------

struct DoubleLogisticParams {
    double v_min = 0.0;
    double v_max = 1.0;
    double k1 = 0.06;  // green-up steepness
    double t1 = 60.0;  // green-up midpoint (day of season)
    double k2 = 0.07;  // senescence steepness
    double t2 = 230.0;

    void validate() const {
        if (!(v_min < v_max) || !(k1 > 0.0) || !(k2 > 0.0) || !(t1 < t2)) {
            throw std::invalid_argument("invalid double-logistic parameters");
        }
    }
};

inline double double_logistic(double t, const DoubleLogisticParams& p) {
    const double rise = 1.0 / (1.0 + std::exp(-p.k1 * (t - p.t1)));
    const double fall = 1.0 / (1.0 + std::exp(-p.k2 * (t - p.t2)));
    return p.v_min + (p.v_max - p.v_min) * (rise - fall);
}

/// Monotone biomass proxy for the backscatter features: flat over bare soil,
/// rising with canopy development, no senescence decay.
struct SarGrowthParams {
    double base = 0.012;
    double amplitude = 0.04;
    double midpoint = 70.0;
    double steepness = 0.06;
};

inline double sar_growth(double t, const SarGrowthParams& p) {
    return p.base + p.amplitude / (1.0 + std::exp(-p.steepness * (t - p.midpoint)));
}

/// Per-crop temporal templates and noise levels for every generated feature.
struct SeasonModel {
    std::string crop_type = "rapeseed";
    std::map<IndexKind, DoubleLogisticParams> vi;
    std::map<IndexKind, SarGrowthParams> sar;
    std::map<IndexKind, double> flower_amp;  // transient mid-season bump (flowering)
    double flower_center = 100.0;            // day of season
    double flower_sigma = 12.0;
    std::map<IndexKind, double> soil;  // bare-soil level per feature
    double vi_pixel_noise = 0.03;
    double vi_parcel_noise = 0.02;
    double sar_pixel_log_noise = 0.18;
    double sar_parcel_log_noise = 0.07;
};

inline SeasonModel rapeseed_model() {
    SeasonModel m;
    m.crop_type = "rapeseed";
    m.vi[IndexKind::NDVI] = {0.15, 0.88, 0.065, 55.0, 0.075, 235.0};
    m.vi[IndexKind::NDWI_SWIR] = {0.02, 0.55, 0.060, 60.0, 0.070, 232.0};
    m.vi[IndexKind::NDWI_GREEN] = {-0.78, -0.20, 0.060, 58.0, 0.072, 230.0};
    m.vi[IndexKind::MCARI_OSAVI] = {0.15, 1.05, 0.055, 52.0, 0.080, 228.0};
    m.vi[IndexKind::GRVI] = {-0.14, 0.24, 0.070, 58.0, 0.080, 228.0};
    m.sar[IndexKind::GAMMA0_VH] = {0.012, 0.043, 70.0, 0.060};
    m.sar[IndexKind::GAMMA0_VV] = {0.055, 0.065, 70.0, 0.055};
    m.flower_amp[IndexKind::GRVI] = 0.09;        // yellow flowers push green over red
    m.flower_amp[IndexKind::NDWI_GREEN] = 0.05;
    m.flower_center = 100.0;
    m.flower_sigma = 12.0;
    m.soil[IndexKind::NDVI] = 0.12;
    m.soil[IndexKind::NDWI_SWIR] = 0.01;
    m.soil[IndexKind::NDWI_GREEN] = -0.76;
    m.soil[IndexKind::MCARI_OSAVI] = 0.14;
    m.soil[IndexKind::GRVI] = -0.12;
    m.soil[IndexKind::GAMMA0_VH] = 0.011;
    m.soil[IndexKind::GAMMA0_VV] = 0.052;
    return m;
}

/// The crop a WRONG_TYPE parcel actually grows: later, flatter and weaker in
/// every feature than the declared crop.
inline SeasonModel offtype_model() {
    SeasonModel m = rapeseed_model();
    m.crop_type = "offtype";
    m.vi[IndexKind::NDVI] = {0.17, 0.52, 0.030, 125.0, 0.050, 258.0};
    m.vi[IndexKind::NDWI_SWIR] = {0.00, 0.20, 0.030, 128.0, 0.050, 256.0};
    m.vi[IndexKind::NDWI_GREEN] = {-0.74, -0.46, 0.030, 124.0, 0.050, 254.0};
    m.vi[IndexKind::MCARI_OSAVI] = {0.18, 0.50, 0.028, 126.0, 0.050, 252.0};
    m.vi[IndexKind::GRVI] = {-0.12, 0.04, 0.030, 122.0, 0.050, 250.0};
    m.sar[IndexKind::GAMMA0_VH] = {0.010, 0.018, 150.0, 0.035};
    m.sar[IndexKind::GAMMA0_VV] = {0.048, 0.028, 150.0, 0.035};
    m.flower_amp.clear();  // no flowering signature
    return m;
}

// --- anomaly taxonomy: intensity defaults ------------------------------------

/// Intensity knobs for one injected category. Every field is a declared
/// constant echoed into the scene manifest, not a claim about real data.
struct AnomalySpec {
    AnomalyCategory category = AnomalyCategory::NORMAL_CHECKED;
    double time_shift_days = 0.0;     // whole-curve delay (late growth)
    double vi_amplitude = 1.0;        // amplitude factor on (v - v_min)
    double sar_amplitude = 1.0;
    double fraction = 0.0;            // pixel fraction in the altered population(s)
    double part_time_shift = 0.0;     // secondary-population transforms
    double part_t1_shift = 0.0;
    double part_t2_shift = 0.0;
    double part_vi_amplitude = 1.0;
    double part_sar_amplitude = 1.0;
    double t2_shift_days = 0.0;       // senescence timing categories
    double flower_shift_days = 0.0;   // early flowering
    double flower_ndvi_dip = 0.0;
    double spike_min = 1.0;           // SAR flashing factor range, early dates
    double spike_max = 1.0;
    double shade = 0.0;               // pull toward soil on multispectral features

    static AnomalySpec defaults(AnomalyCategory c) {
        AnomalySpec s;
        s.category = c;
        switch (c) {
            case AnomalyCategory::HETEROGENEITY:
                s.fraction = 0.5;
                s.part_time_shift = 15.0;
                s.part_vi_amplitude = 0.82;
                s.part_sar_amplitude = 0.86;
                break;
            case AnomalyCategory::HETEROGENEITY_TWO_PARTS:
                s.fraction = 0.5;
                s.part_time_shift = 22.0;
                s.part_vi_amplitude = 0.85;
                s.part_sar_amplitude = 0.90;
                break;
            case AnomalyCategory::HETEROGENEITY_AFTER_SENESCENCE:
                s.fraction = 0.5;
                s.part_t2_shift = -30.0;
                break;
            case AnomalyCategory::EARLY_HETEROGENEITY:
                s.fraction = 0.5;
                s.part_t1_shift = 22.0;
                break;
            case AnomalyCategory::LATE_GROWTH:
                s.time_shift_days = 30.0;
                s.sar_amplitude = 0.80;
                break;
            case AnomalyCategory::VIGOROUS_CROP:
                s.time_shift_days = -8.0;
                s.vi_amplitude = 1.10;
                s.sar_amplitude = 1.45;
                break;
            case AnomalyCategory::EARLY_FLOWERING:
                s.flower_shift_days = -22.0;
                s.flower_ndvi_dip = -0.08;
                break;
            case AnomalyCategory::EARLY_SENESCENCE:
                s.t2_shift_days = -28.0;
                break;
            case AnomalyCategory::LATE_SENESCENCE:
                s.t2_shift_days = 28.0;
                break;
            case AnomalyCategory::WRONG_TYPE:
            case AnomalyCategory::WRONG_SHAPE:
                s.fraction = 0.35;  // soil strip width for wrong shape
                break;
            case AnomalyCategory::SAR_ANOMALY:
                s.spike_min = 1.6;
                s.spike_max = 4.0;
                break;
            case AnomalyCategory::SHADOW:
                s.fraction = 0.30;
                s.shade = 0.60;
                break;
            case AnomalyCategory::NORMAL_CHECKED:
            case AnomalyCategory::TOO_SMALL:
                break;
        }
        return s;
    }

    [[nodiscard]] nlohmann::json to_json() const {
        return {{"category", category_name(category)},
                {"time_shift_days", time_shift_days},
                {"vi_amplitude", vi_amplitude},
                {"sar_amplitude", sar_amplitude},
                {"fraction", fraction},
                {"part_time_shift", part_time_shift},
                {"part_t1_shift", part_t1_shift},
                {"part_t2_shift", part_t2_shift},
                {"part_vi_amplitude", part_vi_amplitude},
                {"part_sar_amplitude", part_sar_amplitude},
                {"t2_shift_days", t2_shift_days},
                {"flower_shift_days", flower_shift_days},
                {"flower_ndvi_dip", flower_ndvi_dip},
                {"spike_min", spike_min},
                {"spike_max", spike_max},
                {"shade", shade}};
    }
};

namespace detail {

/// How one pixel population deviates from the crop template.
struct PopulationTransform {
    double time_shift = 0.0;
    double t1_shift = 0.0;
    double t2_shift = 0.0;
    double vi_amp = 1.0;
    double sar_amp = 1.0;
    double flower_shift = 0.0;
    double flower_ndvi_amp = 0.0;
    double shade = 0.0;
    bool soil = false;
    bool offtype = false;
};

/// Noiseless template value for a feature at day-of-season t under a
/// population transform.
inline double template_value(const SeasonModel& model, const SeasonModel& offtype,
                             const PopulationTransform& tr, IndexKind kind, double t) {
    const SeasonModel& src = tr.offtype ? offtype : model;
    if (tr.soil) return src.soil.at(kind);
    const double ts = t - tr.time_shift;

    double v;
    if (is_sar_kind(kind)) {
        SarGrowthParams p = src.sar.at(kind);
        p.midpoint += tr.t1_shift;
        v = p.base + tr.sar_amp * p.amplitude /
                         (1.0 + std::exp(-p.steepness * (ts - p.midpoint)));
        return v;
    }

    DoubleLogisticParams p = src.vi.at(kind);
    p.t1 += tr.t1_shift;
    p.t2 += tr.t2_shift;
    const double rise = 1.0 / (1.0 + std::exp(-p.k1 * (ts - p.t1)));
    const double fall = 1.0 / (1.0 + std::exp(-p.k2 * (ts - p.t2)));
    v = p.v_min + tr.vi_amp * (p.v_max - p.v_min) * (rise - fall);

    const double flower_center = src.flower_center + tr.flower_shift;
    const double fx = (ts - flower_center) / src.flower_sigma;
    const double bump = std::exp(-0.5 * fx * fx);
    auto fa = src.flower_amp.find(kind);
    if (fa != src.flower_amp.end()) v += fa->second * bump;
    if (kind == IndexKind::NDVI) v += tr.flower_ndvi_amp * bump;

    if (tr.shade > 0.0) v += tr.shade * (src.soil.at(kind) - v);
    return v;
}

inline float clamp_feature(IndexKind kind, double v) {
    switch (kind) {
        case IndexKind::NDVI:
        case IndexKind::NDWI_SWIR:
        case IndexKind::NDWI_GREEN:
        case IndexKind::GRVI:
            return static_cast<float>(std::clamp(v, -0.999, 0.999));
        case IndexKind::MCARI_OSAVI:
            return static_cast<float>(std::clamp(v, -5.0, 5.0));
        default:  // linear power stays positive
            return static_cast<float>(std::max(v, 1e-5));
    }
}

}  // namespace detail

/// Feature kinds the generator materializes (the ratio features derive from
/// VH/VV downstream and are not emitted).
inline constexpr IndexKind kGeneratedS2Kinds[] = {
    IndexKind::NDVI, IndexKind::NDWI_SWIR, IndexKind::NDWI_GREEN, IndexKind::MCARI_OSAVI,
    IndexKind::GRVI,
};
inline constexpr IndexKind kGeneratedSarKinds[] = {IndexKind::GAMMA0_VH, IndexKind::GAMMA0_VV};

/// One parcel's generated values: per (date, kind), samples parallel to the
/// pixel list of `pixels`.
struct ParcelPatch {
    AnomalyCategory label = AnomalyCategory::NORMAL_CHECKED;
    std::map<std::pair<Date, IndexKind>, std::vector<float>> values;
};

/// Draws the full multi-date patch for one parcel. Deterministic in `seed`;
/// the draw order is fixed (populations, spike factors, parcel effects, then
/// pixel noise by date/kind/pixel), so identical seeds give identical bytes.
inline ParcelPatch generate_parcel_series(const SeasonModel& model, const SeasonModel& offtype,
                                          const AnomalySpec& spec, const std::vector<Date>& s1_dates,
                                          const std::vector<Date>& s2_dates, const PixelSet& pixels,
                                          const Date& season_start, std::uint64_t seed) {
    using detail::PopulationTransform;
    const std::size_t n_px = pixels.pixels.size();
    if (n_px == 0 && spec.category != AnomalyCategory::TOO_SMALL) {
        throw std::invalid_argument("parcel geometry rasterized to zero pixels");
    }
    Rng rng(seed);

    // pixel populations: 0 = main, 1/2 = altered
    std::vector<std::uint8_t> pop(n_px, 0);
    PopulationTransform main_tr, alt_a, alt_b;
    switch (spec.category) {
        case AnomalyCategory::HETEROGENEITY: {
            alt_a.time_shift = spec.part_time_shift;
            alt_a.vi_amp = spec.part_vi_amplitude;
            alt_a.sar_amp = spec.part_sar_amplitude;
            alt_b.time_shift = -0.8 * spec.part_time_shift;
            alt_b.vi_amp = 2.0 - spec.part_vi_amplitude;  // mirrored deviation
            alt_b.sar_amp = 2.0 - spec.part_sar_amplitude;
            for (std::size_t i = 0; i < n_px; ++i) {
                const double u = rng.uniform01();
                if (u < spec.fraction * 0.5) {
                    pop[i] = 1;
                } else if (u < spec.fraction) {
                    pop[i] = 2;
                }
            }
            break;
        }
        case AnomalyCategory::HETEROGENEITY_AFTER_SENESCENCE:
        case AnomalyCategory::EARLY_HETEROGENEITY: {
            const bool early = spec.category == AnomalyCategory::EARLY_HETEROGENEITY;
            if (early) {
                alt_a.t1_shift = spec.part_t1_shift;
                alt_b.t1_shift = -0.7 * spec.part_t1_shift;
            } else {
                alt_a.t2_shift = spec.part_t2_shift;
                alt_b.t2_shift = -0.7 * spec.part_t2_shift;
            }
            for (std::size_t i = 0; i < n_px; ++i) {
                const double u = rng.uniform01();
                if (u < spec.fraction * 0.5) {
                    pop[i] = 1;
                } else if (u < spec.fraction) {
                    pop[i] = 2;
                }
            }
            break;
        }
        case AnomalyCategory::HETEROGENEITY_TWO_PARTS: {
            alt_a.time_shift = spec.part_time_shift;
            alt_a.vi_amp = spec.part_vi_amplitude;
            alt_a.sar_amp = spec.part_sar_amplitude;
            std::int32_t cmin = pixels.pixels.empty() ? 0 : pixels.pixels[0].col, cmax = cmin;
            for (const auto& p : pixels.pixels) {
                cmin = std::min(cmin, p.col);
                cmax = std::max(cmax, p.col);
            }
            const std::int32_t split = cmin + (cmax - cmin) / 2;
            for (std::size_t i = 0; i < n_px; ++i) {
                if (pixels.pixels[i].col > split) pop[i] = 1;
            }
            break;
        }
        case AnomalyCategory::WRONG_SHAPE: {
            alt_a.soil = true;
            std::int32_t cmin = pixels.pixels.empty() ? 0 : pixels.pixels[0].col, cmax = cmin;
            for (const auto& p : pixels.pixels) {
                cmin = std::min(cmin, p.col);
                cmax = std::max(cmax, p.col);
            }
            const double cut = cmax - spec.fraction * (cmax - cmin + 1);
            for (std::size_t i = 0; i < n_px; ++i) {
                if (pixels.pixels[i].col > cut) pop[i] = 1;
            }
            break;
        }
        case AnomalyCategory::SHADOW: {
            alt_a.shade = spec.shade;
            std::int32_t rmin = pixels.pixels.empty() ? 0 : pixels.pixels[0].row, rmax = rmin;
            std::int32_t cmin = pixels.pixels.empty() ? 0 : pixels.pixels[0].col, cmax = cmin;
            for (const auto& p : pixels.pixels) {
                rmin = std::min(rmin, p.row);
                rmax = std::max(rmax, p.row);
                cmin = std::min(cmin, p.col);
                cmax = std::max(cmax, p.col);
            }
            const double side = std::sqrt(spec.fraction);
            const double rcut = rmax - side * (rmax - rmin + 1);
            const double ccut = cmax - side * (cmax - cmin + 1);
            for (std::size_t i = 0; i < n_px; ++i) {
                if (pixels.pixels[i].row > rcut && pixels.pixels[i].col > ccut) pop[i] = 1;
            }
            break;
        }
        case AnomalyCategory::LATE_GROWTH:
            main_tr.time_shift = spec.time_shift_days;
            main_tr.sar_amp = spec.sar_amplitude;
            main_tr.vi_amp = spec.vi_amplitude;
            break;
        case AnomalyCategory::VIGOROUS_CROP:
            main_tr.time_shift = spec.time_shift_days;
            main_tr.vi_amp = spec.vi_amplitude;
            main_tr.sar_amp = spec.sar_amplitude;
            break;
        case AnomalyCategory::EARLY_FLOWERING:
            main_tr.flower_shift = spec.flower_shift_days;
            main_tr.flower_ndvi_amp = spec.flower_ndvi_dip;
            break;
        case AnomalyCategory::EARLY_SENESCENCE:
        case AnomalyCategory::LATE_SENESCENCE:
            main_tr.t2_shift = spec.t2_shift_days;
            break;
        case AnomalyCategory::WRONG_TYPE:
            main_tr.offtype = true;
            break;
        default:
            break;
    }

    // SAR flashing factors for the early-season dates, drawn per date
    std::vector<Date> s1_sorted = s1_dates;
    std::sort(s1_sorted.begin(), s1_sorted.end());
    std::map<Date, double> spike;
    if (spec.category == AnomalyCategory::SAR_ANOMALY) {
        const double early_end = model.vi.at(IndexKind::NDVI).t1 + 5.0;
        for (const Date& d : s1_sorted) {
            const double t = static_cast<double>(days_between(season_start, d));
            if (t < early_end) {
                spike[d] = rng.uniform(spec.spike_min, spec.spike_max);
            }
        }
    }

    // parcel-level random effects, one per feature
    std::map<IndexKind, double> vi_offset;
    std::map<IndexKind, double> sar_factor;
    for (IndexKind k : kGeneratedS2Kinds) {
        vi_offset[k] = rng.normal(0.0, model.vi_parcel_noise);
    }
    for (IndexKind k : kGeneratedSarKinds) {
        sar_factor[k] = std::exp(rng.normal(0.0, model.sar_parcel_log_noise));
    }

    const PopulationTransform* transforms[3] = {&main_tr, &alt_a, &alt_b};

    ParcelPatch patch;
    patch.label = spec.category;
    std::vector<Date> s2_sorted = s2_dates;
    std::sort(s2_sorted.begin(), s2_sorted.end());
    for (const Date& d : s2_sorted) {
        const double t = static_cast<double>(days_between(season_start, d));
        for (IndexKind k : kGeneratedS2Kinds) {
            double tmpl[3];
            for (int p = 0; p < 3; ++p) {
                tmpl[p] = detail::template_value(model, offtype, *transforms[p], k, t);
            }
            auto& out = patch.values[{d, k}];
            out.resize(n_px);
            for (std::size_t i = 0; i < n_px; ++i) {
                const double v =
                    tmpl[pop[i]] + vi_offset[k] + rng.normal(0.0, model.vi_pixel_noise);
                out[i] = detail::clamp_feature(k, v);
            }
        }
    }
    for (const Date& d : s1_sorted) {
        const double t = static_cast<double>(days_between(season_start, d));
        const double spike_factor = spike.count(d) ? spike[d] : 1.0;
        for (IndexKind k : kGeneratedSarKinds) {
            double tmpl[3];
            for (int p = 0; p < 3; ++p) {
                tmpl[p] = detail::template_value(model, offtype, *transforms[p], k, t);
            }
            auto& out = patch.values[{d, k}];
            out.resize(n_px);
            for (std::size_t i = 0; i < n_px; ++i) {
                const double v = tmpl[pop[i]] * sar_factor[k] * spike_factor *
                                 std::exp(rng.normal(0.0, model.sar_pixel_log_noise));
                out[i] = detail::clamp_feature(k, v);
            }
        }
    }
    return patch;
}

// --- whole-scene generation ---------------------------------------------------

struct SynthConfig {
    std::size_t n_parcels = 500;
    std::int32_t grid_width = 0;   // 0: size the grid to fit the parcel layout
    std::int32_t grid_height = 0;
    std::int32_t parcel_px = 10;   // nominal parcel side, pixels
    std::vector<Date> s1_dates;    // empty: 40 dates at ~6.5-day cadence
    std::vector<Date> s2_dates;    // empty: 13 dates at 21-day cadence
    std::map<AnomalyCategory, double> anomaly_mix;  // category -> parcel fraction
    std::map<AnomalyCategory, AnomalySpec> spec_overrides;
    std::uint64_t seed = 0;
    bool inject_clouds = false;
    double cloud_date_fraction = 0.3;
    Date season_start{2017, 10, 1};

    void fill_default_dates() {
        if (s1_dates.empty()) {
            for (int i = 0; i < 40; ++i) {
                const int day = 4 + (i * 252) / 39;
                s1_dates.push_back(season_start.plus_days(day));
            }
        }
        if (s2_dates.empty()) {
            for (int i = 0; i < 13; ++i) s2_dates.push_back(season_start.plus_days(10 + 21 * i));
        }
    }
};

/// Everything a generated scene contains, in memory. SAR features are
/// emitted as VH/VV band grids (they double as the gamma0 features); the
/// multispectral features are emitted directly as feature grids.
struct SynthScene {
    GridMeta meta;
    std::vector<ParcelRecord> parcels;
    LabelSet labels;
    std::vector<BandGrid> sar_grids;
    std::vector<FeatureGrid> s2_grids;
    std::vector<BandGrid> cloud_masks;   // per S2 date when clouds are injected
    std::vector<BandGrid> shadow_masks;
    std::vector<Date> s1_dates, s2_dates;
    Date season_start;
    nlohmann::json manifest;
};

namespace detail {

inline std::string parcel_id_for(std::size_t idx) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "P%05zu", idx);
    return buf;
}

}  // namespace detail

/// Lays out spatially disjoint parcels on a fixed lattice, assigns anomaly
/// categories per the mix (exact deterministic counts), and draws every
/// pixel value. Byte-identical for a fixed seed, whatever the thread count.
inline SynthScene generate_scene(const SynthConfig& config_in) {
    SynthConfig config = config_in;
    config.fill_default_dates();
    if (config.n_parcels == 0) throw std::invalid_argument("n_parcels must be positive");
    if (config.parcel_px < 3) throw std::invalid_argument("parcel_px must be at least 3");

    double mix_total = 0.0;
    for (const auto& [cat, frac] : config.anomaly_mix) {
        if (frac < 0.0) throw std::invalid_argument("negative anomaly fraction");
        mix_total += frac;
    }
    if (mix_total > 1.0 + 1e-12) throw std::invalid_argument("anomaly mix sums beyond 1");

    // lattice layout with a 2-pixel gap between parcels
    const auto cells = static_cast<std::int32_t>(
        std::ceil(std::sqrt(static_cast<double>(config.n_parcels))));
    const std::int32_t stride = config.parcel_px + 2;
    const std::int32_t needed = 4 + (cells - 1) * stride + config.parcel_px;
    std::int32_t width = config.grid_width > 0 ? config.grid_width : needed;
    std::int32_t height = config.grid_height > 0 ? config.grid_height : needed;
    if (width < needed || height < needed) {
        throw std::invalid_argument("grid too small for parcel count: need at least " +
                                    std::to_string(needed) + " pixels per side");
    }

    SynthScene scene;
    scene.meta = GridMeta{width, height, 10.0, 0.0, height * 10.0, -9999.0f};
    scene.s1_dates = config.s1_dates;
    scene.s2_dates = config.s2_dates;
    scene.season_start = config.season_start;
    std::sort(scene.s1_dates.begin(), scene.s1_dates.end());
    std::sort(scene.s2_dates.begin(), scene.s2_dates.end());

    // category assignment: exact counts, seeded permutation
    std::vector<AnomalyCategory> assignment(config.n_parcels, AnomalyCategory::NORMAL_CHECKED);
    {
        std::vector<std::size_t> perm(config.n_parcels);
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        Rng rng(mix_seed(config.seed, 0xA55));
        rng.shuffle(perm);
        std::size_t cursor = 0;
        for (AnomalyCategory cat : kAllCategories) {
            auto it = config.anomaly_mix.find(cat);
            if (it == config.anomaly_mix.end()) continue;
            const auto count = static_cast<std::size_t>(
                std::llround(it->second * static_cast<double>(config.n_parcels)));
            if (cursor + count > config.n_parcels) {
                throw std::invalid_argument("anomaly mix exceeds the parcel count");
            }
            for (std::size_t j = 0; j < count; ++j) assignment[perm[cursor++]] = cat;
        }
    }

    // blank grids, nodata background
    for (const Date& d : scene.s1_dates) {
        for (BandRole role : {BandRole::VH, BandRole::VV}) {
            scene.sar_grids.push_back(make_constant_grid(scene.meta, d, role, scene.meta.nodata));
        }
    }
    for (const Date& d : scene.s2_dates) {
        for (IndexKind k : kGeneratedS2Kinds) {
            scene.s2_grids.push_back(
                FeatureGrid{scene.meta, d, k,
                            std::vector<float>(scene.meta.cells(), scene.meta.nodata)});
        }
    }

    const SeasonModel model = rapeseed_model();
    const SeasonModel offtype = offtype_model();
    scene.parcels.resize(config.n_parcels);

    parallel_units(config.n_parcels, [&](std::size_t idx) {
        const AnomalyCategory cat = assignment[idx];
        Rng geo_rng(mix_seed(config.seed, 0x50000 + idx));
        const auto gr = static_cast<std::int32_t>(idx) / cells;
        const auto gc = static_cast<std::int32_t>(idx) % cells;
        const std::int32_t side = cat == AnomalyCategory::TOO_SMALL ? 7 : config.parcel_px;
        const double ps = scene.meta.pixel_size;
        const double x0 = (2 + gc * stride) * ps;
        const double y_top = scene.meta.origin_y - (2 + gr * stride) * ps;
        const double x1 = x0 + side * ps;
        const double y_bot = y_top - side * ps;
        // one jittered vertex keeps the point-in-polygon path honest
        const double jx = geo_rng.uniform(0.0, 0.8) * ps;
        const double jy = geo_rng.uniform(0.0, 0.8) * ps;

        ParcelRecord rec;
        rec.polygon.id = detail::parcel_id_for(idx);
        rec.polygon.crop_type = model.crop_type;  // declared type, even when wrong
        rec.polygon.rings = {{{x0 + jx, y_bot + jy}, {x1, y_bot}, {x1, y_top}, {x0, y_top}}};
        rec.label = category_name(cat);

        const PixelSet pixels = rasterize_polygon(rec.polygon, scene.meta);
        AnomalySpec spec = AnomalySpec::defaults(cat);
        auto ov = config.spec_overrides.find(cat);
        if (ov != config.spec_overrides.end()) spec = ov->second;
        const ParcelPatch patch =
            generate_parcel_series(model, offtype, spec, scene.s1_dates, scene.s2_dates, pixels,
                                   scene.season_start, mix_seed(config.seed, 0x90000 + idx));

        // scatter the patch into the shared grids (parcels are disjoint)
        for (auto& grid : scene.sar_grids) {
            const IndexKind k =
                grid.role == BandRole::VH ? IndexKind::GAMMA0_VH : IndexKind::GAMMA0_VV;
            const auto& vals = patch.values.at({grid.date, k});
            for (std::size_t i = 0; i < pixels.pixels.size(); ++i) {
                grid.at(pixels.pixels[i].row, pixels.pixels[i].col) = vals[i];
            }
        }
        for (auto& grid : scene.s2_grids) {
            const auto& vals = patch.values.at({grid.date, grid.kind});
            for (std::size_t i = 0; i < pixels.pixels.size(); ++i) {
                grid.at(pixels.pixels[i].row, pixels.pixels[i].col) = vals[i];
            }
        }
        scene.parcels[idx] = std::move(rec);
    });

    for (std::size_t idx = 0; idx < config.n_parcels; ++idx) {
        scene.labels[scene.parcels[idx].polygon.id] = assignment[idx];
    }

    if (config.inject_clouds) {
        Rng rng(mix_seed(config.seed, 0xC10));
        for (const Date& d : scene.s2_dates) {
            BandGrid cloud = make_constant_grid(scene.meta, d, BandRole::CLOUD_MASK, 0.0f);
            BandGrid shadow = make_constant_grid(scene.meta, d, BandRole::SHADOW_MASK, 0.0f);
            if (rng.uniform01() < config.cloud_date_fraction) {
                const int n_fields = 1 + static_cast<int>(rng.uniform_index(3));
                for (int f = 0; f < n_fields; ++f) {
                    const auto cw = static_cast<std::int32_t>(width * rng.uniform(0.08, 0.30));
                    const auto ch = static_cast<std::int32_t>(height * rng.uniform(0.08, 0.30));
                    const auto cx = static_cast<std::int32_t>(rng.uniform_index(
                        static_cast<std::size_t>(std::max(1, width - cw))));
                    const auto cy = static_cast<std::int32_t>(rng.uniform_index(
                        static_cast<std::size_t>(std::max(1, height - ch))));
                    for (std::int32_t r = cy; r < cy + ch; ++r) {
                        for (std::int32_t c = cx; c < cx + cw; ++c) cloud.at(r, c) = 1.0f;
                    }
                    // shadow trails the cloud field, offset south-east
                    const std::int32_t so = std::max<std::int32_t>(2, ch / 4);
                    for (std::int32_t r = cy + so; r < std::min(height, cy + ch + so); ++r) {
                        for (std::int32_t c = cx + so; c < std::min(width, cx + cw + so); ++c) {
                            if (cloud.at(r, c) == 0.0f) shadow.at(r, c) = 1.0f;
                        }
                    }
                }
            }
            scene.cloud_masks.push_back(std::move(cloud));
            scene.shadow_masks.push_back(std::move(shadow));
        }
    }

    // manifest: config echo + intensity constants + per-parcel labels
    nlohmann::json mix = nlohmann::json::object();
    for (const auto& [cat, frac] : config.anomaly_mix) mix[category_name(cat)] = frac;
    nlohmann::json specs = nlohmann::json::object();
    for (AnomalyCategory cat : kAllCategories) {
        AnomalySpec spec = AnomalySpec::defaults(cat);
        auto ov = config.spec_overrides.find(cat);
        if (ov != config.spec_overrides.end()) spec = ov->second;
        specs[category_name(cat)] = spec.to_json();
    }
    nlohmann::json labels_json = nlohmann::json::object();
    for (const auto& [id, cat] : scene.labels) labels_json[id] = category_name(cat);
    nlohmann::json dates_s1 = nlohmann::json::array(), dates_s2 = nlohmann::json::array();
    for (const Date& d : scene.s1_dates) dates_s1.push_back(d.to_string());
    for (const Date& d : scene.s2_dates) dates_s2.push_back(d.to_string());
    scene.manifest = {{"n_parcels", config.n_parcels},
                      {"seed", config.seed},
                      {"grid", {{"width", width}, {"height", height}, {"pixel_size_m", 10.0}}},
                      {"parcel_px", config.parcel_px},
                      {"season_start", config.season_start.to_string()},
                      {"s1_dates", dates_s1},
                      {"s2_dates", dates_s2},
                      {"anomaly_mix", mix},
                      {"category_specs", specs},
                      {"inject_clouds", config.inject_clouds},
                      {"labels", labels_json}};
    return scene;
}

/// Writes a scene in the pipeline's input layout: one .grid/.hdr.json pair
/// per (date, feature), a parcels.geojson with labels, and manifest.json.
inline void write_scene(const SynthScene& scene, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& g : scene.sar_grids) {
        const std::string name =
            std::string("s1_") + g.date.to_string() + "_" + band_role_name(g.role) + ".grid";
        save_band_grid(dir / name, g);
    }
    for (const auto& g : scene.s2_grids) {
        const std::string name =
            std::string("s2_") + g.date.to_string() + "_" + index_kind_name(g.kind) + ".grid";
        save_feature_grid(dir / name, g);
    }
    for (const auto& g : scene.cloud_masks) {
        save_band_grid(dir / (std::string("mask_") + g.date.to_string() + "_CLOUD_MASK.grid"), g);
    }
    for (const auto& g : scene.shadow_masks) {
        save_band_grid(dir / (std::string("mask_") + g.date.to_string() + "_SHADOW_MASK.grid"), g);
    }
    save_parcels_geojson(dir / "parcels.geojson", scene.parcels);
    std::ofstream mf(dir / "manifest.json");
    if (!mf) throw std::runtime_error("cannot write scene manifest");
    mf << scene.manifest.dump(2) << "\n";
}

}  // namespace fieldscan
