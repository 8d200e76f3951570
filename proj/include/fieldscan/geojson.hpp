#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldscan/parcel.hpp"

namespace fieldscan {

/// Parcel records as stored in the GeoJSON FeatureCollection. `label` is the
/// optional ground-truth anomaly category consumed by evaluation.
struct ParcelRecord {
    ParcelPolygon polygon;
    std::string label;  // empty = unlabeled
};

inline std::vector<ParcelRecord> load_parcels_geojson(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid GeoJSON in " + path.string() + ": " + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection") {
        throw std::runtime_error(path.string() + ": expected a FeatureCollection");
    }

    std::vector<ParcelRecord> out;
    for (const auto& feature : doc.at("features")) {
        const auto& geom = feature.at("geometry");
        if (geom.value("type", "") != "Polygon") {
            throw std::runtime_error(path.string() + ": only Polygon geometries are supported");
        }
        ParcelRecord rec;
        const auto& props = feature.at("properties");
        rec.polygon.id = props.at("id").get<std::string>();
        rec.polygon.crop_type = props.value("crop_type", "");
        rec.label = props.value("label", "");
        for (const auto& ring_json : geom.at("coordinates")) {
            Ring ring;
            for (const auto& coord : ring_json) {
                ring.push_back({coord.at(0).get<double>(), coord.at(1).get<double>()});
            }
            // GeoJSON repeats the first vertex at the end; we keep rings open
            if (ring.size() >= 2 && ring.front().x == ring.back().x &&
                ring.front().y == ring.back().y) {
                ring.pop_back();
            }
            rec.polygon.rings.push_back(std::move(ring));
        }
        if (rec.polygon.rings.empty()) {
            throw std::runtime_error(path.string() + ": parcel '" + rec.polygon.id + "' has no rings");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

inline void save_parcels_geojson(const std::filesystem::path& path,
                                 const std::vector<ParcelRecord>& parcels) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& rec : parcels) {
        nlohmann::json rings = nlohmann::json::array();
        for (const auto& ring : rec.polygon.rings) {
            nlohmann::json coords = nlohmann::json::array();
            for (const auto& p : ring) coords.push_back({p.x, p.y});
            if (!ring.empty()) coords.push_back({ring.front().x, ring.front().y});
            rings.push_back(coords);
        }
        nlohmann::json props{{"id", rec.polygon.id}, {"crop_type", rec.polygon.crop_type}};
        if (!rec.label.empty()) props["label"] = rec.label;
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}},
                            {"properties", props}});
    }
    nlohmann::json doc{{"type", "FeatureCollection"}, {"features", features}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

}  // namespace fieldscan
