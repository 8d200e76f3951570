#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldscan/grid.hpp"

namespace fieldscan {

static_assert(std::endian::native == std::endian::little,
              "grid payloads are little-endian f32; big-endian hosts are unsupported");

/// On-disk form: `<stem>.grid` holds raw little-endian f32 samples in
/// row-major order; `<stem>.hdr.json` carries the geometry and band metadata.
struct RawGrid {
    GridMeta meta;
    Date date;
    std::string role;  // a BandRole name or an IndexKind name
    std::vector<float> values;
};

inline std::filesystem::path header_path_for(const std::filesystem::path& grid_path) {
    std::filesystem::path p = grid_path;
    p.replace_extension();  // drop ".grid"
    p += ".hdr.json";
    return p;
}

inline void save_raw_grid(const std::filesystem::path& grid_path, const RawGrid& g) {
    if (g.values.size() != g.meta.cells()) {
        throw std::invalid_argument("payload length does not match header dimensions");
    }
    nlohmann::json hdr{
        {"width", g.meta.width},
        {"height", g.meta.height},
        {"pixel_size_m", g.meta.pixel_size},
        {"origin_x", g.meta.origin_x},
        {"origin_y", g.meta.origin_y},
        {"band_role", g.role},
        {"date", g.date.to_string()},
        {"nodata", g.meta.nodata},
    };
    std::ofstream hout(header_path_for(grid_path));
    if (!hout) throw std::runtime_error("cannot write " + header_path_for(grid_path).string());
    hout << hdr.dump(2) << "\n";
    hout.close();

    std::ofstream out(grid_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + grid_path.string());
    out.write(reinterpret_cast<const char*>(g.values.data()),
              static_cast<std::streamsize>(g.values.size() * sizeof(float)));
    if (!out) throw std::runtime_error("short write to " + grid_path.string());
}

inline RawGrid load_raw_grid(const std::filesystem::path& grid_path) {
    const auto hdr_path = header_path_for(grid_path);
    std::ifstream hin(hdr_path);
    if (!hin) throw std::runtime_error("missing header " + hdr_path.string());
    nlohmann::json hdr;
    try {
        hin >> hdr;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("corrupt header " + hdr_path.string() + ": " + e.what());
    }

    RawGrid g;
    try {
        g.meta.width = hdr.at("width").get<std::int32_t>();
        g.meta.height = hdr.at("height").get<std::int32_t>();
        g.meta.pixel_size = hdr.at("pixel_size_m").get<double>();
        g.meta.origin_x = hdr.at("origin_x").get<double>();
        g.meta.origin_y = hdr.at("origin_y").get<double>();
        g.role = hdr.at("band_role").get<std::string>();
        g.date = Date::parse(hdr.at("date").get<std::string>());
        g.meta.nodata = hdr.at("nodata").get<float>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("corrupt header " + hdr_path.string() + ": " + e.what());
    }
    g.meta.validate();

    std::ifstream in(grid_path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("missing payload " + grid_path.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != g.meta.cells() * sizeof(float)) {
        throw std::runtime_error("payload length mismatch in " + grid_path.string() + ": header says " +
                                 std::to_string(g.meta.cells()) + " samples, file holds " +
                                 std::to_string(bytes / sizeof(float)));
    }
    g.values.resize(g.meta.cells());
    in.seekg(0);
    in.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw std::runtime_error("short read from " + grid_path.string());
    return g;
}

inline BandGrid load_band_grid(const std::filesystem::path& grid_path) {
    RawGrid raw = load_raw_grid(grid_path);
    BandRole role;
    if (!parse_band_role(raw.role, role)) {
        throw std::runtime_error("unknown band_role '" + raw.role + "' in " + grid_path.string());
    }
    BandGrid g{raw.meta, raw.date, role, std::move(raw.values)};
    g.validate();
    return g;
}

inline void save_band_grid(const std::filesystem::path& grid_path, const BandGrid& g) {
    save_raw_grid(grid_path, RawGrid{g.meta, g.date, band_role_name(g.role), g.values});
}

}  // namespace fieldscan
