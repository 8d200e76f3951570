#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldscan/feature_matrix.hpp"

namespace fieldscan {

/// Per-parcel anomaly scores from one detector run. All algorithms are
/// canonicalized to "higher = more anomalous" so one ranking routine serves
/// every detector.
struct ScoreVector {
    std::vector<std::string> parcel_ids;
    std::vector<double> scores;
    std::string algorithm;
    nlohmann::json parameters;
    std::uint64_t seed = 0;
    std::string matrix_fingerprint;

    [[nodiscard]] std::size_t size() const { return scores.size(); }

    void validate() const {
        if (parcel_ids.size() != scores.size()) {
            throw std::logic_error("score vector id/score length mismatch");
        }
        for (double s : scores) {
            if (!std::isfinite(s)) throw std::runtime_error("non-finite score in " + algorithm);
        }
    }
};

/// Row indices ordered by (score desc, parcel id asc). The id tiebreak makes
/// rankings deterministic when scores collide.
inline std::vector<std::size_t> score_order(const ScoreVector& sv) {
    std::vector<std::size_t> order(sv.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sv.scores[a] != sv.scores[b]) return sv.scores[a] > sv.scores[b];
        return sv.parcel_ids[a] < sv.parcel_ids[b];
    });
    return order;
}

/// The ceil(ratio*n) highest-scoring parcel ids, most anomalous first.
inline std::vector<std::string> rank_outliers(const ScoreVector& sv, double outlier_ratio) {
    if (!(outlier_ratio > 0.0) || outlier_ratio > 1.0) {
        throw std::invalid_argument("outlier ratio must lie in (0, 1]");
    }
    const auto order = score_order(sv);
    const std::size_t take = static_cast<std::size_t>(
        std::ceil(outlier_ratio * static_cast<double>(sv.size()) - 1e-9));
    std::vector<std::string> detected;
    detected.reserve(take);
    for (std::size_t i = 0; i < take && i < order.size(); ++i) {
        detected.push_back(sv.parcel_ids[order[i]]);
    }
    return detected;
}

inline void save_scores_csv(const std::filesystem::path& path, const ScoreVector& sv,
                            const std::string& comment = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "parcel_id,score,rank\n";
    const auto order = score_order(sv);
    std::vector<std::size_t> rank(sv.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
    char buf[64];
    for (std::size_t i = 0; i < sv.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", sv.scores[i]);
        out << sv.parcel_ids[i] << ',' << buf << ',' << rank[i] << "\n";
    }
}

inline ScoreVector load_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    ScoreVector sv;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string id, score_s, rank_s;
        if (!std::getline(ss, id, ',') || !std::getline(ss, score_s, ',') ||
            !std::getline(ss, rank_s)) {
            throw std::runtime_error("malformed score row: " + line);
        }
        sv.parcel_ids.push_back(id);
        sv.scores.push_back(std::stod(score_s));
    }
    return sv;
}

/// Run provenance: what produced a score file.
inline nlohmann::json score_manifest(const ScoreVector& sv) {
    return nlohmann::json{{"algorithm", sv.algorithm},
                          {"parameters", sv.parameters},
                          {"seed", sv.seed},
                          {"matrix_fingerprint", sv.matrix_fingerprint}};
}

}  // namespace fieldscan
