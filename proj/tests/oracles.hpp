// Independent reference implementations used as test oracles. These
// deliberately avoid the library's traversal and scoring code paths:
// queue-based BFS instead of stack scans, straight double loops instead
// of fused sweeps, and a from-scratch metric for subset enumeration.
#pragma once

#include <cmath>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "kpbms/bbox.hpp"
#include "kpbms/image.hpp"
#include "kpbms/saliency.hpp"

namespace oracles {

using kpbms::AttentionMap;
using kpbms::BinaryMap;
using kpbms::BoundingBox;
using kpbms::Connectivity;
using kpbms::GrayImage;
using kpbms::Keypoint;
using kpbms::KeypointSet;

inline std::vector<std::pair<int, int>> offsets(Connectivity c) {
    std::vector<std::pair<int, int>> out = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
    if (c == Connectivity::eight) {
        out.push_back({1, 1});
        out.push_back({1, -1});
        out.push_back({-1, 1});
        out.push_back({-1, -1});
    }
    return out;
}

// Breadth-first region growing from one seed.
inline BinaryMap flood_bfs(const BinaryMap& map, int sx, int sy, Connectivity c) {
    BinaryMap out(map.width(), map.height());
    if (!map.at(sx, sy)) return out;
    const auto offs = offsets(c);
    std::queue<std::pair<int, int>> frontier;
    frontier.push({sx, sy});
    out.set(sx, sy, true);
    while (!frontier.empty()) {
        auto [x, y] = frontier.front();
        frontier.pop();
        for (auto [dx, dy] : offs) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || nx >= map.width() || ny < 0 || ny >= map.height())
                continue;
            if (!map.at(nx, ny) || out.at(nx, ny)) continue;
            out.set(nx, ny, true);
            frontier.push({nx, ny});
        }
    }
    return out;
}

// Floods from every active border pixel and keeps what was never reached.
inline BinaryMap border_suppress(const BinaryMap& map, Connectivity c) {
    BinaryMap reached(map.width(), map.height());
    const auto offs = offsets(c);
    std::queue<std::pair<int, int>> frontier;
    auto seed = [&](int x, int y) {
        if (map.at(x, y) && !reached.at(x, y)) {
            reached.set(x, y, true);
            frontier.push({x, y});
        }
    };
    for (int x = 0; x < map.width(); ++x) {
        seed(x, 0);
        seed(x, map.height() - 1);
    }
    for (int y = 0; y < map.height(); ++y) {
        seed(0, y);
        seed(map.width() - 1, y);
    }
    while (!frontier.empty()) {
        auto [x, y] = frontier.front();
        frontier.pop();
        for (auto [dx, dy] : offs) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || nx >= map.width() || ny < 0 || ny >= map.height())
                continue;
            seed(nx, ny);
        }
    }
    BinaryMap out(map.width(), map.height());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
            out.set(x, y, map.at(x, y) && !reached.at(x, y));
    return out;
}

inline AttentionMap mean_naive(const std::vector<AttentionMap>& maps, int n) {
    AttentionMap out(maps.front().width(), maps.front().height());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            double sum = 0.0;
            for (const auto& m : maps) sum += m.at(x, y);
            out.set(x, y, sum / n);
        }
    }
    return out;
}

// Mean attention composed step by step from the library's four primitive
// operations, for checking the fused pipeline.
inline AttentionMap composed_saliency(const GrayImage& image,
                                      const std::vector<Keypoint>& seeds,
                                      const std::vector<double>& thresholds,
                                      Connectivity c) {
    std::vector<AttentionMap> maps;
    for (double theta : thresholds) {
        const BinaryMap boolean = kpbms::threshold(image, theta);
        BinaryMap activation(image.width(), image.height());
        for (const auto& kp : seeds) {
            const BinaryMap piece = kpbms::flood_fill(boolean, kp, c);
            for (int y = 0; y < activation.height(); ++y)
                for (int x = 0; x < activation.width(); ++x)
                    if (piece.at(x, y)) activation.set(x, y, true);
        }
        maps.push_back(kpbms::normalize_activation(activation));
    }
    return mean_naive(maps, static_cast<int>(thresholds.size()));
}

inline BinaryMap random_map(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution bit(density);
    BinaryMap map(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) map.set(x, y, bit(rng));
    return map;
}

// From-scratch scoring of a set of boxes against keypoints, following the
// event definitions directly.
struct MetricResult {
    double f = 0.0;
    double q = 1.0;
    double precision = 1.0;
    double recall = 1.0;
    double q_k = 1.0;
    double q_b = 1.0;
};

inline MetricResult score_boxes(const std::vector<BoundingBox>& boxes,
                                const KeypointSet& keypoints) {
    MetricResult r;
    std::size_t covered_keypoints = 0;
    double qb_sum = 0.0;
    for (const auto& kp : keypoints) {
        std::size_t n_covering = 0;
        for (const auto& box : boxes)
            if (box.contains(kp.x, kp.y)) ++n_covering;
        if (n_covering > 0) {
            ++covered_keypoints;
            qb_sum += 1.0 / static_cast<double>(n_covering);
        }
    }
    std::size_t covering_boxes = 0;
    std::size_t empty_boxes = 0;
    double qk_sum = 0.0;
    for (const auto& box : boxes) {
        std::size_t n_inside = 0;
        for (const auto& kp : keypoints)
            if (box.contains(kp.x, kp.y)) ++n_inside;
        if (n_inside > 0) {
            ++covering_boxes;
            qk_sum += 1.0 / static_cast<double>(n_inside);
        } else {
            ++empty_boxes;
        }
    }
    const double tp = static_cast<double>(covered_keypoints);
    const double fp = static_cast<double>(empty_boxes);
    const double fn = static_cast<double>(keypoints.size() - covered_keypoints);
    r.precision = (tp + fp) > 0 ? tp / (tp + fp) : 1.0;
    r.recall = (tp + fn) > 0 ? tp / (tp + fn) : 1.0;
    r.f = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall /
                                             (r.precision + r.recall)
                                       : 0.0;
    r.q_k = covering_boxes > 0 ? qk_sum / covering_boxes : 1.0;
    r.q_b = covered_keypoints > 0 ? qb_sum / covered_keypoints : 1.0;
    r.q = r.q_k * r.q_b;
    return r;
}

// Exhaustive enumeration over every subset of the (deduplicated) union of
// candidate boxes; returns the best (F, q) pair found.
inline std::pair<double, double> best_subset_score(
    const std::vector<std::vector<BoundingBox>>& candidates,
    const KeypointSet& keypoints) {
    std::vector<BoundingBox> pool;
    for (const auto& list : candidates) {
        for (const auto& box : list) {
            bool seen = false;
            for (const auto& existing : pool)
                if (kpbms::same_extent(existing, box)) {
                    seen = true;
                    break;
                }
            if (!seen) pool.push_back(box);
        }
    }
    double best_f = -1.0;
    double best_q = -1.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pool.size()); ++mask) {
        std::vector<BoundingBox> subset;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (mask & (std::uint64_t{1} << i)) subset.push_back(pool[i]);
        const MetricResult r = score_boxes(subset, keypoints);
        if (r.f > best_f || (r.f == best_f && r.q > best_q)) {
            best_f = r.f;
            best_q = r.q;
        }
    }
    return {best_f, best_q};
}

}  // namespace oracles
