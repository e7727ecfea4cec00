#include "kpbms/bbox.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace kpbms {

bool same_extent(const BoundingBox& a, const BoundingBox& b) {
    return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max &&
           a.y_max == b.y_max;
}

bool box_less(const BoundingBox& a, const BoundingBox& b) {
    return std::tie(a.y_min, a.x_min, a.y_max, a.x_max, a.cls) <
           std::tie(b.y_min, b.x_min, b.y_max, b.x_max, b.cls);
}

std::vector<BoundingBox> extract_blobs(const AttentionMap& attention,
                                       double blob_fraction,
                                       Connectivity connectivity) {
    if (!(blob_fraction > 0.0 && blob_fraction <= 1.0))
        throw std::invalid_argument("blob_fraction outside (0,1]");
    const double max = attention.max_value();
    std::vector<BoundingBox> boxes;
    if (max <= 0.0) return boxes;
    const double cut = blob_fraction * max;
    BinaryMap mask(attention.width(), attention.height());
    for (int y = 0; y < attention.height(); ++y)
        for (int x = 0; x < attention.width(); ++x)
            if (attention.at(x, y) >= cut) mask.set(x, y, true);
    for (const auto& component : connected_components(mask, connectivity)) {
        BoundingBox box;
        box.x_min = attention.width();
        box.y_min = attention.height();
        box.x_max = -1;
        box.y_max = -1;
        for (int y = 0; y < component.height(); ++y) {
            for (int x = 0; x < component.width(); ++x) {
                if (!component.at(x, y)) continue;
                box.x_min = std::min(box.x_min, x);
                box.y_min = std::min(box.y_min, y);
                box.x_max = std::max(box.x_max, x);
                box.y_max = std::max(box.y_max, y);
            }
        }
        boxes.push_back(std::move(box));
    }
    return boxes;
}

std::vector<std::vector<BoundingBox>> candidate_boxes(const GrayImage& image,
                                                      const KeypointSet& keypoints,
                                                      const SaliencyConfig& config,
                                                      const WarningSink& warn) {
    config.validate();
    std::vector<std::vector<BoundingBox>> candidates(keypoints.size());
    for (std::size_t j = 0; j < keypoints.size(); ++j) {
        const auto& kp = keypoints[j];
        const auto attention = saliency_for_keypoint(
            image, kp, config.with_stream(static_cast<std::uint64_t>(j)), warn);
        auto blobs =
            extract_blobs(attention, config.blob_fraction, config.connectivity);
        for (auto& box : blobs) {
            box.cls = kp.cls;
            box.source_keypoints = {static_cast<int>(j)};
        }
        if (blobs.empty() && warn)
            warn("keypoint " + std::to_string(j) + " at (" + std::to_string(kp.x) +
                 "," + std::to_string(kp.y) + ") produced no candidate boxes");
        candidates[j] = std::move(blobs);
    }
    return candidates;
}

namespace {

// One deduplicated candidate with its precomputed keypoint coverage.
struct MergedCandidate {
    BoundingBox box;
    std::vector<int> covered;  // keypoint indices inside the box
};

struct ComboScore {
    double f = 0.0;
    double q = 1.0;
    long long area = 0;

    bool better_than(const ComboScore& other) const {
        if (f != other.f) return f > other.f;
        if (q != other.q) return q > other.q;
        return area < other.area;
    }
};

// Scores candidate subsets with reusable scratch buffers. Counts and
// conventions mirror evaluate(): tp per covered keypoint, fp per box
// covering none, q_K over covering boxes, q_B over covered keypoints.
class ComboScorer {
public:
    ComboScorer(const std::vector<MergedCandidate>& merged, std::size_t n_keypoints)
        : merged_(merged),
          total_keypoints_(static_cast<long long>(n_keypoints)),
          cover_count_(n_keypoints, 0) {}

    ComboScore score(const std::vector<int>& chosen) {
        long long tp = 0;
        long long fp = 0;
        double qk_sum = 0.0;
        long long qk_n = 0;
        ComboScore result;
        for (int id : chosen) {
            const auto& entry = merged_[id];
            result.area += entry.box.area();
            if (entry.covered.empty()) {
                ++fp;
                continue;
            }
            qk_sum += 1.0 / static_cast<double>(entry.covered.size());
            ++qk_n;
            for (int k : entry.covered) {
                if (cover_count_[k]++ == 0) {
                    ++tp;
                    touched_.push_back(k);
                }
            }
        }
        double qb_sum = 0.0;
        for (int k : touched_) qb_sum += 1.0 / static_cast<double>(cover_count_[k]);
        const long long fn = total_keypoints_ - tp;
        const double precision =
            (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
        const double recall =
            (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
        result.f = (precision + recall) > 0.0
                       ? 2.0 * precision * recall / (precision + recall)
                       : 0.0;
        const double qk = qk_n > 0 ? qk_sum / static_cast<double>(qk_n) : 1.0;
        const double qb = touched_.empty()
                              ? 1.0
                              : qb_sum / static_cast<double>(touched_.size());
        result.q = qk * qb;
        for (int k : touched_) cover_count_[k] = 0;
        touched_.clear();
        return result;
    }

private:
    const std::vector<MergedCandidate>& merged_;
    long long total_keypoints_;
    std::vector<int> cover_count_;
    std::vector<int> touched_;
};

std::vector<MergedCandidate> merge_candidates(
    const std::vector<std::vector<BoundingBox>>& candidates,
    const KeypointSet& keypoints) {
    std::vector<MergedCandidate> merged;
    for (const auto& list : candidates) {
        for (const auto& box : list) {
            auto it = std::find_if(merged.begin(), merged.end(),
                                   [&](const MergedCandidate& m) {
                                       return same_extent(m.box, box);
                                   });
            if (it == merged.end()) {
                merged.push_back({box, {}});
            } else {
                it->box.source_keypoints.insert(it->box.source_keypoints.end(),
                                                box.source_keypoints.begin(),
                                                box.source_keypoints.end());
                if (it->box.cls != box.cls) it->box.cls = LightClass::unspecified;
            }
        }
    }
    std::sort(merged.begin(), merged.end(),
              [](const MergedCandidate& a, const MergedCandidate& b) {
                  return box_less(a.box, b.box);
              });
    for (auto& entry : merged) {
        auto& sources = entry.box.source_keypoints;
        std::sort(sources.begin(), sources.end());
        sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
        for (std::size_t k = 0; k < keypoints.size(); ++k)
            if (entry.box.contains(keypoints[k].x, keypoints[k].y))
                entry.covered.push_back(static_cast<int>(k));
    }
    return merged;
}

}  // namespace

BoxSet select_combination(const std::vector<std::vector<BoundingBox>>& candidates,
                          const KeypointSet& keypoints, long long limit) {
    if (limit < 1) throw std::invalid_argument("combination limit must be >= 1");
    auto merged = merge_candidates(candidates, keypoints);
    const int n = static_cast<int>(merged.size());
    ComboScorer scorer(merged, keypoints.size());

    std::vector<int> best_chosen;
    ComboScore best_score = scorer.score(best_chosen);
    bool approximate = false;

    const bool subsets_fit = n < 62 && (1LL << n) <= limit;
    if (subsets_fit) {
        // Exact: every subset of the merged candidates, in canonical order.
        std::vector<int> chosen;
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
            chosen.clear();
            for (int i = 0; i < n; ++i)
                if (mask & (std::uint64_t{1} << i)) chosen.push_back(i);
            const ComboScore s = scorer.score(chosen);
            if (s.better_than(best_score)) {
                best_score = s;
                best_chosen = chosen;
            }
        }
    } else {
        // Map per-keypoint candidate lists onto merged indices; empty lists
        // drop out of the enumeration.
        std::vector<std::vector<int>> lists;
        for (const auto& list : candidates) {
            if (list.empty()) continue;
            std::vector<int> ids;
            for (const auto& box : list) {
                for (int i = 0; i < n; ++i) {
                    if (same_extent(merged[i].box, box)) {
                        ids.push_back(i);
                        break;
                    }
                }
            }
            lists.push_back(std::move(ids));
        }
        long long combinations = 1;
        bool product_fits = true;
        for (const auto& ids : lists) {
            combinations *= static_cast<long long>(ids.size());
            if (combinations > limit) {
                product_fits = false;
                break;
            }
        }
        std::vector<int> chosen;
        auto score_choice = [&](const std::vector<int>& picks) {
            chosen.assign(picks.begin(), picks.end());
            std::sort(chosen.begin(), chosen.end());
            chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
            return scorer.score(chosen);
        };
        if (product_fits) {
            // One candidate per keypoint, odometer order.
            std::vector<std::size_t> odo(lists.size(), 0);
            std::vector<int> picks(lists.size());
            while (true) {
                for (std::size_t j = 0; j < lists.size(); ++j) picks[j] = lists[j][odo[j]];
                const ComboScore s = score_choice(picks);
                if (s.better_than(best_score)) {
                    best_score = s;
                    best_chosen = chosen;
                }
                std::size_t j = 0;
                for (; j < lists.size(); ++j) {
                    if (++odo[j] < lists[j].size()) break;
                    odo[j] = 0;
                }
                if (j == lists.size()) break;
            }
        } else {
            // Greedy fallback: per keypoint, keep the candidate with the best
            // marginal score.
            approximate = true;
            std::vector<int> picks;
            for (const auto& ids : lists) {
                int best_id = ids.front();
                ComboScore best_marginal;
                bool have = false;
                for (int id : ids) {
                    picks.push_back(id);
                    const ComboScore s = score_choice(picks);
                    picks.pop_back();
                    if (!have || s.better_than(best_marginal)) {
                        have = true;
                        best_marginal = s;
                        best_id = id;
                    }
                }
                picks.push_back(best_id);
            }
            best_score = score_choice(picks);
            best_chosen = chosen;
        }
    }

    BoxSet out;
    out.approximate = approximate;
    out.boxes.reserve(best_chosen.size());
    for (int id : best_chosen) out.boxes.push_back(merged[id].box);
    return out;
}

BoxSet generate(const GrayImage& image, const KeypointSet& keypoints,
                const SaliencyConfig& config, long long limit,
                const WarningSink& warn) {
    const auto candidates = candidate_boxes(image, keypoints, config, warn);
    return select_combination(candidates, keypoints, limit);
}

}  // namespace kpbms
