#pragma once

#include <string>
#include <vector>

#include "kpbms/image.hpp"
#include "kpbms/saliency.hpp"

namespace kpbms {

/// Axis-aligned box with inclusive pixel bounds.
struct BoundingBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;
    LightClass cls = LightClass::unspecified;
    /// Indices into the owning image's keypoint set; identical boxes
    /// derived from several keypoints merge and keep every source link.
    std::vector<int> source_keypoints;

    bool contains(int x, int y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    long long area() const {
        return static_cast<long long>(x_max - x_min + 1) * (y_max - y_min + 1);
    }
};

/// True when two boxes span the same pixels (class and sources ignored).
bool same_extent(const BoundingBox& a, const BoundingBox& b);

/// Ordering by (y_min, x_min, y_max, x_max, class); the canonical box
/// order used for deterministic selection and serialization.
bool box_less(const BoundingBox& a, const BoundingBox& b);

struct BoxSet {
    std::string image_id;
    std::vector<BoundingBox> boxes;
    /// Set when the combination search fell back to the greedy heuristic.
    bool approximate = false;
};

/// Binarizes the attention map at blob_fraction * (map maximum), labels
/// connected components and returns the tight box of each component in
/// discovery order. An all-zeros map yields no boxes. Throws
/// std::invalid_argument for blob_fraction outside (0,1].
std::vector<BoundingBox> extract_blobs(const AttentionMap& attention,
                                       double blob_fraction,
                                       Connectivity connectivity);

/// Per-keypoint candidate boxes: blobs of each keypoint's own saliency
/// map. Candidate j inherits keypoint j's class and records it as source.
/// A keypoint whose saliency map is all-zeros yields an empty list (and a
/// warning).
std::vector<std::vector<BoundingBox>> candidate_boxes(const GrayImage& image,
                                                      const KeypointSet& keypoints,
                                                      const SaliencyConfig& config,
                                                      const WarningSink& warn = {});

constexpr long long kDefaultCombinationLimit = 1'000'000;

/// Picks the box combination with lexicographically maximal
/// (F-score, quality q) against the keypoint set; ties break on smaller
/// total area, then on canonical candidate order. Identical candidate
/// boxes are merged before the search. Small instances are solved exactly
/// over every subset of the merged candidates; when that exceeds `limit`
/// the search enumerates one candidate per keypoint, and past `limit`
/// again it falls back to a greedy per-keypoint choice flagged as
/// approximate.
BoxSet select_combination(const std::vector<std::vector<BoundingBox>>& candidates,
                          const KeypointSet& keypoints,
                          long long limit = kDefaultCombinationLimit);

/// Full generation pipeline: per-keypoint saliency, blob extraction,
/// combination selection. Every returned box contains at least one
/// keypoint, so evaluated precision is always 1.
BoxSet generate(const GrayImage& image, const KeypointSet& keypoints,
                const SaliencyConfig& config,
                long long limit = kDefaultCombinationLimit,
                const WarningSink& warn = {});

}  // namespace kpbms
