#pragma once

#include <vector>

#include "kpbms/bbox.hpp"
#include "kpbms/image.hpp"

namespace kpbms {

struct EvalOptions {
    /// Require box and keypoint classes to agree for a containment match.
    /// Off by default: the task is binary (relevant light instance or not).
    bool class_strict = false;
    /// Average 1/n_B over all annotated keypoints instead of covered ones
    /// (uncovered keypoints then contribute 0 to the q_B average).
    bool qb_over_all_keypoints = false;
};

/// Containment relation between boxes and keypoints (inclusive
/// boundaries, both directions).
struct MatchTable {
    std::vector<std::vector<int>> keypoints_in_box;
    std::vector<std::vector<int>> boxes_over_keypoint;
};

/// Detection events and quality measures of one box/keypoint pairing.
///
/// A true positive is a covered keypoint, a false negative an uncovered
/// one, and a false positive a box covering no keypoint; precision
/// therefore mixes keypoint-counted TP with box-counted FP. Conventions
/// for empty denominators: precision 1 without boxes, recall 1 without
/// keypoints, q_K/q_B 1 when their averaging sets are empty.
struct EvalReport {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f_score = 1.0;
    double q_k = 1.0;
    double q_b = 1.0;
    double q = 1.0;
    double q_k_std = 0.0;
    double q_b_std = 0.0;
    /// Raw 1/n_K(b) values over true-positive boxes and 1/n_B(k) values
    /// over the q_B averaging set; kept so dataset-level aggregation can
    /// pool them instead of averaging averages.
    std::vector<double> per_box_quality;
    std::vector<double> per_keypoint_quality;
};

MatchTable match(const BoxSet& boxes, const KeypointSet& keypoints,
                 const EvalOptions& options = {});

EvalReport evaluate(const BoxSet& boxes, const KeypointSet& keypoints,
                    const EvalOptions& options = {});

/// Dataset-level report: micro-averages tp/fp/fn across images and pools
/// the per-box and per-keypoint reciprocals before averaging. Throws
/// std::invalid_argument on an empty list.
EvalReport aggregate(const std::vector<EvalReport>& reports);

namespace detail {
/// Fills the ratio fields of a report from its counts and raw quality
/// values; the single scoring path shared by evaluate and aggregate.
void finalize_report(EvalReport& report);
}  // namespace detail

}  // namespace kpbms
