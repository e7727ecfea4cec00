#include "kpbms/metrics.hpp"

#include <cmath>
#include <numeric>

namespace kpbms {

namespace {

bool class_match(LightClass box_cls, LightClass kp_cls, bool strict) {
    if (!strict) return true;
    return box_cls == LightClass::unspecified || box_cls == kp_cls;
}

double mean_or_one(const std::vector<double>& values) {
    if (values.empty()) return 1.0;
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double population_std(const std::vector<double>& values, double mean) {
    if (values.empty()) return 0.0;
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace

namespace detail {

void finalize_report(EvalReport& r) {
    r.precision = (r.tp + r.fp) > 0
                      ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp)
                      : 1.0;
    r.recall = (r.tp + r.fn) > 0
                   ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn)
                   : 1.0;
    r.f_score = (r.precision + r.recall) > 0.0
                    ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                    : 0.0;
    r.q_k = mean_or_one(r.per_box_quality);
    r.q_b = mean_or_one(r.per_keypoint_quality);
    r.q = r.q_k * r.q_b;
    r.q_k_std = population_std(r.per_box_quality, r.per_box_quality.empty() ? 1.0 : r.q_k);
    r.q_b_std =
        population_std(r.per_keypoint_quality, r.per_keypoint_quality.empty() ? 1.0 : r.q_b);
}

}  // namespace detail

MatchTable match(const BoxSet& boxes, const KeypointSet& keypoints,
                 const EvalOptions& options) {
    MatchTable table;
    table.keypoints_in_box.resize(boxes.boxes.size());
    table.boxes_over_keypoint.resize(keypoints.size());
    for (std::size_t b = 0; b < boxes.boxes.size(); ++b) {
        const auto& box = boxes.boxes[b];
        for (std::size_t k = 0; k < keypoints.size(); ++k) {
            const auto& kp = keypoints[k];
            if (!box.contains(kp.x, kp.y)) continue;
            if (!class_match(box.cls, kp.cls, options.class_strict)) continue;
            table.keypoints_in_box[b].push_back(static_cast<int>(k));
            table.boxes_over_keypoint[k].push_back(static_cast<int>(b));
        }
    }
    return table;
}

EvalReport evaluate(const BoxSet& boxes, const KeypointSet& keypoints,
                    const EvalOptions& options) {
    const MatchTable table = match(boxes, keypoints, options);
    EvalReport r;
    for (const auto& covering : table.boxes_over_keypoint) {
        if (covering.empty()) {
            ++r.fn;
            if (options.qb_over_all_keypoints) r.per_keypoint_quality.push_back(0.0);
        } else {
            ++r.tp;
            r.per_keypoint_quality.push_back(1.0 /
                                             static_cast<double>(covering.size()));
        }
    }
    for (const auto& covered : table.keypoints_in_box) {
        if (covered.empty())
            ++r.fp;
        else
            r.per_box_quality.push_back(1.0 / static_cast<double>(covered.size()));
    }
    detail::finalize_report(r);
    return r;
}

EvalReport aggregate(const std::vector<EvalReport>& reports) {
    if (reports.empty())
        throw std::invalid_argument("aggregate: empty report list");
    EvalReport total;
    for (const auto& r : reports) {
        total.tp += r.tp;
        total.fp += r.fp;
        total.fn += r.fn;
        total.per_box_quality.insert(total.per_box_quality.end(),
                                     r.per_box_quality.begin(),
                                     r.per_box_quality.end());
        total.per_keypoint_quality.insert(total.per_keypoint_quality.end(),
                                          r.per_keypoint_quality.begin(),
                                          r.per_keypoint_quality.end());
    }
    detail::finalize_report(total);
    return total;
}

}  // namespace kpbms
