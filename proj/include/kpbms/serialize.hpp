#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kpbms/bbox.hpp"
#include "kpbms/metrics.hpp"
#include "kpbms/saliency.hpp"
#include "kpbms/tune.hpp"

namespace kpbms {

/// Writes an attention map as a grayscale PGM, rescaled by 1/max, plus a
/// `<path>.json` sidecar recording the scale so the mapping is invertible.
void write_attention_map(const AttentionMap& map, const std::filesystem::path& path,
                         int bit_depth = 16);

/// Reads an attention map back from a PGM plus its sidecar.
AttentionMap read_attention_map(const std::filesystem::path& path);

/// One JSON-lines record per BoxSet:
/// {"image": id, "boxes": [{x_min, y_min, x_max, y_max, class,
/// source_keypoints}], "approximate": bool}.
std::string boxset_to_jsonl(const BoxSet& boxes);
BoxSet boxset_from_jsonl(const std::string& line);
void write_boxsets(const std::vector<BoxSet>& sets, const std::filesystem::path& path);
std::vector<BoxSet> read_boxsets(const std::filesystem::path& path);

/// YOLO label lines: `<class> <x_center> <y_center> <width> <height>`,
/// geometry normalized by the image dimensions, 6 decimal places.
std::string export_yolo(const BoxSet& boxes, std::pair<int, int> image_dims,
                        const std::map<LightClass, int>& class_map);

std::string report_to_json(const EvalReport& report);

/// Aligned single-row table with columns Precision, Recall, F-score, q,
/// q_K +/- std, q_B +/- std.
std::string report_to_table(const EvalReport& report);

/// Flat key=value configuration format (alpha, n_thresholds,
/// blob_fraction, connectivity, sampling, seed).
SaliencyConfig read_config_file(const std::filesystem::path& path);
void write_config_file(const SaliencyConfig& config,
                       const std::filesystem::path& path);

/// One JSON-lines record per trial: config, objective and trial index;
/// a wall-clock timestamp is added unless suppressed for byte-reproducible
/// runs.
std::string trial_to_jsonl(const Trial& trial, bool with_timestamp);

}  // namespace kpbms
