#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kpbms/bbox.hpp"
#include "kpbms/image.hpp"
#include "kpbms/metrics.hpp"
#include "kpbms/tune.hpp"

namespace kpbms {

enum class Split { train, val, test, all };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

/// Raw per-image annotation as stored on disk, before bounds validation.
struct AnnotationRecord {
    struct Item {
        int x = 0;
        int y = 0;
        bool direct = true;
    };
    std::string image_id;
    std::vector<Item> keypoints;
};

/// Parses one annotation JSON file. Throws std::runtime_error on
/// malformed content.
AnnotationRecord read_annotation(const std::filesystem::path& path);

/// One validated dataset entry; pixel data is decoded lazily.
struct DatasetEntry {
    std::string id;
    std::filesystem::path image_path;
    int width = 0;
    int height = 0;
    KeypointSet keypoints;
};

struct LoadReport {
    std::size_t scanned = 0;
    /// Images without an annotation file (skipped).
    std::vector<std::string> skipped;
    /// Per-file validation or parse failures (entry rejected).
    std::vector<std::string> failures;
};

struct DatasetIndex {
    std::filesystem::path root;
    std::vector<DatasetEntry> entries;
    LoadReport report;
};

/// Scans `root` for images plus one JSON annotation per image.
///
/// Expected layout: `root/<split>/images/*.pgm` with annotations at
/// `root/<split>/annotations/<id>.json`; a flat `root/images` +
/// `root/annotations` layout is accepted when no split directories
/// exist. Annotation schema: {"image": id, "keypoints": [{"x": int,
/// "y": int, "direct": bool}]}. Malformed files and out-of-bounds or
/// duplicate keypoints end up in the load report instead of aborting the
/// scan. Throws std::runtime_error when the root is unreadable.
DatasetIndex load_dataset(const std::filesystem::path& root, Split split);

/// Decodes one entry to an in-memory sample.
DatasetSample load_sample(const DatasetEntry& entry);

/// All entries decoded, in index order.
std::vector<DatasetSample> load_samples(const DatasetIndex& index);

/// Per-image output of the batch box-generation pipeline.
struct BatchItem {
    std::string id;
    BoxSet boxes;
    EvalReport report;
    std::vector<std::string> warnings;
};

/// Runs box generation over every entry with up to `jobs` worker threads.
/// Each image gets a seed substream derived from its id, so results are
/// independent of scheduling order; items come back in index order.
std::vector<BatchItem> generate_batch(const DatasetIndex& index,
                                      const SaliencyConfig& config, int jobs,
                                      long long limit = kDefaultCombinationLimit);

}  // namespace kpbms
