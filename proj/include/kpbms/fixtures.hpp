#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kpbms/tune.hpp"

namespace kpbms {

/// Families of synthetic night-light scenes.
///  - clean: well-separated radial blobs, one keypoint each, plus
///    unannotated border distractors. Box generation should be near
///    perfect here.
///  - hard: touching blob pairs and shared saturation plateaus next to
///    isolated blobs; per-keypoint boxes cannot always be separated.
///  - tuning: scenes with faint satellite lights close to strong blobs,
///    shaped so the quality of generated boxes depends strongly on the
///    blob cut fraction.
enum class FixtureKind { clean, hard, tuning };

std::string to_string(FixtureKind k);
FixtureKind fixture_kind_from_string(const std::string& s);

struct FixtureOptions {
    FixtureKind kind = FixtureKind::clean;
    int count = 200;
    int width = 192;
    int height = 144;
    std::uint64_t seed = 1;
};

/// Deterministic synthetic scenes: additive radial light blobs with
/// intensity falloff, clipped at saturation, quantized to 16-bit steps so
/// on-disk round trips are exact. Keypoints sit on each blob's intensity
/// maximum.
std::vector<DatasetSample> make_fixtures(const FixtureOptions& options);

/// Writes samples as a flat dataset (images/*.pgm + annotations/*.json)
/// loadable by load_dataset.
void write_fixture_dataset(const std::vector<DatasetSample>& samples,
                           const std::filesystem::path& dir);

}  // namespace kpbms
