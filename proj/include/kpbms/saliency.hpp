#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kpbms/image.hpp"
#include "kpbms/imaging.hpp"

namespace kpbms {

enum class SamplingMode { random, evenly_spaced };

std::string to_string(SamplingMode m);
SamplingMode sampling_mode_from_string(const std::string& s);

/// Parameters of attention generation and the downstream blob cut.
struct SaliencyConfig {
    /// Lower-bound factor of the threshold sampling interval [alpha*phi, phi].
    double alpha = 0.5;
    /// Number of sampled thresholds N.
    int n_thresholds = 32;
    Connectivity connectivity = Connectivity::eight;
    SamplingMode sampling = SamplingMode::random;
    std::uint64_t seed = 0;
    /// Fraction of the attention maximum at which blobs are binarized
    /// (used by box generation).
    double blob_fraction = 0.5;

    /// Throws std::invalid_argument when any field is outside its domain.
    void validate() const;

    /// Copy with the seed replaced by a derived substream seed.
    SaliencyConfig with_stream(std::uint64_t salt) const;
};

/// Non-negative real-valued saliency raster, dimensions matching the
/// source image.
class AttentionMap {
public:
    AttentionMap() = default;
    AttentionMap(int width, int height, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }

    double at(int x, int y) const { return values_[idx(x, y)]; }
    void set(int x, int y, double value);

    /// Largest value in the map; 0 for an all-zeros map.
    double max_value() const;

    std::span<const double> values() const { return values_; }

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// Optional sink for non-fatal diagnostics (zero-intensity seeds, empty
/// candidate lists). A default-constructed sink discards messages.
using WarningSink = std::function<void(const std::string&)>;

/// N thresholds in [alpha*phi, phi]. Random mode draws i.i.d. uniform
/// values from the configured seed; evenly_spaced returns N equally
/// spaced values spanning the closed interval (a single value collapses
/// to phi). phi = 0 yields the degenerate list of N zeros.
std::vector<double> sample_thresholds(double phi, const SaliencyConfig& config);

/// Pixel-wise union of flood fills from every seed (the keypoint-seeded
/// activation of a Boolean map). Inactive seeds contribute nothing; an
/// empty seed set yields the all-zeros map.
BinaryMap activation_keypoint(const BinaryMap& bool_map, const KeypointSet& seeds,
                              Connectivity connectivity);

/// Original border-seeded activation: clears every component touching an
/// image border, keeping surrounded components only.
BinaryMap activation_bms_baseline(const BinaryMap& bool_map,
                                  Connectivity connectivity);

/// Pixel-wise AND of the border-seeded and keypoint-seeded activations
/// (the center-surround refinement). Throws std::invalid_argument on a
/// dimension mismatch.
BinaryMap activation_combined(const BinaryMap& m_bms, const BinaryMap& m_kp);

/// L2 normalization of an activation map: every active pixel maps to
/// 1/sqrt(count). An empty map yields the all-zeros attention map.
AttentionMap normalize_activation(const BinaryMap& m);

/// Pixel-wise arithmetic mean over exactly n maps. All-zeros maps stay in
/// the divisor so the result is a fixed-scale average. Throws
/// std::invalid_argument for an empty list, a length mismatch with n, or
/// inconsistent dimensions.
AttentionMap mean_attention(const std::vector<AttentionMap>& maps, int n);

/// Mean attention map seeded by a single keypoint: thresholds sampled in
/// [alpha*phi, phi], per-threshold flood from the keypoint, normalization,
/// averaging. A zero-intensity keypoint yields the all-zeros map and a
/// warning. The seed pixel always attains the map maximum.
AttentionMap saliency_for_keypoint(const GrayImage& image, const Keypoint& keypoint,
                                   const SaliencyConfig& config,
                                   const WarningSink& warn = {});

/// One mean attention map per keypoint class. For each class, thresholds
/// are sampled in [alpha*min_j(phi_j), max_j(phi_j)] over that class's
/// keypoints and all of them seed the activation. Classes without
/// keypoints are absent from the output.
std::map<LightClass, AttentionMap> saliency_per_class(const GrayImage& image,
                                                      const KeypointSet& keypoints,
                                                      const SaliencyConfig& config,
                                                      const WarningSink& warn = {});

/// Mean attention map of the border-seeded baseline: thresholds sampled
/// over the full [0,1] range, border-masking activation, normalization,
/// averaging. Used for side-by-side comparison against the keypoint-seeded
/// variant.
AttentionMap mean_bms_saliency(const GrayImage& image, const SaliencyConfig& config);

}  // namespace kpbms
