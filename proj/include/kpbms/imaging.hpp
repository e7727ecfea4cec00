#pragma once

#include <vector>

#include "kpbms/image.hpp"

namespace kpbms {

/// Intensity of the image at a keypoint position.
/// Throws std::out_of_range when the keypoint lies outside the image.
double intensity_at(const GrayImage& image, const Keypoint& keypoint);

/// Binarizes the image: output bit is 1 exactly where intensity >= theta.
/// The comparison is inclusive so a seed pixel stays active when the
/// threshold equals its own intensity. Throws std::invalid_argument for
/// theta outside [0,1].
BinaryMap threshold(const GrayImage& image, double theta);

/// Connected component of active pixels containing the seed. A seed on an
/// inactive pixel yields the all-zeros map; in multi-seed activation a
/// threshold above one seed's intensity legitimately silences that seed.
/// Throws std::out_of_range for a seed outside the map.
BinaryMap flood_fill(const BinaryMap& map, const Keypoint& seed,
                     Connectivity connectivity);

/// Splits the active set into connected components, one mask per
/// component, in row-major order of each component's first pixel. Masks
/// are pairwise disjoint and union to the input's active set.
std::vector<BinaryMap> connected_components(const BinaryMap& map,
                                            Connectivity connectivity);

}  // namespace kpbms
