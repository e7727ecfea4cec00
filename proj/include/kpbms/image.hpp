#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpbms {

enum class Connectivity { four, eight };

/// Annotation class of a light instance. Boxes may additionally be
/// "unspecified" when merged candidates disagree on class.
enum class LightClass { direct, indirect, unspecified };

std::string to_string(Connectivity c);
std::string to_string(LightClass c);
Connectivity connectivity_from_string(const std::string& s);
LightClass light_class_from_string(const std::string& s);

/// Sparse annotated fixation point. Coordinates are 0-based pixel
/// indices (column x, row y); external annotation files may use other
/// conventions and are converted at load.
struct Keypoint {
    int x = 0;
    int y = 0;
    LightClass cls = LightClass::direct;

    bool operator==(const Keypoint&) const = default;
};

/// Grayscale raster with intensities in [0,1], row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);
    static GrayImage from_data(int width, int height, std::vector<double> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    bool contains(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    double at(int x, int y) const { return data_[idx(x, y)]; }

    /// Sets one pixel; the value must lie in [0,1].
    void set(int x, int y, double value);

    std::span<const double> data() const { return data_; }

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Per-pixel 0/1 raster. Shared representation for Boolean maps,
/// activation maps and blob masks; dimensions always match the source
/// image.
class BinaryMap {
public:
    BinaryMap() = default;
    BinaryMap(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }

    bool contains(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    bool at(int x, int y) const { return bits_[idx(x, y)] != 0; }
    void set(int x, int y, bool value) { bits_[idx(x, y)] = value ? 1 : 0; }

    /// Number of active pixels.
    std::size_t count() const;

    bool empty() const { return count() == 0; }

    std::span<const std::uint8_t> bits() const { return bits_; }

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    bool operator==(const BinaryMap&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Ordered list of keypoints. Exact duplicates (same pixel, same class)
/// are rejected at ingestion.
class KeypointSet {
public:
    KeypointSet() = default;
    explicit KeypointSet(const std::vector<Keypoint>& items);

    /// Appends a keypoint; throws std::invalid_argument on an exact duplicate.
    void add(const Keypoint& kp);

    const std::vector<Keypoint>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const Keypoint& operator[](std::size_t i) const { return items_[i]; }

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::vector<Keypoint> items_;
};

/// Offsets of the 4- or 8-neighborhood.
std::span<const std::pair<int, int>> neighbor_offsets(Connectivity c);

}  // namespace kpbms
