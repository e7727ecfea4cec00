#include "kpbms/image.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace kpbms {

std::string to_string(Connectivity c) {
    return c == Connectivity::four ? "four" : "eight";
}

std::string to_string(LightClass c) {
    switch (c) {
        case LightClass::direct: return "direct";
        case LightClass::indirect: return "indirect";
        default: return "unspecified";
    }
}

Connectivity connectivity_from_string(const std::string& s) {
    if (s == "four" || s == "4") return Connectivity::four;
    if (s == "eight" || s == "8") return Connectivity::eight;
    throw std::invalid_argument("unknown connectivity: " + s);
}

LightClass light_class_from_string(const std::string& s) {
    if (s == "direct") return LightClass::direct;
    if (s == "indirect") return LightClass::indirect;
    if (s == "unspecified") return LightClass::unspecified;
    throw std::invalid_argument("unknown light class: " + s);
}

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("GrayImage dimensions must be >= 1");
    if (fill < 0.0 || fill > 1.0)
        throw std::invalid_argument("GrayImage fill value outside [0,1]");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage GrayImage::from_data(int width, int height, std::vector<double> data) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("GrayImage dimensions must be >= 1");
    if (data.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("GrayImage data length does not match dimensions");
    for (double v : data) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("GrayImage intensity outside [0,1]");
    }
    GrayImage img;
    img.width_ = width;
    img.height_ = height;
    img.data_ = std::move(data);
    return img;
}

void GrayImage::set(int x, int y, double value) {
    if (!contains(x, y)) throw std::out_of_range("GrayImage::set out of bounds");
    if (!(value >= 0.0 && value <= 1.0))
        throw std::invalid_argument("GrayImage intensity outside [0,1]");
    data_[idx(x, y)] = value;
}

BinaryMap::BinaryMap(int width, int height, bool fill)
    : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("BinaryMap dimensions must be >= 1");
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMap::count() const {
    return static_cast<std::size_t>(
        std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

KeypointSet::KeypointSet(const std::vector<Keypoint>& items) {
    for (const auto& kp : items) add(kp);
}

void KeypointSet::add(const Keypoint& kp) {
    if (kp.cls == LightClass::unspecified)
        throw std::invalid_argument("keypoints must be classed direct or indirect");
    if (std::find(items_.begin(), items_.end(), kp) != items_.end())
        throw std::invalid_argument(
            "duplicate keypoint at (" + std::to_string(kp.x) + "," +
            std::to_string(kp.y) + ")");
    items_.push_back(kp);
}

std::span<const std::pair<int, int>> neighbor_offsets(Connectivity c) {
    static constexpr std::array<std::pair<int, int>, 4> four{
        {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    static constexpr std::array<std::pair<int, int>, 8> eight{
        {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
    if (c == Connectivity::four) return {four.data(), four.size()};
    return {eight.data(), eight.size()};
}

}  // namespace kpbms
