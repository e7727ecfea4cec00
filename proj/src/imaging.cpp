#include "kpbms/imaging.hpp"

#include <queue>

namespace kpbms {

double intensity_at(const GrayImage& image, const Keypoint& keypoint) {
    if (!image.contains(keypoint.x, keypoint.y))
        throw std::out_of_range(
            "keypoint (" + std::to_string(keypoint.x) + "," +
            std::to_string(keypoint.y) + ") outside image bounds");
    return image.at(keypoint.x, keypoint.y);
}

BinaryMap threshold(const GrayImage& image, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("threshold outside [0,1]");
    BinaryMap out(image.width(), image.height());
    const auto src = image.data();
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (src[out.idx(x, y)] >= theta) out.set(x, y, true);
    return out;
}

namespace {

// Iterative scan from one seed pixel; marks the component in `out` and in
// the shared visited buffer.
void grow_component(const BinaryMap& map, int sx, int sy, Connectivity conn,
                    std::vector<std::uint8_t>& visited, BinaryMap& out) {
    const int w = map.width();
    const int h = map.height();
    const auto offs = neighbor_offsets(conn);
    std::vector<std::pair<int, int>> stack;
    stack.emplace_back(sx, sy);
    visited[map.idx(sx, sy)] = 1;
    out.set(sx, sy, true);
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        for (auto [dx, dy] : offs) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            const std::size_t i = map.idx(nx, ny);
            if (visited[i] || !map.at(nx, ny)) continue;
            visited[i] = 1;
            out.set(nx, ny, true);
            stack.emplace_back(nx, ny);
        }
    }
}

}  // namespace

BinaryMap flood_fill(const BinaryMap& map, const Keypoint& seed,
                     Connectivity connectivity) {
    if (!map.contains(seed.x, seed.y))
        throw std::out_of_range(
            "flood seed (" + std::to_string(seed.x) + "," +
            std::to_string(seed.y) + ") outside map bounds");
    BinaryMap out(map.width(), map.height());
    if (!map.at(seed.x, seed.y)) return out;
    std::vector<std::uint8_t> visited(map.bits().size(), 0);
    grow_component(map, seed.x, seed.y, connectivity, visited, out);
    return out;
}

std::vector<BinaryMap> connected_components(const BinaryMap& map,
                                            Connectivity connectivity) {
    std::vector<BinaryMap> components;
    std::vector<std::uint8_t> visited(map.bits().size(), 0);
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            if (!map.at(x, y) || visited[map.idx(x, y)]) continue;
            BinaryMap mask(map.width(), map.height());
            grow_component(map, x, y, connectivity, visited, mask);
            components.push_back(std::move(mask));
        }
    }
    return components;
}

}  // namespace kpbms
