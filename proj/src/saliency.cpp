#include "kpbms/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kpbms/rng.hpp"

namespace kpbms {

std::string to_string(SamplingMode m) {
    return m == SamplingMode::random ? "random" : "evenly_spaced";
}

SamplingMode sampling_mode_from_string(const std::string& s) {
    if (s == "random") return SamplingMode::random;
    if (s == "evenly_spaced") return SamplingMode::evenly_spaced;
    throw std::invalid_argument("unknown sampling mode: " + s);
}

void SaliencyConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha outside [0,1]");
    if (n_thresholds < 1)
        throw std::invalid_argument("n_thresholds must be >= 1");
    if (!(blob_fraction > 0.0 && blob_fraction <= 1.0))
        throw std::invalid_argument("blob_fraction outside (0,1]");
}

SaliencyConfig SaliencyConfig::with_stream(std::uint64_t salt) const {
    SaliencyConfig copy = *this;
    copy.seed = derive_seed(seed, salt);
    return copy;
}

AttentionMap::AttentionMap(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("AttentionMap dimensions must be >= 1");
    if (fill < 0.0) throw std::invalid_argument("AttentionMap values must be >= 0");
    values_.assign(static_cast<std::size_t>(width) * height, fill);
}

void AttentionMap::set(int x, int y, double value) {
    if (x < 0 || x >= width_ || y < 0 || y >= height_)
        throw std::out_of_range("AttentionMap::set out of bounds");
    if (value < 0.0) throw std::invalid_argument("AttentionMap values must be >= 0");
    values_[idx(x, y)] = value;
}

double AttentionMap::max_value() const {
    if (values_.empty()) return 0.0;
    return *std::max_element(values_.begin(), values_.end());
}

namespace {

std::vector<double> sample_interval(double lo, double hi, const SaliencyConfig& config) {
    const int n = config.n_thresholds;
    std::vector<double> out;
    out.reserve(n);
    if (config.sampling == SamplingMode::evenly_spaced) {
        if (n == 1 || lo == hi) {
            out.assign(n, hi);
        } else {
            const double step = (hi - lo) / (n - 1);
            for (int i = 0; i < n; ++i) out.push_back(lo + step * i);
            out.back() = hi;  // exact upper endpoint
        }
    } else {
        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> dist(lo, hi);
        for (int i = 0; i < n; ++i) out.push_back(dist(rng));
    }
    return out;
}

}  // namespace

std::vector<double> sample_thresholds(double phi, const SaliencyConfig& config) {
    config.validate();
    if (!(phi >= 0.0 && phi <= 1.0))
        throw std::invalid_argument("phi outside [0,1]");
    return sample_interval(config.alpha * phi, phi, config);
}

BinaryMap activation_keypoint(const BinaryMap& bool_map, const KeypointSet& seeds,
                              Connectivity connectivity) {
    BinaryMap out(bool_map.width(), bool_map.height());
    if (seeds.empty()) return out;
    std::vector<std::uint8_t> visited(bool_map.bits().size(), 0);
    const auto offs = neighbor_offsets(connectivity);
    std::vector<std::pair<int, int>> stack;
    for (const auto& kp : seeds) {
        if (!bool_map.contains(kp.x, kp.y))
            throw std::out_of_range("activation seed outside map bounds");
        if (!bool_map.at(kp.x, kp.y) || visited[bool_map.idx(kp.x, kp.y)]) continue;
        visited[bool_map.idx(kp.x, kp.y)] = 1;
        out.set(kp.x, kp.y, true);
        stack.emplace_back(kp.x, kp.y);
        while (!stack.empty()) {
            auto [x, y] = stack.back();
            stack.pop_back();
            for (auto [dx, dy] : offs) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (!bool_map.contains(nx, ny)) continue;
                const std::size_t i = bool_map.idx(nx, ny);
                if (visited[i] || !bool_map.at(nx, ny)) continue;
                visited[i] = 1;
                out.set(nx, ny, true);
                stack.emplace_back(nx, ny);
            }
        }
    }
    return out;
}

BinaryMap activation_bms_baseline(const BinaryMap& bool_map,
                                  Connectivity connectivity) {
    const int w = bool_map.width();
    const int h = bool_map.height();
    std::vector<std::uint8_t> reached(bool_map.bits().size(), 0);
    const auto offs = neighbor_offsets(connectivity);
    std::vector<std::pair<int, int>> stack;
    auto push_if_active = [&](int x, int y) {
        if (bool_map.at(x, y) && !reached[bool_map.idx(x, y)]) {
            reached[bool_map.idx(x, y)] = 1;
            stack.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        push_if_active(x, 0);
        push_if_active(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push_if_active(0, y);
        push_if_active(w - 1, y);
    }
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        for (auto [dx, dy] : offs) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            push_if_active(nx, ny);
        }
    }
    BinaryMap out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (bool_map.at(x, y) && !reached[bool_map.idx(x, y)])
                out.set(x, y, true);
    return out;
}

BinaryMap activation_combined(const BinaryMap& m_bms, const BinaryMap& m_kp) {
    if (m_bms.width() != m_kp.width() || m_bms.height() != m_kp.height())
        throw std::invalid_argument("activation_combined: dimension mismatch");
    BinaryMap out(m_bms.width(), m_bms.height());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            out.set(x, y, m_bms.at(x, y) && m_kp.at(x, y));
    return out;
}

AttentionMap normalize_activation(const BinaryMap& m) {
    AttentionMap out(m.width(), m.height());
    const std::size_t c = m.count();
    if (c == 0) return out;
    const double value = 1.0 / std::sqrt(static_cast<double>(c));
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y)) out.set(x, y, value);
    return out;
}

AttentionMap mean_attention(const std::vector<AttentionMap>& maps, int n) {
    if (maps.empty()) throw std::invalid_argument("mean_attention: empty list");
    if (static_cast<int>(maps.size()) != n)
        throw std::invalid_argument("mean_attention: list length does not equal n");
    const int w = maps.front().width();
    const int h = maps.front().height();
    for (const auto& m : maps)
        if (m.width() != w || m.height() != h)
            throw std::invalid_argument("mean_attention: dimension mismatch");
    AttentionMap out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (const auto& m : maps) sum += m.at(x, y);
            out.set(x, y, sum / n);
        }
    }
    return out;
}

namespace {

// Mean attention over all sampled thresholds in one sweep. Thresholds are
// processed tightest-first; the seeded component only grows as the
// threshold loosens, so every pixel joins at most once and the total work
// is O(pixels + edges + N log N). Equal by construction to composing
// threshold / flood / normalize / mean per sampled value.
AttentionMap multi_threshold_attention(const GrayImage& image,
                                       const std::vector<Keypoint>& seeds,
                                       std::vector<double> thresholds,
                                       Connectivity connectivity) {
    const int w = image.width();
    const int h = image.height();
    const int n = static_cast<int>(thresholds.size());
    AttentionMap out(w, h);

    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    // First position (tightest-first order) at which a value passes.
    auto first_pos = [&](double v) -> int {
        auto it = std::lower_bound(thresholds.begin(), thresholds.end(), v,
                                   [](double t, double value) { return t > value; });
        return static_cast<int>(it - thresholds.begin());  // n when never passing
    };

    const auto src = image.data();
    std::vector<std::vector<int>> entry_bucket(n + 1);
    std::vector<std::uint8_t> scheduled(src.size(), 0);
    for (const auto& s : seeds) {
        const int pos = first_pos(src[image.idx(s.x, s.y)]);
        if (pos >= n) continue;  // below every sampled threshold
        const int i = static_cast<int>(image.idx(s.x, s.y));
        if (!scheduled[i]) {
            scheduled[i] = 1;
            entry_bucket[pos].push_back(i);
        }
    }

    std::vector<int> join_pos(src.size(), -1);
    std::vector<int> stack;
    std::vector<std::size_t> active_count(n, 0);
    const auto offs = neighbor_offsets(connectivity);
    std::size_t active = 0;
    for (int k = 0; k < n; ++k) {
        const double theta = thresholds[k];
        for (int start : entry_bucket[k]) {
            if (join_pos[start] >= 0) continue;
            join_pos[start] = k;
            ++active;
            stack.push_back(start);
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                const int px = p % w;
                const int py = p / w;
                for (auto [dx, dy] : offs) {
                    const int nx = px + dx;
                    const int ny = py + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    const int q = ny * w + nx;
                    if (join_pos[q] >= 0) continue;
                    if (src[q] >= theta) {
                        join_pos[q] = k;
                        ++active;
                        stack.push_back(q);
                    } else if (!scheduled[q]) {
                        // Passes only at a looser threshold; revisit then.
                        const int pos = first_pos(src[q]);
                        if (pos < n) {
                            scheduled[q] = 1;
                            entry_bucket[pos].push_back(q);
                        }
                    }
                }
            }
        }
        active_count[k] = active;
    }

    // Pixel joining at position j is active in maps j..n-1; its mean
    // attention is the suffix sum of the per-map normalization weights.
    std::vector<double> suffix(n + 1, 0.0);
    for (int k = n - 1; k >= 0; --k) {
        const double term =
            active_count[k] > 0 ? 1.0 / std::sqrt(static_cast<double>(active_count[k])) : 0.0;
        suffix[k] = suffix[k + 1] + term;
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int j = join_pos[y * static_cast<std::size_t>(w) + x];
            if (j >= 0) out.set(x, y, suffix[j] / n);
        }
    return out;
}

}  // namespace

AttentionMap saliency_for_keypoint(const GrayImage& image, const Keypoint& keypoint,
                                   const SaliencyConfig& config,
                                   const WarningSink& warn) {
    config.validate();
    const double phi = intensity_at(image, keypoint);
    if (phi <= 0.0) {
        if (warn)
            warn("zero-intensity keypoint (" + std::to_string(keypoint.x) + "," +
                 std::to_string(keypoint.y) + "): attention map is empty");
        return AttentionMap(image.width(), image.height());
    }
    return multi_threshold_attention(image, {keypoint},
                                     sample_thresholds(phi, config),
                                     config.connectivity);
}

std::map<LightClass, AttentionMap> saliency_per_class(const GrayImage& image,
                                                      const KeypointSet& keypoints,
                                                      const SaliencyConfig& config,
                                                      const WarningSink& warn) {
    config.validate();
    std::map<LightClass, std::vector<Keypoint>> by_class;
    for (const auto& kp : keypoints) {
        if (!image.contains(kp.x, kp.y))
            throw std::out_of_range("keypoint outside image bounds");
        by_class[kp.cls].push_back(kp);
    }
    std::map<LightClass, AttentionMap> out;
    for (const auto& [cls, members] : by_class) {
        double phi_min = 1.0;
        double phi_max = 0.0;
        for (const auto& kp : members) {
            const double phi = image.at(kp.x, kp.y);
            phi_min = std::min(phi_min, phi);
            phi_max = std::max(phi_max, phi);
        }
        if (phi_max <= 0.0) {
            if (warn)
                warn("class " + to_string(cls) +
                     ": all keypoints have zero intensity, attention map is empty");
            out.emplace(cls, AttentionMap(image.width(), image.height()));
            continue;
        }
        auto thresholds =
            sample_interval(config.alpha * phi_min, phi_max, config);
        out.emplace(cls, multi_threshold_attention(image, members,
                                                   std::move(thresholds),
                                                   config.connectivity));
    }
    return out;
}

AttentionMap mean_bms_saliency(const GrayImage& image, const SaliencyConfig& config) {
    config.validate();
    const auto thresholds = sample_interval(0.0, 1.0, config);
    std::vector<AttentionMap> maps;
    maps.reserve(thresholds.size());
    for (double theta : thresholds) {
        const BinaryMap b = threshold(image, theta);
        maps.push_back(normalize_activation(
            activation_bms_baseline(b, config.connectivity)));
    }
    return mean_attention(maps, config.n_thresholds);
}

}  // namespace kpbms
