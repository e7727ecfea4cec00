#include "kpbms/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "kpbms/pgm.hpp"
#include "kpbms/rng.hpp"

namespace kpbms {

std::string to_string(FixtureKind k) {
    switch (k) {
        case FixtureKind::clean: return "clean";
        case FixtureKind::hard: return "hard";
        default: return "tuning";
    }
}

FixtureKind fixture_kind_from_string(const std::string& s) {
    if (s == "clean") return FixtureKind::clean;
    if (s == "hard") return FixtureKind::hard;
    if (s == "tuning") return FixtureKind::tuning;
    throw std::invalid_argument("unknown fixture kind: " + s);
}

namespace {

struct Blob {
    double cx = 0.0;
    double cy = 0.0;
    double sigma = 5.0;
    double peak = 0.8;       // may exceed 1; the image clips at saturation
    bool annotated = true;   // distractors carry no keypoint
    LightClass cls = LightClass::direct;
};

double blob_value(const Blob& b, double x, double y) {
    const double dx = x - b.cx;
    const double dy = y - b.cy;
    return b.peak * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
}

GrayImage render(int width, int height, const std::vector<Blob>& blobs,
                 double noise_amplitude, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> noise(0.0, noise_amplitude);
    std::vector<double> data(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = noise_amplitude > 0.0 ? noise(rng) : 0.0;
            for (const auto& b : blobs) v += blob_value(b, x, y);
            // Quantize to 16-bit steps so PGM round trips are exact.
            const double clipped = std::clamp(v, 0.0, 1.0);
            data[static_cast<std::size_t>(y) * width + x] =
                std::round(clipped * 65535.0) / 65535.0;
        }
    }
    return GrayImage::from_data(width, height, std::move(data));
}

// Brightest pixel near the blob center (row-major tie break); this is
// where an annotator marking the artifact's intensity peak would click.
Keypoint peak_keypoint(const GrayImage& image, const Blob& blob) {
    Keypoint kp;
    kp.cls = blob.cls;
    const int radius = std::max(2, static_cast<int>(std::lround(blob.sigma)));
    const int cx = static_cast<int>(std::lround(blob.cx));
    const int cy = static_cast<int>(std::lround(blob.cy));
    double best = -1.0;
    for (int y = std::max(0, cy - radius);
         y <= std::min(image.height() - 1, cy + radius); ++y) {
        for (int x = std::max(0, cx - radius);
             x <= std::min(image.width() - 1, cx + radius); ++x) {
            if (image.at(x, y) > best) {
                best = image.at(x, y);
                kp.x = x;
                kp.y = y;
            }
        }
    }
    return kp;
}

void add_keypoints(const GrayImage& image, const std::vector<Blob>& blobs,
                   KeypointSet& set) {
    for (const auto& blob : blobs) {
        if (!blob.annotated) continue;
        Keypoint kp = peak_keypoint(image, blob);
        // Same-pixel collisions (merged plateaus) nudge sideways.
        for (int shift = 1; shift < 8; ++shift) {
            try {
                set.add(kp);
                break;
            } catch (const std::invalid_argument&) {
                kp.x = std::min(image.width() - 1, kp.x + 1);
            }
        }
    }
}

double far_enough(const std::vector<Blob>& placed, double x, double y,
                  double sigma) {
    for (const auto& b : placed) {
        const double d = std::hypot(x - b.cx, y - b.cy);
        if (d < 3.5 * (sigma + b.sigma)) return false;
    }
    return true;
}

// Rejection-samples a well-separated blob center.
Blob place_isolated(int width, int height, std::mt19937_64& rng,
                    const std::vector<Blob>& placed, double sigma_lo,
                    double sigma_hi, double peak_lo, double peak_hi) {
    std::uniform_real_distribution<double> sig(sigma_lo, sigma_hi);
    std::uniform_real_distribution<double> pk(peak_lo, peak_hi);
    std::uniform_real_distribution<double> cls01(0.0, 1.0);
    Blob blob;
    blob.sigma = sig(rng);
    blob.peak = pk(rng);
    blob.cls = cls01(rng) < 0.5 ? LightClass::direct : LightClass::indirect;
    // margins shrink on small canvases so the sampling range stays valid
    const double margin_x = std::min(3.0 * blob.sigma, (width - 2.0) / 2.0);
    const double margin_y = std::min(3.0 * blob.sigma, (height - 2.0) / 2.0);
    std::uniform_real_distribution<double> px(margin_x, width - 1 - margin_x);
    std::uniform_real_distribution<double> py(margin_y, height - 1 - margin_y);
    for (int attempt = 0; attempt < 200; ++attempt) {
        blob.cx = px(rng);
        blob.cy = py(rng);
        if (far_enough(placed, blob.cx, blob.cy, blob.sigma)) break;
    }
    return blob;
}

Blob place_border_distractor(int width, int height, std::mt19937_64& rng,
                             const std::vector<Blob>& placed) {
    std::uniform_real_distribution<double> sig(3.0, 5.0);
    std::uniform_real_distribution<double> pk(0.45, 0.9);
    std::uniform_int_distribution<int> side(0, 3);
    Blob blob;
    blob.sigma = sig(rng);
    blob.peak = pk(rng);
    blob.annotated = false;
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::uniform_real_distribution<double> along_w(0.0, width - 1.0);
        std::uniform_real_distribution<double> along_h(0.0, height - 1.0);
        switch (side(rng)) {
            case 0: blob.cx = along_w(rng); blob.cy = 0.0; break;
            case 1: blob.cx = along_w(rng); blob.cy = height - 1.0; break;
            case 2: blob.cx = 0.0; blob.cy = along_h(rng); break;
            default: blob.cx = width - 1.0; blob.cy = along_h(rng); break;
        }
        if (far_enough(placed, blob.cx, blob.cy, blob.sigma)) break;
    }
    return blob;
}

std::vector<Blob> layout_clean(int width, int height, std::mt19937_64& rng) {
    std::vector<Blob> blobs;
    std::uniform_int_distribution<int> n_blobs(2, 4);
    std::uniform_int_distribution<int> n_distractors(1, 2);
    const int n = n_blobs(rng);
    for (int i = 0; i < n; ++i)
        blobs.push_back(
            place_isolated(width, height, rng, blobs, 4.0, 8.0, 0.55, 0.95));
    const int d = n_distractors(rng);
    for (int i = 0; i < d; ++i)
        blobs.push_back(place_border_distractor(width, height, rng, blobs));
    return blobs;
}

std::vector<Blob> layout_hard(int width, int height, std::mt19937_64& rng) {
    std::vector<Blob> blobs;
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // A touching pair; saturated variants share one clipped plateau.
    Blob first = place_isolated(width, height, rng, blobs, 5.0, 7.0, 0.8, 0.95);
    const bool saturated = u01(rng) < 0.5;
    if (saturated) first.peak = 1.2 + 0.4 * u01(rng);
    blobs.push_back(first);
    Blob second = first;
    second.cls = u01(rng) < 0.5 ? LightClass::direct : LightClass::indirect;
    std::uniform_real_distribution<double> gap(
        saturated ? 0.9 : 1.1, saturated ? 1.3 : 1.6);
    const double d = gap(rng) * first.sigma;
    const double angle = 2.0 * 3.14159265358979 * u01(rng);
    second.cx = std::clamp(first.cx + d * std::cos(angle), 6.0, width - 7.0);
    second.cy = std::clamp(first.cy + d * std::sin(angle), 6.0, height - 7.0);
    second.sigma = first.sigma * (0.8 + 0.3 * u01(rng));
    if (!saturated) second.peak = 0.75 + 0.2 * u01(rng);
    blobs.push_back(second);

    std::uniform_int_distribution<int> n_isolated(1, 2);
    const int n = n_isolated(rng);
    for (int i = 0; i < n; ++i)
        blobs.push_back(
            place_isolated(width, height, rng, blobs, 4.0, 7.0, 0.6, 0.95));
    blobs.push_back(place_border_distractor(width, height, rng, blobs));
    return blobs;
}

// Output of layout_tuning: blobs plus explicit extra keypoints.
struct TuningLayout {
    std::vector<Blob> blobs;
    std::vector<Keypoint> dark_keypoints;
};

// One L-shaped light artifact (bright corner with two dimmer arms) whose
// inner cavity holds keypoints on pixels that stay black, next to a few
// isolated blobs. Loose blob cuts make the corner component span both
// arms, so its bounding box picks up the cavity annotations; tight cuts
// keep only the corner cap and lose them. That makes the objective
// genuinely sensitive to the cut fraction.
TuningLayout layout_tuning(int width, int height, std::mt19937_64& rng) {
    TuningLayout layout;
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const double sigma = 4.5 + u01(rng);
    const double arm = 7.0 * sigma;
    // corner placed so both arms and the cavity stay inside the frame
    std::uniform_real_distribution<double> px(2.5 * sigma,
                                              width / 2.0 - arm - 2.0 * sigma);
    std::uniform_real_distribution<double> py(2.5 * sigma,
                                              height - arm - 2.5 * sigma);
    const double cx = px(rng);
    const double cy = py(rng);

    Blob corner;
    corner.cx = cx;
    corner.cy = cy;
    corner.sigma = sigma;
    corner.peak = 1.0;
    layout.blobs.push_back(corner);
    for (int node = 1; node <= 4; ++node) {
        Blob along_x = corner;
        along_x.peak = 0.68;
        along_x.annotated = false;
        along_x.cx = cx + node * 1.75 * sigma;
        layout.blobs.push_back(along_x);
        Blob along_y = along_x;
        along_y.cx = cx;
        along_y.cy = cy + node * 1.75 * sigma;
        layout.blobs.push_back(along_y);
    }
    // cavity annotations: far enough from both arms to render black
    for (int i = 0; i < 4; ++i) {
        Keypoint dark;
        dark.cls = LightClass::indirect;
        dark.x = static_cast<int>(std::lround(cx + (5.5 + 0.3 * i) * sigma));
        dark.y = static_cast<int>(std::lround(cy + (6.4 - 0.3 * i) * sigma));
        layout.dark_keypoints.push_back(dark);
    }

    std::uniform_int_distribution<int> n_isolated(2, 3);
    const int n = n_isolated(rng);
    for (int i = 0; i < n; ++i) {
        Blob blob =
            place_isolated(width, height, rng, layout.blobs, 3.5, 5.0, 0.6, 0.9);
        // keep singletons in the right half, clear of the L's rectangle
        blob.cx = std::clamp(blob.cx / 2.0 + width * 0.6, width * 0.6,
                             width - 3.0 * blob.sigma);
        if (!far_enough(layout.blobs, blob.cx, blob.cy, blob.sigma)) continue;
        layout.blobs.push_back(blob);
    }
    return layout;
}

}  // namespace

std::vector<DatasetSample> make_fixtures(const FixtureOptions& options) {
    if (options.count < 1 || options.width < 32 || options.height < 32)
        throw std::invalid_argument("fixture options out of range");
    if (options.kind == FixtureKind::tuning &&
        (options.width < 128 || options.height < 80))
        throw std::invalid_argument(
            "tuning fixtures need at least a 128x80 canvas");
    std::vector<DatasetSample> samples;
    samples.reserve(options.count);
    for (int i = 0; i < options.count; ++i) {
        std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(i)));
        std::vector<Blob> blobs;
        std::vector<Keypoint> extra;
        double noise = 0.02;
        switch (options.kind) {
            case FixtureKind::clean:
                blobs = layout_clean(options.width, options.height, rng);
                break;
            case FixtureKind::hard:
                blobs = layout_hard(options.width, options.height, rng);
                break;
            default: {
                TuningLayout layout = layout_tuning(options.width, options.height, rng);
                blobs = std::move(layout.blobs);
                extra = std::move(layout.dark_keypoints);
                noise = 0.0;  // cavity annotations must stay on black pixels
                break;
            }
        }
        DatasetSample sample;
        char id[32];
        std::snprintf(id, sizeof(id), "%s_%04d", to_string(options.kind).c_str(), i);
        sample.id = id;
        sample.image = render(options.width, options.height, blobs, noise, rng);
        add_keypoints(sample.image, blobs, sample.keypoints);
        for (const auto& kp : extra)
            if (sample.image.contains(kp.x, kp.y)) sample.keypoints.add(kp);
        samples.push_back(std::move(sample));
    }
    return samples;
}

void write_fixture_dataset(const std::vector<DatasetSample>& samples,
                           const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");
    std::filesystem::create_directories(dir / "annotations");
    for (const auto& sample : samples) {
        write_pgm(sample.image, dir / "images" / (sample.id + ".pgm"), 16);
        nlohmann::json record;
        record["image"] = sample.id;
        nlohmann::json kps = nlohmann::json::array();
        for (const auto& kp : sample.keypoints)
            kps.push_back({{"x", kp.x},
                           {"y", kp.y},
                           {"direct", kp.cls == LightClass::direct}});
        record["keypoints"] = std::move(kps);
        std::ofstream out(dir / "annotations" / (sample.id + ".json"));
        if (!out)
            throw std::runtime_error("cannot write annotation for " + sample.id);
        out << record.dump(2) << "\n";
    }
}

}  // namespace kpbms
