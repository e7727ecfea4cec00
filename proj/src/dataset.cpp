#include "kpbms/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "kpbms/pgm.hpp"
#include "kpbms/rng.hpp"

namespace kpbms {

using nlohmann::json;

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        default: return "all";
    }
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    if (s == "all") return Split::all;
    throw std::invalid_argument("unknown split: " + s);
}

AnnotationRecord read_annotation(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    AnnotationRecord record;
    try {
        const json j = json::parse(in);
        record.image_id = j.at("image").get<std::string>();
        for (const auto& item : j.at("keypoints"))
            record.keypoints.push_back({item.at("x").get<int>(),
                                        item.at("y").get<int>(),
                                        item.at("direct").get<bool>()});
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return record;
}

namespace {

KeypointSet validate_keypoints(const AnnotationRecord& record, int width,
                               int height, const std::string& id) {
    KeypointSet set;
    for (const auto& item : record.keypoints) {
        Keypoint kp;
        kp.x = item.x;
        kp.y = item.y;
        kp.cls = item.direct ? LightClass::direct : LightClass::indirect;
        if (kp.x < 0 || kp.x >= width || kp.y < 0 || kp.y >= height)
            throw std::invalid_argument(
                "image " + id + ": keypoint (" + std::to_string(kp.x) + "," +
                std::to_string(kp.y) + ") outside " + std::to_string(width) + "x" +
                std::to_string(height) + " bounds");
        set.add(kp);
    }
    return set;
}

void scan_pair_dir(const std::filesystem::path& images_dir,
                   const std::filesystem::path& annotations_dir,
                   DatasetIndex& index) {
    std::vector<std::filesystem::path> image_files;
    for (const auto& entry : std::filesystem::directory_iterator(images_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            image_files.push_back(entry.path());
    std::sort(image_files.begin(), image_files.end());

    for (const auto& image_path : image_files) {
        ++index.report.scanned;
        const std::string id = image_path.stem().string();
        const auto annotation_path = annotations_dir / (id + ".json");
        if (!std::filesystem::exists(annotation_path)) {
            index.report.skipped.push_back("image " + id + ": no annotation file");
            continue;
        }
        try {
            DatasetEntry entry;
            entry.id = id;
            entry.image_path = image_path;
            std::tie(entry.width, entry.height) = read_pgm_dims(image_path);
            entry.keypoints = validate_keypoints(read_annotation(annotation_path),
                                                 entry.width, entry.height, id);
            index.entries.push_back(std::move(entry));
        } catch (const std::exception& e) {
            index.report.failures.push_back("image " + id + ": " + e.what());
        }
    }
}

}  // namespace

DatasetIndex load_dataset(const std::filesystem::path& root, Split split) {
    if (!std::filesystem::is_directory(root))
        throw std::runtime_error("dataset root not readable: " + root.string());
    DatasetIndex index;
    index.root = root;

    std::vector<std::string> split_names;
    if (split == Split::all) {
        for (const auto* name : {"train", "val", "test"})
            if (std::filesystem::is_directory(root / name))
                split_names.emplace_back(name);
    } else {
        split_names.push_back(to_string(split));
    }

    if (split_names.empty() && std::filesystem::is_directory(root / "images")) {
        scan_pair_dir(root / "images", root / "annotations", index);
        return index;
    }

    for (const auto& name : split_names) {
        const auto images_dir = root / name / "images";
        if (!std::filesystem::is_directory(images_dir)) {
            if (split != Split::all)
                throw std::runtime_error("missing split directory: " +
                                         images_dir.string());
            continue;
        }
        scan_pair_dir(images_dir, root / name / "annotations", index);
    }
    return index;
}

DatasetSample load_sample(const DatasetEntry& entry) {
    return {entry.id, read_pgm(entry.image_path), entry.keypoints};
}

std::vector<DatasetSample> load_samples(const DatasetIndex& index) {
    std::vector<DatasetSample> samples;
    samples.reserve(index.entries.size());
    for (const auto& entry : index.entries) samples.push_back(load_sample(entry));
    return samples;
}

std::vector<BatchItem> generate_batch(const DatasetIndex& index,
                                      const SaliencyConfig& config, int jobs,
                                      long long limit) {
    config.validate();
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    std::vector<BatchItem> items(index.entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < index.entries.size();
             i = next.fetch_add(1)) {
            const auto& entry = index.entries[i];
            BatchItem& item = items[i];
            item.id = entry.id;
            const GrayImage image = read_pgm(entry.image_path);
            const SaliencyConfig stream = config.with_stream(hash_id(entry.id));
            item.boxes = generate(image, entry.keypoints, stream, limit,
                                  [&item](const std::string& msg) {
                                      item.warnings.push_back(msg);
                                  });
            item.boxes.image_id = entry.id;
            item.report = evaluate(item.boxes, entry.keypoints);
        }
    };
    if (jobs == 1 || index.entries.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int n = std::min<int>(jobs, static_cast<int>(index.entries.size()));
        pool.reserve(n);
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return items;
}

}  // namespace kpbms
