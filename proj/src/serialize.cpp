#include "kpbms/serialize.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "kpbms/pgm.hpp"

namespace kpbms {

using nlohmann::json;

void write_attention_map(const AttentionMap& map, const std::filesystem::path& path,
                         int bit_depth) {
    const double max = map.max_value();
    const double scale = max > 0.0 ? 1.0 / max : 0.0;
    std::vector<double> rescaled(map.values().begin(), map.values().end());
    for (double& v : rescaled) v *= scale;
    write_pgm(GrayImage::from_data(map.width(), map.height(), std::move(rescaled)),
              path, bit_depth);
    const json sidecar = {{"max", max},
                          {"bit_depth", bit_depth},
                          {"width", map.width()},
                          {"height", map.height()}};
    std::ofstream out(path.string() + ".json");
    if (!out) throw std::runtime_error("cannot write " + path.string() + ".json");
    out << sidecar.dump() << "\n";
}

AttentionMap read_attention_map(const std::filesystem::path& path) {
    std::ifstream in(path.string() + ".json");
    if (!in) throw std::runtime_error("cannot open " + path.string() + ".json");
    json sidecar;
    in >> sidecar;
    const double max = sidecar.at("max").get<double>();
    const GrayImage img = read_pgm(path);
    AttentionMap map(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) map.set(x, y, img.at(x, y) * max);
    return map;
}

namespace {

json box_to_json(const BoundingBox& box) {
    return {{"x_min", box.x_min},         {"y_min", box.y_min},
            {"x_max", box.x_max},         {"y_max", box.y_max},
            {"class", to_string(box.cls)}, {"source_keypoints", box.source_keypoints}};
}

BoundingBox box_from_json(const json& j) {
    BoundingBox box;
    box.x_min = j.at("x_min").get<int>();
    box.y_min = j.at("y_min").get<int>();
    box.x_max = j.at("x_max").get<int>();
    box.y_max = j.at("y_max").get<int>();
    box.cls = light_class_from_string(j.at("class").get<std::string>());
    if (j.contains("source_keypoints"))
        box.source_keypoints = j.at("source_keypoints").get<std::vector<int>>();
    if (box.x_min > box.x_max || box.y_min > box.y_max)
        throw std::runtime_error("box record with inverted bounds");
    return box;
}

}  // namespace

std::string boxset_to_jsonl(const BoxSet& boxes) {
    json record;
    record["image"] = boxes.image_id;
    record["approximate"] = boxes.approximate;
    json list = json::array();
    for (const auto& box : boxes.boxes) list.push_back(box_to_json(box));
    record["boxes"] = std::move(list);
    return record.dump();
}

BoxSet boxset_from_jsonl(const std::string& line) {
    const json record = json::parse(line);
    BoxSet set;
    set.image_id = record.at("image").get<std::string>();
    set.approximate = record.value("approximate", false);
    for (const auto& j : record.at("boxes")) set.boxes.push_back(box_from_json(j));
    return set;
}

void write_boxsets(const std::vector<BoxSet>& sets,
                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& set : sets) out << boxset_to_jsonl(set) << "\n";
}

std::vector<BoxSet> read_boxsets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<BoxSet> sets;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        sets.push_back(boxset_from_jsonl(line));
    }
    return sets;
}

std::string export_yolo(const BoxSet& boxes, std::pair<int, int> image_dims,
                        const std::map<LightClass, int>& class_map) {
    const auto [w, h] = image_dims;
    if (w < 1 || h < 1) throw std::invalid_argument("invalid image dimensions");
    std::ostringstream out;
    out << std::fixed << std::setprecision(6);
    for (const auto& box : boxes.boxes) {
        if (box.x_min < 0 || box.y_min < 0 || box.x_max >= w || box.y_max >= h)
            throw std::invalid_argument("box outside image dimensions");
        const auto it = class_map.find(box.cls);
        if (it == class_map.end())
            throw std::invalid_argument("class missing from class map: " +
                                        to_string(box.cls));
        const double cx = 0.5 * (box.x_min + box.x_max) / w;
        const double cy = 0.5 * (box.y_min + box.y_max) / h;
        const double bw = static_cast<double>(box.x_max - box.x_min) / w;
        const double bh = static_cast<double>(box.y_max - box.y_min) / h;
        out << it->second << " " << cx << " " << cy << " " << bw << " " << bh << "\n";
    }
    return out.str();
}

namespace {

json config_to_json(const SaliencyConfig& config) {
    return {{"alpha", config.alpha},
            {"n_thresholds", config.n_thresholds},
            {"blob_fraction", config.blob_fraction},
            {"connectivity", to_string(config.connectivity)},
            {"sampling", to_string(config.sampling)},
            {"seed", config.seed}};
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
    const json j = {{"tp", r.tp},
                    {"fp", r.fp},
                    {"fn", r.fn},
                    {"precision", r.precision},
                    {"recall", r.recall},
                    {"f_score", r.f_score},
                    {"q", r.q},
                    {"q_k", r.q_k},
                    {"q_k_std", r.q_k_std},
                    {"q_b", r.q_b},
                    {"q_b_std", r.q_b_std}};
    return j.dump();
}

std::string report_to_table(const EvalReport& r) {
    std::ostringstream out;
    auto pm = [](double mean, double std) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(2) << mean << " +/- " << std;
        return cell.str();
    };
    out << std::left << std::setw(11) << "Precision" << std::setw(9) << "Recall"
        << std::setw(10) << "F-score" << std::setw(8) << "q" << std::setw(15)
        << "q_K" << std::setw(15) << "q_B" << "\n";
    out << std::fixed << std::setprecision(3);
    out << std::left << std::setw(11) << r.precision << std::setw(9) << r.recall
        << std::setw(10) << r.f_score << std::setw(8) << r.q << std::setw(15)
        << pm(r.q_k, r.q_k_std) << std::setw(15) << pm(r.q_b, r.q_b_std) << "\n";
    return out.str();
}

SaliencyConfig read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    SaliencyConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "alpha")
                config.alpha = std::stod(value);
            else if (key == "n_thresholds")
                config.n_thresholds = std::stoi(value);
            else if (key == "blob_fraction")
                config.blob_fraction = std::stod(value);
            else if (key == "connectivity")
                config.connectivity = connectivity_from_string(value);
            else if (key == "sampling")
                config.sampling = sampling_mode_from_string(value);
            else if (key == "seed")
                config.seed = std::stoull(value);
            else
                throw std::invalid_argument("unknown key: " + key);
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": " + e.what());
        }
    }
    config.validate();
    return config;
}

void write_config_file(const SaliencyConfig& config,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config " + path.string());
    out << "alpha=" << config.alpha << "\n"
        << "n_thresholds=" << config.n_thresholds << "\n"
        << "blob_fraction=" << config.blob_fraction << "\n"
        << "connectivity=" << to_string(config.connectivity) << "\n"
        << "sampling=" << to_string(config.sampling) << "\n"
        << "seed=" << config.seed << "\n";
}

std::string trial_to_jsonl(const Trial& trial, bool with_timestamp) {
    json j = {{"trial", trial.index},
              {"config", config_to_json(trial.config)},
              {"objective", trial.objective}};
    if (with_timestamp) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::ostringstream ts;
        ts << std::put_time(std::gmtime(&t), "%FT%TZ");
        j["timestamp"] = ts.str();
    }
    return j.dump();
}

}  // namespace kpbms
