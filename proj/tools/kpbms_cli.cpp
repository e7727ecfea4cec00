// Command-line front end: batch saliency maps, box generation, metric
// reports, hyperparameter tuning and the baseline comparison, over a
// dataset of grayscale images with keypoint annotations.
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "kpbms/bbox.hpp"
#include "kpbms/dataset.hpp"
#include "kpbms/fixtures.hpp"
#include "kpbms/metrics.hpp"
#include "kpbms/pgm.hpp"
#include "kpbms/rng.hpp"
#include "kpbms/serialize.hpp"
#include "kpbms/tune.hpp"

namespace fs = std::filesystem;
using namespace kpbms;

namespace {

struct GlobalOptions {
    std::string config_file;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int jobs = 1;
    bool deterministic = false;
    bool keep_going = false;

    SaliencyConfig resolve_config() const {
        SaliencyConfig config;
        if (!config_file.empty()) config = read_config_file(config_file);
        if (seed_given) config.seed = seed;
        if (deterministic) config.sampling = SamplingMode::evenly_spaced;
        config.validate();
        return config;
    }
};

// Prints load-report problems; returns false when they should abort.
bool report_load_problems(const DatasetIndex& index, bool keep_going) {
    for (const auto& msg : index.report.skipped)
        std::cerr << "skipped: " << msg << "\n";
    for (const auto& msg : index.report.failures)
        std::cerr << "failed: " << msg << "\n";
    const std::size_t problems =
        index.report.skipped.size() + index.report.failures.size();
    if (problems > 0) {
        std::cerr << problems << " of " << index.report.scanned
                  << " scanned images unusable ("
                  << index.entries.size() << " loaded)\n";
        if (!keep_going) {
            std::cerr << "aborting; pass --keep-going to continue anyway\n";
            return false;
        }
    }
    return true;
}

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
            body(i);
    };
    std::vector<std::thread> pool;
    const int n = std::min<std::size_t>(jobs, count);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

int run_saliency(const GlobalOptions& global, const std::string& root,
                 const std::string& split, const std::string& out_dir,
                 bool per_class) {
    const SaliencyConfig config = global.resolve_config();
    const DatasetIndex index = load_dataset(root, split_from_string(split));
    if (!report_load_problems(index, global.keep_going)) return 1;
    fs::create_directories(out_dir);
    std::atomic<int> maps_written{0};
    parallel_for(index.entries.size(), global.jobs, [&](std::size_t i) {
        const DatasetEntry& entry = index.entries[i];
        const GrayImage image = read_pgm(entry.image_path);
        const SaliencyConfig stream = config.with_stream(hash_id(entry.id));
        if (per_class) {
            const auto maps = saliency_per_class(image, entry.keypoints, stream);
            for (const auto& [cls, map] : maps) {
                write_attention_map(
                    map, fs::path(out_dir) / (entry.id + "__" + to_string(cls) + ".pgm"));
                ++maps_written;
            }
        } else {
            for (std::size_t j = 0; j < entry.keypoints.size(); ++j) {
                const auto map = saliency_for_keypoint(
                    image, entry.keypoints[j],
                    stream.with_stream(static_cast<std::uint64_t>(j)),
                    [&](const std::string& msg) {
                        std::cerr << entry.id << ": " << msg << "\n";
                    });
                write_attention_map(map, fs::path(out_dir) / (entry.id + "__kp" +
                                                              std::to_string(j) +
                                                              ".pgm"));
                ++maps_written;
            }
        }
    });
    std::cout << "wrote " << maps_written << " attention maps to " << out_dir
              << "\n";
    return 0;
}

int run_bboxes(const GlobalOptions& global, const std::string& root,
               const std::string& split, const std::string& out_file,
               const std::string& yolo_dir) {
    const SaliencyConfig config = global.resolve_config();
    const DatasetIndex index = load_dataset(root, split_from_string(split));
    if (!report_load_problems(index, global.keep_going)) return 1;
    const auto items = generate_batch(index, config, global.jobs);

    std::vector<BoxSet> sets;
    std::vector<EvalReport> reports;
    for (const auto& item : items) {
        for (const auto& msg : item.warnings)
            std::cerr << item.id << ": " << msg << "\n";
        sets.push_back(item.boxes);
        reports.push_back(item.report);
    }
    write_boxsets(sets, out_file);
    std::cout << "wrote " << sets.size() << " box records to " << out_file << "\n";

    if (!yolo_dir.empty()) {
        fs::create_directories(yolo_dir);
        const std::map<LightClass, int> classes{{LightClass::direct, 0},
                                                {LightClass::indirect, 1},
                                                {LightClass::unspecified, 2}};
        for (std::size_t i = 0; i < items.size(); ++i) {
            const DatasetEntry& entry = index.entries[i];
            std::ofstream out(fs::path(yolo_dir) / (entry.id + ".txt"));
            out << export_yolo(items[i].boxes, {entry.width, entry.height}, classes);
        }
        std::cout << "wrote YOLO labels to " << yolo_dir << "\n";
    }
    if (!reports.empty()) std::cout << report_to_table(aggregate(reports));
    return 0;
}

int run_evaluate(const GlobalOptions& global, const std::string& root,
                 const std::string& split, const std::string& boxes_file,
                 const std::string& json_out, bool strict_classes) {
    const SaliencyConfig config = global.resolve_config();
    const DatasetIndex index = load_dataset(root, split_from_string(split));
    if (!report_load_problems(index, global.keep_going)) return 1;

    EvalOptions options;
    options.class_strict = strict_classes;
    std::vector<EvalReport> reports(index.entries.size());
    if (!boxes_file.empty()) {
        std::map<std::string, BoxSet> by_id;
        for (auto& set : read_boxsets(boxes_file)) by_id[set.image_id] = set;
        std::size_t matched = 0;
        for (std::size_t i = 0; i < index.entries.size(); ++i) {
            const auto it = by_id.find(index.entries[i].id);
            const BoxSet empty;
            if (it != by_id.end()) ++matched;
            reports[i] = evaluate(it == by_id.end() ? empty : it->second,
                                  index.entries[i].keypoints, options);
        }
        std::cout << "evaluated " << matched << " box records against "
                  << index.entries.size() << " annotated images\n";
    } else {
        const auto items = generate_batch(index, config, global.jobs);
        for (std::size_t i = 0; i < items.size(); ++i)
            reports[i] = evaluate(items[i].boxes, index.entries[i].keypoints, options);
    }
    if (reports.empty()) {
        std::cerr << "nothing to evaluate\n";
        return 1;
    }
    const EvalReport total = aggregate(reports);
    std::cout << report_to_table(total);
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        out << report_to_json(total) << "\n";
        std::cout << "wrote report to " << json_out << "\n";
    }
    return 0;
}

int run_tune(const GlobalOptions& global, const std::string& root,
             const std::string& split, int budget, const std::string& method,
             double gamma, int startup, const std::string& trials_out,
             const std::string& best_out) {
    const SaliencyConfig baseline = global.resolve_config();
    const DatasetIndex index = load_dataset(root, split_from_string(split));
    if (!report_load_problems(index, global.keep_going)) return 1;
    if (index.entries.empty()) {
        std::cerr << "empty dataset\n";
        return 1;
    }
    const auto dataset = load_samples(index);

    std::ofstream trials(trials_out);
    if (!trials) {
        std::cerr << "cannot write " << trials_out << "\n";
        return 1;
    }
    const bool timestamps = !global.deterministic;
    const auto on_trial = [&](const Trial& trial) {
        trials << trial_to_jsonl(trial, timestamps) << "\n";
        trials.flush();
    };

    SearchSpace space;
    SearchResult result;
    if (method == "tpe") {
        result = tpe_search(space, dataset, budget, baseline.seed, gamma, startup,
                            baseline, on_trial);
    } else if (method == "random") {
        result = random_search(space, dataset, budget, baseline.seed, baseline,
                               on_trial);
    } else {
        std::cerr << "unknown method: " << method << " (use tpe or random)\n";
        return 1;
    }

    SaliencyConfig best = result.best.config;
    best.seed = baseline.seed;
    write_config_file(best, best_out);
    std::cout << "baseline objective " << result.log.front().objective
              << ", best objective " << result.best.objective << " (trial "
              << result.best.index << ")\n"
              << "wrote " << result.log.size() << " trials to " << trials_out
              << " and the best config to " << best_out << "\n";
    return 0;
}

int run_compare_bms(const GlobalOptions& global, const std::string& root,
                    const std::string& split, const std::string& out_dir) {
    const SaliencyConfig config = global.resolve_config();
    const DatasetIndex index = load_dataset(root, split_from_string(split));
    if (!report_load_problems(index, global.keep_going)) return 1;
    fs::create_directories(out_dir);
    parallel_for(index.entries.size(), global.jobs, [&](std::size_t i) {
        const DatasetEntry& entry = index.entries[i];
        const GrayImage image = read_pgm(entry.image_path);
        const SaliencyConfig stream = config.with_stream(hash_id(entry.id));
        write_attention_map(mean_bms_saliency(image, stream),
                            fs::path(out_dir) / (entry.id + "__bms.pgm"));
        // context-aware map over all keypoints of the image
        std::map<LightClass, AttentionMap> per_class =
            saliency_per_class(image, entry.keypoints, stream);
        AttentionMap combined(image.width(), image.height());
        if (!per_class.empty()) {
            std::vector<AttentionMap> maps;
            for (auto& [cls, map] : per_class) maps.push_back(std::move(map));
            combined = mean_attention(maps, static_cast<int>(maps.size()));
        }
        write_attention_map(combined,
                            fs::path(out_dir) / (entry.id + "__context.pgm"));
    });
    std::cout << "wrote " << 2 * index.entries.size() << " comparison maps to "
              << out_dir << "\n";
    return 0;
}

int run_fixtures(const std::string& out_dir, const std::string& kind, int count,
                 int width, int height, std::uint64_t seed) {
    FixtureOptions options;
    options.kind = fixture_kind_from_string(kind);
    options.count = count;
    options.width = width;
    options.height = height;
    options.seed = seed;
    const auto samples = make_fixtures(options);
    write_fixture_dataset(samples, out_dir);
    std::cout << "wrote " << samples.size() << " " << kind << " fixtures to "
              << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Keypoint-seeded Boolean-map saliency: attention maps, box "
                 "generation, metrics and tuning for sparse light annotations"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_file,
                   "configuration file (key=value lines)");
    auto* seed_opt =
        app.add_option("--seed", global.seed, "seed for threshold sampling");
    app.add_option("--jobs", global.jobs, "parallel worker threads")
        ->check(CLI::PositiveNumber);
    app.add_flag("--deterministic", global.deterministic,
                 "force evenly spaced threshold sampling");
    app.add_flag("--keep-going", global.keep_going,
                 "continue past dataset load failures");

    std::string root;
    std::string split = "all";
    std::string out_dir = "out";
    std::string out_file = "boxes.jsonl";
    std::string yolo_dir;
    std::string boxes_file;
    std::string json_out;
    std::string method = "tpe";
    std::string kind = "clean";
    bool per_class = false;
    bool strict_classes = false;
    int budget = 40;
    double gamma = 0.25;
    int startup = 10;
    std::string trials_out = "trials.jsonl";
    std::string best_out = "best.cfg";
    int count = 200;
    int width = 192;
    int height = 144;
    std::uint64_t fixture_seed = 1;

    auto* saliency_cmd =
        app.add_subcommand("saliency", "write attention maps for a dataset split");
    saliency_cmd->add_option("--dataset", root, "dataset root")->required();
    saliency_cmd->add_option("--split", split, "train|val|test|all");
    saliency_cmd->add_option("--out", out_dir, "output directory");
    saliency_cmd->add_flag("--per-class", per_class,
                           "one map per keypoint class instead of per keypoint");

    auto* bboxes_cmd =
        app.add_subcommand("bboxes", "generate bounding boxes for a dataset split");
    bboxes_cmd->add_option("--dataset", root, "dataset root")->required();
    bboxes_cmd->add_option("--split", split, "train|val|test|all");
    bboxes_cmd->add_option("--out", out_file, "output JSON-lines file");
    bboxes_cmd->add_option("--yolo-dir", yolo_dir,
                           "also write YOLO label files here");

    auto* evaluate_cmd = app.add_subcommand(
        "evaluate", "score generated or stored boxes against annotations");
    evaluate_cmd->add_option("--dataset", root, "dataset root")->required();
    evaluate_cmd->add_option("--split", split, "train|val|test|all");
    evaluate_cmd->add_option("--boxes", boxes_file,
                             "JSON-lines box file (default: generate)");
    evaluate_cmd->add_option("--json-out", json_out, "also write the report as JSON");
    evaluate_cmd->add_flag("--strict-classes", strict_classes,
                           "require box and keypoint classes to match");

    auto* tune_cmd =
        app.add_subcommand("tune", "optimize saliency/box hyperparameters");
    tune_cmd->add_option("--dataset", root, "dataset root")->required();
    tune_cmd->add_option("--split", split, "train|val|test|all");
    tune_cmd->add_option("--budget", budget, "number of trials")
        ->check(CLI::PositiveNumber);
    tune_cmd->add_option("--method", method, "tpe or random");
    tune_cmd->add_option("--gamma", gamma, "good/bad split quantile");
    tune_cmd->add_option("--startup", startup, "random trials before modeling");
    tune_cmd->add_option("--trials-out", trials_out, "trial log (JSON lines)");
    tune_cmd->add_option("--best-out", best_out, "best configuration file");

    auto* compare_cmd = app.add_subcommand(
        "compare-bms",
        "write border-seeded baseline and keypoint-seeded maps side by side");
    compare_cmd->add_option("--dataset", root, "dataset root")->required();
    compare_cmd->add_option("--split", split, "train|val|test|all");
    compare_cmd->add_option("--out", out_dir, "output directory");

    auto* fixtures_cmd = app.add_subcommand(
        "fixtures", "write a synthetic dataset of annotated light scenes");
    fixtures_cmd->add_option("--out", out_dir, "output directory")->required();
    fixtures_cmd->add_option("--kind", kind, "clean|hard|tuning");
    fixtures_cmd->add_option("--count", count, "number of images")
        ->check(CLI::PositiveNumber);
    fixtures_cmd->add_option("--width", width, "image width");
    fixtures_cmd->add_option("--height", height, "image height");
    fixtures_cmd->add_option("--seed", fixture_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);
    global.seed_given = seed_opt->count() > 0;

    try {
        if (saliency_cmd->parsed())
            return run_saliency(global, root, split, out_dir, per_class);
        if (bboxes_cmd->parsed())
            return run_bboxes(global, root, split, out_file, yolo_dir);
        if (evaluate_cmd->parsed())
            return run_evaluate(global, root, split, boxes_file, json_out,
                                strict_classes);
        if (tune_cmd->parsed())
            return run_tune(global, root, split, budget, method, gamma, startup,
                            trials_out, best_out);
        if (compare_cmd->parsed())
            return run_compare_bms(global, root, split, out_dir);
        if (fixtures_cmd->parsed())
            return run_fixtures(out_dir, kind, count, width, height, fixture_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
