#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "kpbms/dataset.hpp"
#include "kpbms/fixtures.hpp"
#include "kpbms/pgm.hpp"
#include "kpbms/serialize.hpp"

using namespace kpbms;
namespace fs = std::filesystem;

namespace {

// Scratch directory, wiped per test case.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("kpbms_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("PGM round trips at both depths") {
    TempDir dir("pgm");
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> level(0, 65535);
    std::vector<double> data(24 * 16);
    for (auto& v : data) v = level(rng) / 65535.0;
    const GrayImage img = GrayImage::from_data(24, 16, std::move(data));

    write_pgm(img, dir.path / "a16.pgm", 16);
    const GrayImage back16 = read_pgm(dir.path / "a16.pgm");
    REQUIRE(back16.width() == 24);
    REQUIRE(back16.height() == 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 24; ++x)
            CHECK(back16.at(x, y) == doctest::Approx(img.at(x, y)).epsilon(1e-9));

    write_pgm(img, dir.path / "a8.pgm", 8);
    const GrayImage back8 = read_pgm(dir.path / "a8.pgm");
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 24; ++x)
            CHECK(std::abs(back8.at(x, y) - img.at(x, y)) <= 0.5 / 255 + 1e-12);

    CHECK(read_pgm_dims(dir.path / "a16.pgm") == std::pair<int, int>{24, 16});

    // ASCII P2 with comments
    std::ofstream ascii(dir.path / "ascii.pgm");
    ascii << "P2\n# comment line\n3 2\n255\n0 128 255\n64 32 16\n";
    ascii.close();
    const GrayImage parsed = read_pgm(dir.path / "ascii.pgm");
    CHECK(parsed.at(1, 0) == doctest::Approx(128.0 / 255));
    CHECK(parsed.at(2, 1) == doctest::Approx(16.0 / 255));

    std::ofstream bad(dir.path / "bad.pgm");
    bad << "P6\n3 2\n255\n";
    bad.close();
    CHECK_THROWS_AS(read_pgm(dir.path / "bad.pgm"), std::runtime_error);
    CHECK_THROWS_AS(read_pgm(dir.path / "missing.pgm"), std::runtime_error);
}

TEST_CASE("attention maps survive the export round trip") {
    TempDir dir("attention");
    AttentionMap map(12, 8);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> value(0.0, 0.02);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x) map.set(x, y, value(rng));
    write_attention_map(map, dir.path / "att.pgm", 16);
    CHECK(fs::exists(dir.path / "att.pgm.json"));
    const AttentionMap back = read_attention_map(dir.path / "att.pgm");
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x)
            CHECK(back.at(x, y) ==
                  doctest::Approx(map.at(x, y)).epsilon(1e-4));

    // all-zeros map: scale sidecar records max 0
    write_attention_map(AttentionMap(4, 4), dir.path / "zero.pgm");
    const AttentionMap zero = read_attention_map(dir.path / "zero.pgm");
    CHECK(zero.max_value() == 0.0);
}

TEST_CASE("BoxSet JSON lines round trip") {
    BoxSet set;
    set.image_id = "img_0001";
    BoundingBox box;
    box.x_min = 1;
    box.y_min = 2;
    box.x_max = 9;
    box.y_max = 12;
    box.cls = LightClass::direct;
    box.source_keypoints = {0, 2};
    set.boxes.push_back(box);
    const std::string line = boxset_to_jsonl(set);
    const BoxSet parsed = boxset_from_jsonl(line);
    CHECK(parsed.image_id == "img_0001");
    REQUIRE(parsed.boxes.size() == 1);
    CHECK(same_extent(parsed.boxes[0], box));
    CHECK(parsed.boxes[0].cls == LightClass::direct);
    CHECK(parsed.boxes[0].source_keypoints == std::vector<int>{0, 2});

    TempDir dir("jsonl");
    write_boxsets({set, set}, dir.path / "boxes.jsonl");
    CHECK(read_boxsets(dir.path / "boxes.jsonl").size() == 2);

    CHECK_THROWS(boxset_from_jsonl("{not json"));
}

TEST_CASE("YOLO export normalizes exactly as documented") {
    BoxSet set;
    BoundingBox box;
    box.x_min = 10;
    box.y_min = 20;
    box.x_max = 50;
    box.y_max = 60;
    box.cls = LightClass::direct;
    set.boxes.push_back(box);
    const std::map<LightClass, int> classes{{LightClass::direct, 0},
                                            {LightClass::indirect, 1}};
    CHECK(export_yolo(set, {100, 100}, classes) ==
          "0 0.300000 0.400000 0.400000 0.400000\n");

    CHECK(export_yolo({}, {100, 100}, classes).empty());

    // round trip within one pixel
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> coord_x(0, 99);
    std::uniform_int_distribution<int> coord_y(0, 79);
    for (int i = 0; i < 100; ++i) {
        BoxSet r;
        BoundingBox b;
        int x0 = coord_x(rng), x1 = coord_x(rng), y0 = coord_y(rng), y1 = coord_y(rng);
        b.x_min = std::min(x0, x1);
        b.x_max = std::max(x0, x1);
        b.y_min = std::min(y0, y1);
        b.y_max = std::max(y0, y1);
        b.cls = LightClass::indirect;
        r.boxes.push_back(b);
        const std::string line = export_yolo(r, {100, 80}, classes);
        int cls;
        double cx, cy, w, h;
        REQUIRE(std::sscanf(line.c_str(), "%d %lf %lf %lf %lf", &cls, &cx, &cy, &w,
                            &h) == 5);
        CHECK(cls == 1);
        CHECK(std::abs(cx * 100 - 0.5 * (b.x_min + b.x_max)) <= 1.0);
        CHECK(std::abs(cy * 80 - 0.5 * (b.y_min + b.y_max)) <= 1.0);
        CHECK(std::abs(w * 100 - (b.x_max - b.x_min)) <= 1.0);
        CHECK(std::abs(h * 80 - (b.y_max - b.y_min)) <= 1.0);
    }

    BoxSet outside;
    BoundingBox far_box;
    far_box.x_min = far_box.y_min = 0;
    far_box.x_max = 120;
    far_box.y_max = 5;
    far_box.cls = LightClass::direct;
    outside.boxes.push_back(far_box);
    CHECK_THROWS_AS(export_yolo(outside, {100, 100}, classes),
                    std::invalid_argument);
}

TEST_CASE("config files round trip and reject junk") {
    TempDir dir("config");
    SaliencyConfig config;
    config.alpha = 0.55;
    config.n_thresholds = 100;
    config.blob_fraction = 0.3;
    config.connectivity = Connectivity::eight;
    config.sampling = SamplingMode::evenly_spaced;
    config.seed = 42;
    write_config_file(config, dir.path / "run.cfg");
    const SaliencyConfig back = read_config_file(dir.path / "run.cfg");
    CHECK(back.alpha == doctest::Approx(0.55));
    CHECK(back.n_thresholds == 100);
    CHECK(back.blob_fraction == doctest::Approx(0.3));
    CHECK(back.connectivity == Connectivity::eight);
    CHECK(back.sampling == SamplingMode::evenly_spaced);
    CHECK(back.seed == 42);

    std::ofstream bad(dir.path / "bad.cfg");
    bad << "alpha=0.5\nwhatami=3\n";
    bad.close();
    CHECK_THROWS_AS(read_config_file(dir.path / "bad.cfg"), std::runtime_error);

    std::ofstream commented(dir.path / "ok.cfg");
    commented << "# tuned on the small set\nalpha = 0.25\n\nn_thresholds=8\n";
    commented.close();
    CHECK(read_config_file(dir.path / "ok.cfg").alpha == doctest::Approx(0.25));
}

TEST_CASE("trial log lines carry config and objective") {
    Trial trial;
    trial.index = 3;
    trial.config.alpha = 0.5;
    trial.objective = 0.75;
    const std::string deterministic = trial_to_jsonl(trial, false);
    CHECK(deterministic.find("\"timestamp\"") == std::string::npos);
    CHECK(deterministic.find("\"objective\":0.75") != std::string::npos);
    CHECK(trial_to_jsonl(trial, true).find("\"timestamp\"") != std::string::npos);
}

TEST_CASE("fixture datasets round trip through load_dataset") {
    TempDir dir("fixtures");
    FixtureOptions options;
    options.kind = FixtureKind::clean;
    options.count = 3;
    options.width = 64;
    options.height = 48;
    options.seed = 9;
    const auto samples = make_fixtures(options);
    write_fixture_dataset(samples, dir.path);

    const DatasetIndex index = load_dataset(dir.path, Split::all);
    REQUIRE(index.entries.size() == 3);
    CHECK(index.report.skipped.empty());
    CHECK(index.report.failures.empty());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const DatasetSample loaded = load_sample(index.entries[i]);
        CHECK(loaded.id == samples[i].id);
        REQUIRE(loaded.keypoints.size() == samples[i].keypoints.size());
        for (std::size_t k = 0; k < loaded.keypoints.size(); ++k)
            CHECK(loaded.keypoints[k] == samples[i].keypoints[k]);
        // 16-bit quantized at generation time, so pixel-exact on disk
        for (int y = 0; y < loaded.image.height(); ++y)
            for (int x = 0; x < loaded.image.width(); ++x)
                CHECK(loaded.image.at(x, y) == samples[i].image.at(x, y));
    }
}

TEST_CASE("load_dataset reports partial failures without aborting") {
    TempDir dir("partial");
    FixtureOptions options;
    options.count = 3;
    options.width = 48;
    options.height = 48;
    const auto samples = make_fixtures(options);
    write_fixture_dataset(samples, dir.path);

    // corrupt one annotation
    std::ofstream corrupt(dir.path / "annotations" / (samples[1].id + ".json"));
    corrupt << "{broken";
    corrupt.close();

    const DatasetIndex index = load_dataset(dir.path, Split::all);
    CHECK(index.entries.size() == 2);
    REQUIRE(index.report.failures.size() == 1);
    CHECK(index.report.failures[0].find(samples[1].id) != std::string::npos);

    // out-of-bounds keypoint names the image and keypoint
    std::ofstream oob(dir.path / "annotations" / (samples[2].id + ".json"));
    oob << R"({"image": ")" << samples[2].id
        << R"(", "keypoints": [{"x": 4000, "y": 2, "direct": true}]})";
    oob.close();
    const DatasetIndex revalidated = load_dataset(dir.path, Split::all);
    CHECK(revalidated.entries.size() == 1);
    bool named = false;
    for (const auto& failure : revalidated.report.failures)
        named = named || (failure.find(samples[2].id) != std::string::npos &&
                          failure.find("4000") != std::string::npos);
    CHECK(named);

    // truncated image raster: rejected at scan
    std::ofstream fixed(dir.path / "annotations" / (samples[2].id + ".json"));
    fixed << R"({"image": ")" << samples[2].id
          << R"(", "keypoints": [{"x": 2, "y": 2, "direct": true}]})";
    fixed.close();
    {
        std::ifstream full(dir.path / "images" / (samples[2].id + ".pgm"),
                           std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(full)),
                          std::istreambuf_iterator<char>());
        std::ofstream cut(dir.path / "images" / (samples[2].id + ".pgm"),
                          std::ios::binary | std::ios::trunc);
        cut.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    const DatasetIndex truncated = load_dataset(dir.path, Split::all);
    CHECK(truncated.entries.size() == 1);  // only samples[0] survives
    bool reported = false;
    for (const auto& failure : truncated.report.failures)
        reported = reported || failure.find("truncated") != std::string::npos;
    CHECK(reported);

    // missing annotation: skipped, not failed
    fs::remove(dir.path / "annotations" / (samples[0].id + ".json"));
    const DatasetIndex skipped = load_dataset(dir.path, Split::all);
    CHECK(skipped.entries.empty());
    CHECK(skipped.report.skipped.size() == 1);

    CHECK_THROWS_AS(load_dataset(dir.path / "nowhere", Split::all),
                    std::runtime_error);
}

TEST_CASE("split layouts resolve train/val/test and all") {
    TempDir dir("splits");
    FixtureOptions options;
    options.count = 2;
    options.width = 48;
    options.height = 48;
    write_fixture_dataset(make_fixtures(options), dir.path / "train");
    options.seed = 2;
    write_fixture_dataset(make_fixtures(options), dir.path / "test");

    CHECK(load_dataset(dir.path, Split::train).entries.size() == 2);
    CHECK(load_dataset(dir.path, Split::test).entries.size() == 2);
    CHECK(load_dataset(dir.path, Split::all).entries.size() == 4);
    CHECK_THROWS_AS(load_dataset(dir.path, Split::val), std::runtime_error);
}

TEST_CASE("generate_batch is order-stable across job counts") {
    TempDir dir("batch");
    FixtureOptions options;
    options.kind = FixtureKind::clean;
    options.count = 6;
    options.width = 96;
    options.height = 72;
    options.seed = 33;
    write_fixture_dataset(make_fixtures(options), dir.path);
    const DatasetIndex index = load_dataset(dir.path, Split::all);

    SaliencyConfig config;
    config.alpha = 0.5;
    config.n_thresholds = 12;
    config.sampling = SamplingMode::evenly_spaced;

    const auto serial = generate_batch(index, config, 1);
    const auto parallel = generate_batch(index, config, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].id == parallel[i].id);
        CHECK(boxset_to_jsonl(serial[i].boxes) == boxset_to_jsonl(parallel[i].boxes));
    }
    CHECK_THROWS_AS(generate_batch(index, config, 0), std::invalid_argument);
}
