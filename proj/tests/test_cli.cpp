// End-to-end checks of the command-line surface. The binary path comes
// from the DUSKSEG_CLI environment variable (set by ctest).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "duskseg/manifest.hpp"
#include "duskseg/raster_io.hpp"
#include "duskseg/soft_tensor_io.hpp"
#include "testutil.hpp"

using namespace duskseg;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("DUSKSEG_CLI");
    REQUIRE_MESSAGE(p != nullptr, "DUSKSEG_CLI must point at the duskseg binary");
    return p;
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    std::FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    RunResult r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("duskseg_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path fixture_dir() {
    const char* p = std::getenv("DUSKSEG_FIXTURES");
    REQUIRE_MESSAGE(p != nullptr, "DUSKSEG_FIXTURES must point at tests/fixtures");
    return p;
}

void write_eval_fixture(const fs::path& dir, int images, int w, int h, bool soft,
                        unsigned seed) {
    std::mt19937 rng(seed);
    fs::create_directories(dir / "gt");
    fs::create_directories(dir / "mask");
    fs::create_directories(dir / (soft ? "soft" : "pred"));
    for (int i = 0; i < images; ++i) {
        const std::string id = "img_" + std::to_string(i);
        write_label_map(dir / "gt" / (id + ".png"), testutil::random_labels(w, h, 19, rng, 0.1));
        write_invalid_mask(dir / "mask" / (id + ".png"), testutil::random_mask(w, h, rng));
        if (soft)
            write_soft_tensor(dir / "soft" / (id + ".sftp"), testutil::random_soft(w, h, 19, rng));
        else
            write_label_map(dir / "pred" / (id + ".png"),
                            testutil::random_pred(w, h, 19, rng, 0.2));
    }
}

} // namespace

TEST_CASE("evaluate with hard predictions gives a single-point curve") {
    TempDir tmp;
    write_eval_fixture(tmp.path, 2, 16, 16, false, 1);
    const fs::path csv = tmp.path / "curve.csv";
    const RunResult r = run_cli("evaluate --gt " + (tmp.path / "gt").string() + " --mask " +
                                (tmp.path / "mask").string() + " --pred " +
                                (tmp.path / "pred").string() + " --curve-out " + csv.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("mean IoU") != std::string::npos);
    CHECK(count_lines(slurp(csv)) == 2);  // header + one theta row
}

TEST_CASE("evaluate with soft tensors and default grid writes 101 rows") {
    TempDir tmp;
    write_eval_fixture(tmp.path, 2, 12, 12, true, 2);
    const fs::path csv = tmp.path / "curve.csv";
    const fs::path svg = tmp.path / "curve.svg";
    const RunResult r = run_cli("evaluate --gt " + (tmp.path / "gt").string() + " --mask " +
                                (tmp.path / "mask").string() + " --soft " +
                                (tmp.path / "soft").string() + " --curve-out " + csv.string() +
                                " --plot-out " + svg.string());
    CHECK(r.exit_code == 0);
    CHECK(count_lines(slurp(csv)) == 102);  // header + 101 theta rows
    CHECK(slurp(svg).find("<svg") != std::string::npos);
}

TEST_CASE("evaluate rejects inconsistent options with exit 2") {
    TempDir tmp;
    write_eval_fixture(tmp.path, 1, 8, 8, false, 3);
    const RunResult both = run_cli("evaluate --gt " + (tmp.path / "gt").string() + " --mask " +
                                   (tmp.path / "mask").string());
    CHECK(both.exit_code == 2);  // neither --pred nor --soft

    const RunResult missing = run_cli("evaluate --gt " + (tmp.path / "gt").string());
    CHECK(missing.exit_code == 2);  // required flag absent
}

TEST_CASE("match reproduces the committed golden table") {
    TempDir tmp;
    const fs::path out = tmp.path / "table.csv";
    const RunResult r =
        run_cli("match --queries " + (fixture_dir() / "match_queries.jsonl").string() +
                " --refs " + (fixture_dir() / "match_refs.jsonl").string() + " --max-dist 50 " +
                "--out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(slurp(out) == slurp(fixture_dir() / "match_golden.csv"));
}

TEST_CASE("validate flags illegal rasters with exit 2") {
    TempDir tmp;
    fs::create_directories(tmp.path / "labels");
    fs::create_directories(tmp.path / "masks");
    SemanticLabelMap bad{Plane<std::uint8_t>(8, 8, 0)};
    bad.px.at(3, 3) = 40;  // above C-1, below ignore
    write_label_map(tmp.path / "labels" / "a.png", bad);
    write_invalid_mask(tmp.path / "masks" / "a.png", InvalidMask{Plane<std::uint8_t>(8, 8, 0)});
    const RunResult r = run_cli("validate --labels " + (tmp.path / "labels").string() +
                                " --masks " + (tmp.path / "masks").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("illegal") != std::string::npos);

    SemanticLabelMap good{Plane<std::uint8_t>(8, 8, 5)};
    write_label_map(tmp.path / "labels" / "a.png", good);
    const RunResult ok = run_cli("validate --labels " + (tmp.path / "labels").string() +
                                 " --masks " + (tmp.path / "masks").string());
    CHECK(ok.exit_code == 0);
}

TEST_CASE("validate checks manifest file references") {
    TempDir tmp;
    std::vector<ManifestRecord> records(1);
    records[0].id = "a";
    records[0].image_path = "missing.png";
    records[0].domain = "nighttime";
    write_manifest(tmp.path / "m.jsonl", records);
    const RunResult r = run_cli("validate --manifest " + (tmp.path / "m.jsonl").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("missing") != std::string::npos);
}

TEST_CASE("refine produces both outputs") {
    TempDir tmp;
    std::mt19937 rng(5);
    write_soft_tensor(tmp.path / "dark.sftp", testutil::random_soft(16, 12, 19, rng));
    write_soft_tensor(tmp.path / "day.sftp", testutil::random_soft(16, 12, 19, rng));
    write_rgb_png(tmp.path / "frame.png", testutil::random_rgb(16, 12, rng));

    const RunResult r = run_cli(
        "refine --dark-soft " + (tmp.path / "dark.sftp").string() + " --dark-image " +
        (tmp.path / "frame.png").string() + " --day-soft " + (tmp.path / "day.sftp").string() +
        " --sigma-s 2 --downsample 1 --out-soft " + (tmp.path / "refined.sftp").string() +
        " --out-labels " + (tmp.path / "refined.png").string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(tmp.path / "refined.sftp"));
    CHECK(fs::exists(tmp.path / "refined.png"));
    const SoftPredictionTensor refined = read_soft_tensor(tmp.path / "refined.sftp");
    CHECK(refined.width() == 16);
    CHECK(refined.height() == 12);
}

TEST_CASE("consistency subcommand reports agreement") {
    TempDir tmp;
    std::mt19937 rng(6);
    for (const char* side : {"a", "b"}) {
        fs::create_directories(tmp.path / side / "labels");
        fs::create_directories(tmp.path / side / "masks");
    }
    const SemanticLabelMap labels = testutil::random_labels(16, 16, 19, rng, 0.1);
    const InvalidMask mask = testutil::random_mask(16, 16, rng);
    write_label_map(tmp.path / "a" / "labels" / "x.png", labels);
    write_label_map(tmp.path / "b" / "labels" / "x.png", labels);
    write_invalid_mask(tmp.path / "a" / "masks" / "x.png", mask);
    write_invalid_mask(tmp.path / "b" / "masks" / "x.png", mask);

    const RunResult r = run_cli("consistency --a-labels " + (tmp.path / "a/labels").string() +
                                " --a-masks " + (tmp.path / "a/masks").string() + " --b-labels " +
                                (tmp.path / "b/labels").string() + " --b-masks " +
                                (tmp.path / "b/masks").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("semantic agreement: 100%") != std::string::npos);
    CHECK(r.output.find("mask agreement: 100%") != std::string::npos);
}

TEST_CASE("unknown subcommand exits with 2") {
    const RunResult r = run_cli("frobnicate");
    CHECK(r.exit_code == 2);
}

TEST_CASE("evaluate output is byte-deterministic") {
    TempDir tmp;
    write_eval_fixture(tmp.path, 2, 12, 12, true, 9);
    const std::string base = "evaluate --gt " + (tmp.path / "gt").string() + " --mask " +
                             (tmp.path / "mask").string() + " --soft " +
                             (tmp.path / "soft").string() + " --theta-grid 31 --curve-out ";
    CHECK(run_cli(base + (tmp.path / "c1.csv").string()).exit_code == 0);
    CHECK(run_cli(base + (tmp.path / "c2.csv").string()).exit_code == 0);
    CHECK(slurp(tmp.path / "c1.csv") == slurp(tmp.path / "c2.csv"));
}

TEST_CASE("class config override via environment variable") {
    TempDir tmp;
    std::ofstream(tmp.path / "classes.json")
        << R"({"names": ["a", "b", "c"], "dynamic": [], "ignore_value": 255})";
    fs::create_directories(tmp.path / "labels");
    write_label_map(tmp.path / "labels" / "x.png",
                    SemanticLabelMap{Plane<std::uint8_t>(4, 4, 5)});  // legal for C=19 only

    const std::string cmd = "validate --labels " + (tmp.path / "labels").string();
    CHECK(run_cli(cmd).exit_code == 0);  // default 19 classes

    const std::string cli = cli_path();
    std::FILE* pipe = popen(("DUSKSEG_CLASS_CONFIG=" + (tmp.path / "classes.json").string() +
                             " " + cli + " " + cmd + " 2>&1")
                                .c_str(),
                            "r");
    REQUIRE(pipe);
    char buf[4096];
    while (std::fread(buf, 1, sizeof(buf), pipe) > 0) {}
    const int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 2);  // value 5 illegal for C=3
}
