#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <png.h>

#include "duskseg/consistency.hpp"
#include "duskseg/csv.hpp"
#include "duskseg/curve.hpp"
#include "duskseg/errors.hpp"
#include "duskseg/manifest.hpp"
#include "duskseg/raster_io.hpp"
#include "duskseg/soft_tensor_io.hpp"
#include "duskseg/svg_plot.hpp"
#include "testutil.hpp"

using namespace duskseg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("duskseg_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("label raster round trip") {
    TempDir tmp;
    std::mt19937 rng(1);
    SemanticLabelMap m = testutil::random_pred(33, 17, 19, rng, 0.1);
    m.px.at(0, 0) = 255;
    m.px.at(1, 0) = kInvalidLabel;
    const fs::path p = tmp.path / "labels.png";
    write_label_map(p, m);
    CHECK(read_label_map(p).px == m.px);
}

TEST_CASE("16-bit and multi-channel PNGs are rejected as label rasters") {
    TempDir tmp;

    // RGB file: wrong channel count
    const fs::path rgb = tmp.path / "rgb.png";
    write_rgb_png(rgb, RgbImage{Plane<Rgb8>(4, 4, Rgb8{1, 2, 3})});
    CHECK_THROWS_AS(read_label_map(rgb), validation_error);

    // 16-bit grayscale: wrong bit depth
    const fs::path deep = tmp.path / "deep.png";
    {
        std::FILE* f = std::fopen(deep.string().c_str(), "wb");
        REQUIRE(f);
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png_create_info_struct(png);
        png_init_io(png, f);
        png_set_IHDR(png, info, 4, 4, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        std::vector<std::uint16_t> row(4, 0x0102);
        for (int y = 0; y < 4; ++y)
            png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_label_map(deep), validation_error);
    CHECK_THROWS_AS(read_invalid_mask(deep), validation_error);
}

TEST_CASE("invalid mask normalization and rejection") {
    TempDir tmp;
    InvalidMask m{Plane<std::uint8_t>(8, 8, 0)};
    m.px.at(1, 1) = 255;  // legacy convention for invalid
    m.px.at(2, 2) = 1;
    const fs::path p = tmp.path / "mask.png";
    write_invalid_mask(p, m);
    const InvalidMask r = read_invalid_mask(p);
    CHECK(r.px.at(1, 1) == 1);
    CHECK(r.px.at(2, 2) == 1);
    CHECK(r.px.at(0, 0) == 0);

    InvalidMask bad{Plane<std::uint8_t>(4, 4, 7)};
    const fs::path pb = tmp.path / "bad.png";
    write_invalid_mask(pb, bad);
    CHECK_THROWS_AS(read_invalid_mask(pb), validation_error);
}

TEST_CASE("rgb image round trip and missing file") {
    TempDir tmp;
    std::mt19937 rng(2);
    const RgbImage img = testutil::random_rgb(21, 13, rng);
    const fs::path p = tmp.path / "frame.png";
    write_rgb_png(p, img);
    const RgbImage r = read_rgb_image(p);
    CHECK(r.px == img.px);
    CHECK_THROWS_AS(read_rgb_image(tmp.path / "missing.png"), io_error);
}

TEST_CASE("soft tensor file round trip is bit exact") {
    TempDir tmp;
    std::mt19937 rng(3);
    const SoftPredictionTensor t = testutil::random_soft(7, 5, 19, rng);
    const fs::path p = tmp.path / "t.sftp";
    write_soft_tensor(p, t);

    const SoftPredictionTensor raw = read_soft_tensor(p, /*normalize=*/false);
    CHECK(raw.raw() == t.raw());
    CHECK(raw.width() == 7);
    CHECK(raw.height() == 5);
    CHECK(raw.channels() == 19);

    // write(read(file)) reproduces the file byte for byte
    const fs::path p2 = tmp.path / "t2.sftp";
    write_soft_tensor(p2, raw);
    CHECK(slurp(p) == slurp(p2));

    // header is 16 bytes, payload H*W*C*4
    CHECK(fs::file_size(p) == 16 + 7 * 5 * 19 * 4);
}

TEST_CASE("uniform 2x2x2 tensor layout") {
    TempDir tmp;
    const SoftPredictionTensor t =
        SoftPredictionTensor::wrap_unchecked(2, 2, 2, std::vector<float>(8, 0.5f));
    const fs::path p = tmp.path / "u.sftp";
    write_soft_tensor(p, t);
    CHECK(fs::file_size(p) == 16 + 32);
    const std::string bytes = slurp(p);
    CHECK(bytes.substr(0, 4) == "SFTP");
    CHECK(read_soft_tensor(p, false).raw() == t.raw());
}

TEST_CASE("soft tensor error paths") {
    TempDir tmp;
    const fs::path p = tmp.path / "t.sftp";
    const SoftPredictionTensor t =
        SoftPredictionTensor::wrap_unchecked(2, 2, 2, std::vector<float>(8, 0.5f));
    write_soft_tensor(p, t);

    // truncated payload
    std::string bytes = slurp(p);
    std::ofstream(tmp.path / "trunc.sftp", std::ios::binary)
        << bytes.substr(0, bytes.size() - 1);
    CHECK_THROWS_AS(read_soft_tensor(tmp.path / "trunc.sftp"), validation_error);

    // bad magic
    bytes[0] = 'X';
    std::ofstream(tmp.path / "magic.sftp", std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_soft_tensor(tmp.path / "magic.sftp"), validation_error);

    // channel sums far from 1
    const SoftPredictionTensor bad =
        SoftPredictionTensor::wrap_unchecked(2, 2, 2, std::vector<float>(8, 0.45f));
    write_soft_tensor(tmp.path / "bad.sftp", bad);
    CHECK_THROWS_AS(read_soft_tensor(tmp.path / "bad.sftp"), validation_error);

    // NaN payload
    std::vector<float> nan_data(8, 0.5f);
    nan_data[3] = std::numeric_limits<float>::quiet_NaN();
    write_soft_tensor(tmp.path / "nan.sftp",
                      SoftPredictionTensor::wrap_unchecked(2, 2, 2, nan_data));
    CHECK_THROWS_AS(read_soft_tensor(tmp.path / "nan.sftp"), validation_error);
}

TEST_CASE("manifest round trip and validation") {
    TempDir tmp;
    std::vector<ManifestRecord> records;
    ManifestRecord a;
    a.id = "frame_000";
    a.image_path = "img/frame_000.png";
    a.domain = "nighttime";
    a.gps = GpsFix{47.37, 8.54, 12.5};
    records.push_back(a);
    ManifestRecord b;
    b.id = "frame_001";
    b.image_path = "img/frame_001.png";
    b.label_path = "lbl/frame_001.png";
    b.domain = "nighttime";
    b.loss_weight = 0.5;
    b.origin = "pseudo_real";
    records.push_back(b);

    const fs::path p = tmp.path / "set.jsonl";
    write_manifest(p, records);
    const DatasetManifest m = read_manifest(p);
    REQUIRE(m.records.size() == 2);
    CHECK(m.records[0].id == "frame_000");
    CHECK(m.records[0].gps->lat == doctest::Approx(47.37));
    CHECK(m.records[1].loss_weight == doctest::Approx(0.5));
    CHECK(*m.records[1].origin == "pseudo_real");
    CHECK(m.base_dir == tmp.path);

    // byte-identical re-serialization
    const fs::path p2 = tmp.path / "set2.jsonl";
    write_manifest(p2, m.records);
    CHECK(slurp(p) == slurp(p2));

    // duplicate ids rejected
    records[1].id = "frame_000";
    write_manifest(p2, records);
    CHECK_THROWS_AS(read_manifest(p2), validation_error);

    // malformed JSON rejected
    std::ofstream(tmp.path / "bad.jsonl") << "{not json}\n";
    CHECK_THROWS_AS(read_manifest(tmp.path / "bad.jsonl"), validation_error);

    // out-of-range GPS rejected
    std::ofstream(tmp.path / "gps.jsonl")
        << R"({"id":"x","image":"i.png","domain":"d","gps":{"lat":95.0,"lon":0.0}})" << "\n";
    CHECK_THROWS_AS(read_manifest(tmp.path / "gps.jsonl"), validation_error);
}

TEST_CASE("curve CSV fixed formatting") {
    UIoUCurve curve;
    CurvePoint p0;
    p0.theta = 1.0 / 19;
    p0.per_class = {0.123456789, std::nullopt};
    p0.mean_uiou = 0.123456789;
    p0.invalidated_pixels = 42;
    curve.points.push_back(p0);
    curve.argmax_index = 0;

    std::ostringstream os;
    write_curve_csv(os, curve, ClassSet({"alpha", "beta"}, {}));
    CHECK(os.str() == "theta,alpha,beta,mean_uiou,invalidated_pixels\n"
                      "0.0526316,0.123457,n/a,0.123457,42\n");
}

TEST_CASE("svg plot marks the maximum") {
    TempDir tmp;
    UIoUCurve curve;
    for (int i = 0; i < 5; ++i) {
        CurvePoint p;
        p.theta = 1.0 / 19 + i * 0.2;
        p.per_class = {0.5};
        p.mean_uiou = 0.4 + (i == 3 ? 0.1 : 0.0);
        p.invalidated_pixels = i;
        curve.points.push_back(p);
    }
    curve.argmax_index = 3;
    const fs::path p = tmp.path / "curve.svg";
    write_curve_svg(p, curve);
    const std::string svg = slurp(p);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("circle") != std::string::npos);
    CHECK(svg.find("50%") != std::string::npos);  // max labeled with its value
}

TEST_CASE("annotation consistency") {
    const ClassSet& classes = ClassSet::cityscapes19();
    std::mt19937 rng(4);
    const SemanticLabelMap labels = testutil::random_labels(16, 16, 19, rng, 0.2);
    const InvalidMask mask = testutil::random_mask(16, 16, rng);

    // identical annotations
    const ConsistencyReport same = annotation_consistency(labels, mask, labels, mask, classes);
    CHECK(*same.semantic_agreement_pct == doctest::Approx(100.0));
    CHECK(same.mask_agreement_pct == doctest::Approx(100.0));

    // half of the jointly labeled pixels disagree: flip every second one
    SemanticLabelMap flipped = labels;
    int joint = 0;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            if (labels.px.at(x, y) == 255) continue;
            if (joint++ % 2 == 0)
                flipped.px.at(x, y) = static_cast<std::uint8_t>((labels.px.at(x, y) + 1) % 19);
        }
    const ConsistencyReport half = annotation_consistency(labels, mask, flipped, mask, classes);
    CHECK(*half.semantic_agreement_pct ==
          doctest::Approx(100.0 * (joint / 2) / joint).epsilon(1e-9));

    // no jointly labeled pixels
    const SemanticLabelMap empty{Plane<std::uint8_t>(16, 16, 255)};
    const ConsistencyReport none = annotation_consistency(labels, mask, empty, mask, classes);
    CHECK(!none.semantic_agreement_pct.has_value());
    CHECK(none.mask_agreement_pct == doctest::Approx(100.0));

    // dimension mismatch
    const SemanticLabelMap small{Plane<std::uint8_t>(8, 8, 0)};
    const InvalidMask small_mask{Plane<std::uint8_t>(8, 8, 0)};
    CHECK_THROWS_AS(annotation_consistency(labels, mask, small, small_mask, classes),
                    validation_error);
}

TEST_CASE("format_sig gives six significant digits") {
    CHECK(format_sig(1.0 / 3.0) == "0.333333");
    CHECK(format_sig(123456789.0) == "1.23457e+08");
    CHECK(format_sig(1.0) == "1");
    CHECK(format_sig(0.5) == "0.5");
}

TEST_CASE("paletted PNG reads as index values") {
    TempDir tmp;
    const fs::path p = tmp.path / "pal.png";
    {
        std::FILE* f = std::fopen(p.string().c_str(), "wb");
        REQUIRE(f);
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png_create_info_struct(png);
        png_init_io(png, f);
        png_set_IHDR(png, info, 4, 2, 8, PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_color palette[4] = {{128, 64, 128}, {244, 35, 232}, {70, 70, 70}, {0, 0, 0}};
        png_set_PLTE(png, info, palette, 4);
        png_write_info(png, info);
        png_byte row0[4] = {0, 1, 2, 3};
        png_byte row1[4] = {3, 2, 1, 0};
        png_write_row(png, row0);
        png_write_row(png, row1);
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        std::fclose(f);
    }
    const SemanticLabelMap m = read_label_map(p);
    CHECK(m.width() == 4);
    CHECK(m.height() == 2);
    CHECK(m.px.at(0, 0) == 0);
    CHECK(m.px.at(1, 0) == 1);
    CHECK(m.px.at(3, 0) == 3);
    CHECK(m.px.at(0, 1) == 3);  // the palette colors themselves are ignored
}
