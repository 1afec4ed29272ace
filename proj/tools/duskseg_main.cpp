#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "duskseg/class_set.hpp"
#include "duskseg/consistency.hpp"
#include "duskseg/csv.hpp"
#include "duskseg/curriculum.hpp"
#include "duskseg/curve.hpp"
#include "duskseg/errors.hpp"
#include "duskseg/fusion.hpp"
#include "duskseg/gps.hpp"
#include "duskseg/manifest.hpp"
#include "duskseg/raster_io.hpp"
#include "duskseg/soft_tensor_io.hpp"
#include "duskseg/svg_plot.hpp"
#include "duskseg/validate.hpp"

namespace fs = std::filesystem;
using namespace duskseg;

namespace {

std::vector<std::string> stems_with_extension(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir))
        throw validation_error("not a directory: " + dir.string());
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ext)
            out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

/// Lazy per-id loader over gt/mask/prediction directories.
class DirSampleSource final : public SampleSource {
public:
    DirSampleSource(fs::path gt_dir, fs::path mask_dir, fs::path pred_dir, bool soft_mode,
                    std::vector<std::string> ids)
        : gt_dir_(std::move(gt_dir)), mask_dir_(std::move(mask_dir)),
          pred_dir_(std::move(pred_dir)), soft_mode_(soft_mode), ids_(std::move(ids)) {}

    int size() const override { return static_cast<int>(ids_.size()); }

    EvalSample load(int index) const override {
        const std::string& id = ids_[index];
        EvalSample s;
        s.gt = read_label_map(gt_dir_ / (id + ".png"));
        s.mask = read_invalid_mask(mask_dir_ / (id + ".png"));
        if (soft_mode_)
            s.soft = read_soft_tensor(pred_dir_ / (id + ".sftp"));
        else
            s.hard = read_label_map(pred_dir_ / (id + ".png"));
        return s;
    }

    const std::vector<std::string>& ids() const { return ids_; }

private:
    fs::path gt_dir_, mask_dir_, pred_dir_;
    bool soft_mode_;
    std::vector<std::string> ids_;
};

std::vector<GpsRecord> gps_records(const DatasetManifest& m, const char* what) {
    std::vector<GpsRecord> out;
    for (const auto& r : m.records) {
        if (!r.gps)
            throw validation_error(std::string(what) + " record " + r.id + " has no GPS fix");
        out.push_back({r.id, *r.gps});
    }
    return out;
}

int cmd_evaluate(const std::string& gt_dir, const std::string& mask_dir,
                 const std::string& pred_dir, const std::string& soft_dir,
                 const std::string& theta_grid_spec, const std::string& curve_out,
                 const std::string& plot_out, const std::string& class_config) {
    const ClassSet classes = ClassSet::resolve(class_config);
    if (pred_dir.empty() == soft_dir.empty())
        throw validation_error("evaluate needs exactly one of --pred or --soft");
    const bool soft_mode = !soft_dir.empty();

    std::vector<std::string> ids = stems_with_extension(gt_dir, ".png");
    if (ids.empty())
        throw validation_error("no ground-truth rasters in " + gt_dir);
    for (const auto& id : ids) {
        if (!fs::exists(fs::path(mask_dir) / (id + ".png")))
            throw validation_error("missing invalid mask for " + id);
        const fs::path pred = soft_mode ? fs::path(soft_dir) / (id + ".sftp")
                                        : fs::path(pred_dir) / (id + ".png");
        if (!fs::exists(pred))
            throw validation_error("missing prediction for " + id);
    }

    DirSampleSource source(gt_dir, mask_dir, soft_mode ? soft_dir : pred_dir, soft_mode, ids);

    std::vector<double> grid;
    if (theta_grid_spec == "exact") {
        if (!soft_mode)
            throw validation_error("exact theta grid needs soft predictions");
        grid = make_exact_theta_grid(source, classes.count());
    } else if (!theta_grid_spec.empty()) {
        int count = 0;
        try {
            count = std::stoi(theta_grid_spec);
        } catch (const std::exception&) {
            throw validation_error("--theta-grid expects a point count or \"exact\"");
        }
        grid = make_theta_grid(count, classes.count());
    } else {
        // Default: full sweep for soft predictions, the single standard-IoU
        // point for fixed hard predictions.
        grid = make_theta_grid(soft_mode ? 101 : 1, classes.count());
    }

    const UIoUCurve curve = uiou_curve(source, classes, grid);

    std::cout << "images: " << ids.size() << "\n";
    std::cout << "mean IoU (theta=1/C): " << format_sig(curve.points.front().mean_uiou) << "\n";
    std::cout << "max mean UIoU: " << format_sig(curve.max_mean_uiou()) << " at theta="
              << format_sig(curve.theta_star()) << "\n";
    if (!curve_out.empty()) write_curve_csv(curve_out, curve, classes);
    if (!plot_out.empty()) write_curve_svg(plot_out, curve);
    if (curve_out.empty() && plot_out.empty()) write_curve_csv(std::cout, curve, classes);
    return 0;
}

int cmd_refine(const std::string& dark_soft_path, const std::string& dark_image_path,
               const std::string& day_soft_path, const BilateralParams& bilateral,
               const FusionParams& fusion_params, const std::string& out_soft,
               const std::string& out_labels, const std::string& class_config) {
    const ClassSet classes = ClassSet::resolve(class_config);
    const SoftPredictionTensor dark_soft = read_soft_tensor(dark_soft_path);
    const SoftPredictionTensor day_soft = read_soft_tensor(day_soft_path);
    const RgbImage dark_img = read_rgb_image(dark_image_path);

    const RefinedPrediction refined =
        refine_guided(dark_soft, dark_img, day_soft, classes, bilateral, fusion_params);
    if (!out_soft.empty()) write_soft_tensor(out_soft, refined.soft);
    if (!out_labels.empty()) write_label_map(out_labels, refined.hard);
    std::cout << "refined " << refined.hard.width() << "x" << refined.hard.height() << " ("
              << (bilateral.downsample_factor > 1 ? "fast" : "exact") << " path)\n";
    return 0;
}

int cmd_match(const std::string& queries_path, const std::string& refs_path, double max_dist,
              bool smooth, const std::string& out_csv) {
    const DatasetManifest queries = read_manifest(queries_path);
    const DatasetManifest refs = read_manifest(refs_path);
    const CorrespondenceTable table =
        match_nearest(gps_records(queries, "query"), gps_records(refs, "reference"),
                      MatchOptions{max_dist, smooth});
    table.write_csv(out_csv);
    int matched = 0;
    for (const auto& e : table.entries) matched += e.matched ? 1 : 0;
    std::cout << "matched " << matched << "/" << table.entries.size() << "\n";
    return 0;
}

int cmd_curriculum(const std::string& config_path, const std::string& run_dir, bool dry_run,
                   const std::string& class_config) {
    const CurriculumConfig cfg = load_curriculum_config(config_path);
    CurriculumRunner runner(cfg.domains, cfg.step, ClassSet::resolve(class_config), run_dir);
    const std::vector<StepReport> reports = runner.run_all(dry_run);
    for (const auto& r : reports) std::cout << r.to_json() << "\n";
    for (const auto& r : reports)
        if (r.aborted) {
            std::cerr << "step " << r.step << " aborted: " << r.error << "\n";
            return 1;
        }
    return 0;
}

int cmd_consistency(const std::string& a_labels, const std::string& a_masks,
                    const std::string& b_labels, const std::string& b_masks,
                    const std::string& class_config) {
    const ClassSet classes = ClassSet::resolve(class_config);
    const std::vector<std::string> ids = stems_with_extension(a_labels, ".png");
    if (ids.empty())
        throw validation_error("no annotation rasters in " + a_labels);

    ConsistencyReport total;
    for (const auto& id : ids) {
        const ConsistencyReport r = annotation_consistency(
            read_label_map(fs::path(a_labels) / (id + ".png")),
            read_invalid_mask(fs::path(a_masks) / (id + ".png")),
            read_label_map(fs::path(b_labels) / (id + ".png")),
            read_invalid_mask(fs::path(b_masks) / (id + ".png")), classes);
        total += r;
    }
    std::cout << "images: " << ids.size() << "\n";
    if (total.semantic_agreement_pct)
        std::cout << "semantic agreement: " << format_sig(*total.semantic_agreement_pct) << "%\n";
    else
        std::cout << "semantic agreement: n/a (no jointly labeled pixels)\n";
    std::cout << "mask agreement: " << format_sig(total.mask_agreement_pct) << "%\n";
    return 0;
}

int cmd_validate(const std::string& manifest_path, const std::string& labels_dir,
                 const std::string& masks_dir, const std::string& class_config) {
    const ClassSet classes = ClassSet::resolve(class_config);
    if (manifest_path.empty() == labels_dir.empty())
        throw validation_error("validate needs exactly one of --manifest or --labels");

    if (!manifest_path.empty()) {
        const DatasetManifest m = read_manifest(manifest_path);
        int missing = 0;
        for (const auto& r : m.records) {
            auto check = [&](const std::string& rel, const char* what) {
                if (!fs::exists(m.resolve(rel))) {
                    std::cout << r.id << ": missing " << what << ": " << rel << "\n";
                    ++missing;
                }
            };
            check(r.image_path, "image");
            if (r.label_path) check(*r.label_path, "label");
            if (r.invalid_mask_path) check(*r.invalid_mask_path, "invalid mask");
        }
        std::cout << "records: " << m.records.size() << ", missing files: " << missing << "\n";
        return missing == 0 ? 0 : 2;
    }

    const std::vector<std::string> ids = stems_with_extension(labels_dir, ".png");
    if (ids.empty())
        throw validation_error("no label rasters in " + labels_dir);
    int bad = 0;
    for (const auto& id : ids) {
        const SemanticLabelMap labels = read_label_map(fs::path(labels_dir) / (id + ".png"));
        InvalidMask mask;
        if (!masks_dir.empty())
            mask = read_invalid_mask(fs::path(masks_dir) / (id + ".png"));
        else
            mask = InvalidMask{Plane<std::uint8_t>(labels.width(), labels.height(), 0)};
        const PairValidationReport report = validate_pair(labels, mask, classes);
        if (!report.ok()) {
            std::cout << id << ":\n" << report.to_string(classes);
            ++bad;
        } else {
            std::cout << id << ": ok, " << report.labeled_pixels << " labeled, "
                      << format_sig(report.invalid_fraction * 100.0) << "% invalid\n";
        }
    }
    return bad == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"uncertainty-aware segmentation evaluation and guided refinement toolkit"};
    app.require_subcommand(1);

    // evaluate
    std::string gt_dir, mask_dir, pred_dir, soft_dir, theta_grid_spec, curve_out, plot_out;
    std::string class_config;
    auto* evaluate = app.add_subcommand("evaluate", "UIoU / IoU over a prediction set");
    evaluate->add_option("--gt", gt_dir, "ground-truth label raster directory")->required();
    evaluate->add_option("--mask", mask_dir, "invalid mask directory")->required();
    evaluate->add_option("--pred", pred_dir, "hard prediction raster directory");
    evaluate->add_option("--soft", soft_dir, "soft prediction tensor directory");
    evaluate->add_option("--theta-grid", theta_grid_spec,
                         "grid point count, or \"exact\" for all observed confidences");
    evaluate->add_option("--curve-out", curve_out, "write the UIoU(theta) curve CSV here");
    evaluate->add_option("--plot-out", plot_out, "write an SVG plot of the curve here");
    evaluate->add_option("--classes", class_config, "class-set JSON config");

    // refine
    std::string dark_soft_path, dark_image_path, day_soft_path, out_soft, out_labels;
    BilateralParams bilateral;
    bilateral.downsample_factor = 4;  // fast path by default at camera resolution
    FusionParams fusion_params;
    auto* refine = app.add_subcommand("refine", "guided refinement of a dark prediction");
    refine->add_option("--dark-soft", dark_soft_path, "dark soft prediction (.sftp)")->required();
    refine->add_option("--dark-image", dark_image_path, "dark camera frame (PNG/JPEG)")->required();
    refine->add_option("--day-soft", day_soft_path, "daytime soft prediction (.sftp)")->required();
    refine->add_option("--sigma-s", bilateral.sigma_s, "spatial std in pixels");
    refine->add_option("--sigma-r", bilateral.sigma_r, "range std in CIELAB units");
    refine->add_option("--trunc-factor", bilateral.truncation_radius_factor,
                       "window half-width as a multiple of sigma-s");
    refine->add_option("--downsample", bilateral.downsample_factor,
                       "integer downsample factor (1 = exact path)");
    refine->add_option("--alpha-l", fusion_params.alpha_l, "guidance weight under disagreement");
    refine->add_option("--alpha-h", fusion_params.alpha_h, "default guidance weight");
    refine->add_option("--eta", fusion_params.eta, "agreement probability threshold");
    refine->add_option("--out-soft", out_soft, "output refined soft tensor (.sftp)");
    refine->add_option("--out-labels", out_labels, "output hard pseudo-label raster (.png)");
    refine->add_option("--classes", class_config, "class-set JSON config");

    // match
    std::string queries_path, refs_path, match_out;
    double max_dist = 50.0;
    bool smooth = false;
    auto* match = app.add_subcommand("match", "GPS nearest-neighbor correspondences");
    match->add_option("--queries", queries_path, "query manifest (JSONL)")->required();
    match->add_option("--refs", refs_path, "day reference manifest (JSONL)")->required();
    match->add_option("--max-dist", max_dist, "match distance ceiling in meters");
    match->add_flag("--smooth", smooth, "median-smooth GPS tracks before matching");
    match->add_option("--out", match_out, "output correspondence CSV")->required();

    // curriculum
    std::string curriculum_config, run_dir;
    bool dry_run = false;
    auto* curriculum = app.add_subcommand("curriculum", "run the adaptation schedule");
    curriculum->add_option("--config", curriculum_config, "curriculum JSON config")->required();
    curriculum->add_option("--run-dir", run_dir, "working directory for step artifacts")
        ->required();
    curriculum->add_flag("--dry-run", dry_run, "validate and report without executing");
    curriculum->add_option("--classes", class_config, "class-set JSON config");

    // consistency
    std::string a_labels, a_masks, b_labels, b_masks;
    auto* consistency = app.add_subcommand("consistency", "agreement between two annotation sets");
    consistency->add_option("--a-labels", a_labels)->required();
    consistency->add_option("--a-masks", a_masks)->required();
    consistency->add_option("--b-labels", b_labels)->required();
    consistency->add_option("--b-masks", b_masks)->required();
    consistency->add_option("--classes", class_config, "class-set JSON config");

    // validate
    std::string v_manifest, v_labels, v_masks;
    auto* validate = app.add_subcommand("validate", "check a manifest or raster directory");
    validate->add_option("--manifest", v_manifest, "manifest to check");
    validate->add_option("--labels", v_labels, "label raster directory");
    validate->add_option("--masks", v_masks, "invalid mask directory");
    validate->add_option("--classes", class_config, "class-set JSON config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is a validation failure
    }

    try {
        if (evaluate->parsed())
            return cmd_evaluate(gt_dir, mask_dir, pred_dir, soft_dir, theta_grid_spec, curve_out,
                                plot_out, class_config);
        if (refine->parsed())
            return cmd_refine(dark_soft_path, dark_image_path, day_soft_path, bilateral,
                              fusion_params, out_soft, out_labels, class_config);
        if (match->parsed())
            return cmd_match(queries_path, refs_path, max_dist, smooth, match_out);
        if (curriculum->parsed())
            return cmd_curriculum(curriculum_config, run_dir, dry_run, class_config);
        if (consistency->parsed())
            return cmd_consistency(a_labels, a_masks, b_labels, b_masks, class_config);
        if (validate->parsed())
            return cmd_validate(v_manifest, v_labels, v_masks, class_config);
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
