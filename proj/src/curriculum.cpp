#include "duskseg/curriculum.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <sys/wait.h>

#include <json.hpp>

#include "duskseg/errors.hpp"
#include "duskseg/raster_io.hpp"
#include "duskseg/soft_tensor_io.hpp"

namespace duskseg {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

bool has_placeholder(const std::string& tmpl, const std::string& key) {
    return tmpl.find("{" + key + "}") != std::string::npos;
}

std::string substitute(std::string tmpl, const std::map<std::string, std::string>& vars) {
    for (const auto& [key, value] : vars) {
        const std::string token = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = tmpl.find(token, pos)) != std::string::npos) {
            tmpl.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return tmpl;
}

struct ExecResult {
    int exit_code = -1;
    std::string output;
};

ExecResult run_command(const std::string& cmd) {
    ExecResult res;
    const std::string wrapped = "( " + cmd + " ) 2>&1";
    std::FILE* pipe = popen(wrapped.c_str(), "r");
    if (!pipe)
        throw io_error("failed to launch command: " + cmd);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
        if (res.output.size() < 65536) res.output.append(buf, n);
    }
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
    return res;
}

} // namespace

void StepConfig::check() const {
    if (!(mu > 0.0))
        throw validation_error("curriculum mu must be positive");
    if (inference_command.empty() || !has_placeholder(inference_command, "manifest") ||
        !has_placeholder(inference_command, "outdir"))
        throw validation_error("inference command needs {manifest} and {outdir} placeholders");
    if (trainer_command.empty() || !has_placeholder(trainer_command, "manifest") ||
        !has_placeholder(trainer_command, "model_out"))
        throw validation_error("trainer command needs {manifest} and {model_out} placeholders");
    if (max_corr_dist_m <= 0.0)
        throw validation_error("max correspondence distance must be positive");
    if (min_matched_fraction < 0.0 || min_matched_fraction > 1.0)
        throw validation_error("min matched fraction must lie in [0, 1]");
    bilateral.check();
    fusion.check();
}

std::vector<CurriculumStep> plan(const std::vector<DomainSpec>& domains, const StepConfig& cfg) {
    cfg.check();
    if (domains.size() < 2)
        throw validation_error("curriculum needs at least two domains");
    for (std::size_t i = 0; i < domains.size(); ++i) {
        const DomainSpec& d = domains[i];
        if (d.index != static_cast<int>(i) + 1)
            throw validation_error("domain indices must be consecutive starting at 1");
        if (!fs::exists(d.unlabeled_real))
            throw validation_error("missing real manifest for domain " + d.name + ": " +
                                   d.unlabeled_real.string());
        if (d.index > 1) {
            if (!d.labeled_synthetic)
                throw validation_error("domain " + d.name + " (index > 1) needs a synthetic manifest");
            if (!fs::exists(*d.labeled_synthetic))
                throw validation_error("missing synthetic manifest for domain " + d.name + ": " +
                                       d.labeled_synthetic->string());
        }
    }

    std::vector<CurriculumStep> steps;
    for (std::size_t i = 1; i < domains.size(); ++i) {
        CurriculumStep s;
        s.number = static_cast<int>(i);
        s.source = domains[i - 1];
        s.target = domains[i];
        s.source_index = s.source.index;
        s.target_index = s.target.index;
        s.guided = s.source_index > 1;
        steps.push_back(std::move(s));
    }
    return steps;
}

std::vector<ManifestRecord> emit_training_manifest(const DatasetManifest& synthetic,
                                                   const DatasetManifest& pseudo, double mu,
                                                   const fs::path& out_base_dir) {
    if (mu < 0.0)
        throw validation_error("mu must be non-negative");

    std::vector<ManifestRecord> out;
    std::set<std::string> label_paths;
    auto append = [&](const DatasetManifest& m, double weight, const char* origin) {
        for (const ManifestRecord& r : m.records) {
            if (!r.label_path)
                throw validation_error("training record without label: " + r.id);
            const fs::path image = fs::weakly_canonical(m.resolve(r.image_path));
            const fs::path label = fs::weakly_canonical(m.resolve(*r.label_path));
            if (!fs::exists(image))
                throw validation_error("training image missing: " + image.string());
            if (!fs::exists(label))
                throw validation_error("training label missing: " + label.string());
            if (!label_paths.insert(label.string()).second)
                throw validation_error("overlapping label path: " + label.string());

            ManifestRecord e = r;
            e.image_path = fs::relative(image, out_base_dir).string();
            e.label_path = fs::relative(label, out_base_dir).string();
            if (r.invalid_mask_path)
                e.invalid_mask_path =
                    fs::relative(fs::weakly_canonical(m.resolve(*r.invalid_mask_path)), out_base_dir)
                        .string();
            e.loss_weight = weight;
            e.origin = origin;
            out.push_back(std::move(e));
        }
    };
    append(synthetic, 1.0, "labeled_synthetic");
    append(pseudo, mu, "pseudo_real");
    return out;
}

std::string StepReport::to_json() const {
    ordered_json j;
    j["step"] = step;
    j["dry_run"] = dry_run;
    j["guided"] = guided;
    j["aborted"] = aborted;
    if (!error.empty()) j["error"] = error;
    j["images_processed"] = images_processed;
    j["pixels_refined"] = pixels_refined;
    j["matched"] = matched;
    j["unmatched"] = unmatched;
    j["inference_exit"] = inference_exit;
    j["trainer_exit"] = trainer_exit;
    if (!inference_diagnostics.empty()) j["inference_diagnostics"] = inference_diagnostics;
    if (!trainer_diagnostics.empty()) j["trainer_diagnostics"] = trainer_diagnostics;
    j["manifest"] = manifest_path;
    j["model_out"] = model_out;
    j["pseudo_dir"] = pseudo_dir;
    return j.dump(2);
}

CurriculumRunner::CurriculumRunner(std::vector<DomainSpec> domains, StepConfig cfg,
                                   ClassSet classes, fs::path run_dir)
    : domains_(std::move(domains)), cfg_(std::move(cfg)), classes_(std::move(classes)),
      run_dir_(std::move(run_dir)) {
    steps_ = plan(domains_, cfg_);
}

fs::path CurriculumRunner::step_dir(int step_number) const {
    return run_dir_ / ("step" + std::to_string(step_number));
}

std::filesystem::path CurriculumRunner::model_in_for(int step_number) const {
    if (step_number == 1) return cfg_.initial_model;
    return step_dir(step_number - 1) / "model.bin";
}

StepReport CurriculumRunner::dry_run_step(const CurriculumStep& step) const {
    StepReport report;
    report.step = step.number;
    report.dry_run = true;
    report.guided = step.guided;

    const DatasetManifest real = read_manifest(step.source.unlabeled_real);
    const DatasetManifest synthetic = read_manifest(*step.target.labeled_synthetic);
    report.images_processed = static_cast<int>(real.records.size());
    (void)synthetic;

    if (step.guided) {
        const DatasetManifest day = read_manifest(domains_.front().unlabeled_real);
        for (const auto& r : real.records)
            if (!r.gps)
                throw validation_error("guided step needs GPS on every record; missing on " + r.id);
        for (const auto& r : day.records)
            if (!r.gps)
                throw validation_error("guided step needs GPS on day records; missing on " + r.id);
    }

    const fs::path dir = step_dir(step.number);
    report.manifest_path = (dir / "train_manifest.jsonl").string();
    report.model_out = (dir / "model.bin").string();
    report.pseudo_dir = (dir / "pseudo").string();
    return report;
}

StepReport CurriculumRunner::run_step(const CurriculumStep& step, bool dry_run) {
    if (dry_run) return dry_run_step(step);

    StepReport report;
    report.step = step.number;
    report.guided = step.guided;

    const fs::path dir = step_dir(step.number);
    const fs::path soft_dir = dir / "soft";
    const fs::path pseudo_dir = dir / "pseudo";
    fs::create_directories(soft_dir);
    fs::create_directories(pseudo_dir);
    report.pseudo_dir = pseudo_dir.string();
    report.model_out = (dir / "model.bin").string();

    const DatasetManifest real = read_manifest(step.source.unlabeled_real);

    // 1. External inference on the source domain's unlabeled real images.
    const ExecResult inference = run_command(substitute(
        cfg_.inference_command, {{"manifest", step.source.unlabeled_real.string()},
                                 {"outdir", soft_dir.string()},
                                 {"model_in", model_in_for(step.number).string()}}));
    report.inference_exit = inference.exit_code;
    if (inference.exit_code != 0) {
        report.aborted = true;
        report.error = "inference command failed";
        report.inference_diagnostics = inference.output;
        return report;
    }

    // 2. Correspondences to the day domain (guided steps only).
    CorrespondenceTable corr;
    std::map<std::string, std::string> day_of;
    fs::path day_soft_dir;
    if (step.guided) {
        const DatasetManifest day = read_manifest(domains_.front().unlabeled_real);
        day_soft_dir = step_dir(1) / "soft";

        bool have_day_soft = !cfg_.regenerate_day_soft;
        if (have_day_soft)
            for (const auto& r : day.records)
                if (!fs::exists(day_soft_dir / (r.id + ".sftp"))) { have_day_soft = false; break; }
        if (!have_day_soft) {
            fs::create_directories(day_soft_dir);
            const ExecResult day_inf = run_command(substitute(
                cfg_.inference_command, {{"manifest", domains_.front().unlabeled_real.string()},
                                         {"outdir", day_soft_dir.string()},
                                         {"model_in", model_in_for(1).string()}}));
            if (day_inf.exit_code != 0) {
                report.aborted = true;
                report.error = "day inference command failed";
                report.inference_diagnostics = day_inf.output;
                return report;
            }
        }

        std::vector<GpsRecord> queries, refs;
        for (const auto& r : real.records) {
            if (!r.gps)
                throw validation_error("guided step needs GPS on every record; missing on " + r.id);
            queries.push_back({r.id, *r.gps});
        }
        for (const auto& r : day.records) {
            if (!r.gps)
                throw validation_error("guided step needs GPS on day records; missing on " + r.id);
            refs.push_back({r.id, *r.gps});
        }
        corr = match_nearest(queries, refs, MatchOptions{cfg_.max_corr_dist_m, false});
        for (const auto& e : corr.entries) {
            if (e.matched) { day_of[e.query_id] = e.day_id; ++report.matched; }
            else ++report.unmatched;
        }
        corr.write_csv(dir / "correspondences.csv");

        const double coverage =
            corr.entries.empty() ? 0.0 : static_cast<double>(report.matched) / corr.entries.size();
        if (coverage < cfg_.min_matched_fraction) {
            report.aborted = true;
            report.error = "correspondence coverage " + std::to_string(coverage) +
                           " below floor " + std::to_string(cfg_.min_matched_fraction);
            return report;
        }
    }

    // 3. Pseudo-labels: guided refinement for darker sources, plain argmax
    //    for the day domain.
    std::vector<ManifestRecord> pseudo_records;
    for (const ManifestRecord& r : real.records) {
        const fs::path soft_path = soft_dir / (r.id + ".sftp");
        if (!fs::exists(soft_path)) {
            report.aborted = true;
            report.error = "inference did not produce " + soft_path.string();
            return report;
        }
        const fs::path label_path = pseudo_dir / (r.id + ".png");
        if (step.guided) {
            auto it = day_of.find(r.id);
            if (it == day_of.end()) continue;  // unmatched: excluded from refinement
            const SoftPredictionTensor dark_soft = read_soft_tensor(soft_path);
            const SoftPredictionTensor day_soft =
                read_soft_tensor(day_soft_dir / (it->second + ".sftp"));
            const RgbImage dark_img = read_rgb_image(real.resolve(r.image_path));
            const RefinedPrediction refined =
                refine_guided(dark_soft, dark_img, day_soft, classes_, cfg_.bilateral, cfg_.fusion);
            write_label_map(label_path, refined.hard);
            report.pixels_refined +=
                static_cast<std::uint64_t>(refined.hard.width()) * refined.hard.height();
        } else {
            const SoftPredictionTensor soft = read_soft_tensor(soft_path);
            write_label_map(label_path, argmax_map(soft));
        }
        ++report.images_processed;

        ManifestRecord p;
        p.id = r.id;
        p.image_path = fs::weakly_canonical(real.resolve(r.image_path)).string();
        p.label_path = fs::weakly_canonical(label_path).string();
        p.domain = step.source.name;
        p.gps = r.gps;
        pseudo_records.push_back(std::move(p));
    }

    // 4. Mixed training manifest: synthetic weight 1, pseudo weight mu.
    const DatasetManifest synthetic = read_manifest(*step.target.labeled_synthetic);
    DatasetManifest pseudo;
    pseudo.base_dir = ".";
    pseudo.records = std::move(pseudo_records);
    const std::vector<ManifestRecord> train =
        emit_training_manifest(synthetic, pseudo, cfg_.mu, dir);
    const fs::path manifest_path = dir / "train_manifest.jsonl";
    write_manifest(manifest_path, train);
    report.manifest_path = manifest_path.string();

    // 5. External trainer.
    const ExecResult trainer = run_command(substitute(
        cfg_.trainer_command, {{"manifest", manifest_path.string()},
                               {"outdir", dir.string()},
                               {"model_in", model_in_for(step.number).string()},
                               {"model_out", (dir / "model.bin").string()}}));
    report.trainer_exit = trainer.exit_code;
    if (trainer.exit_code != 0) {
        report.aborted = true;
        report.error = "trainer command failed";
        report.trainer_diagnostics = trainer.output;
        return report;
    }

    std::ofstream rep(dir / "report.json", std::ios::binary);
    rep << report.to_json() << '\n';
    return report;
}

std::vector<StepReport> CurriculumRunner::run_all(bool dry_run) {
    std::vector<StepReport> reports;
    for (const CurriculumStep& step : steps_) {
        reports.push_back(run_step(step, dry_run));
        if (reports.back().aborted) break;
    }
    return reports;
}

CurriculumConfig load_curriculum_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open curriculum config: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("curriculum config is not valid JSON: " + std::string(e.what()));
    }

    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    CurriculumConfig cfg;
    if (!j.contains("domains") || !j["domains"].is_array())
        throw validation_error("curriculum config needs a \"domains\" array");
    for (const auto& d : j["domains"]) {
        DomainSpec spec;
        spec.index = d.at("index").get<int>();
        spec.name = d.at("name").get<std::string>();
        spec.unlabeled_real = resolve(d.at("unlabeled_real").get<std::string>());
        if (d.contains("labeled_synthetic"))
            spec.labeled_synthetic = resolve(d["labeled_synthetic"].get<std::string>());
        cfg.domains.push_back(std::move(spec));
    }

    StepConfig& s = cfg.step;
    s.mu = j.value("mu", 1.0);
    s.inference_command = j.value("inference_command", std::string{});
    s.trainer_command = j.value("trainer_command", std::string{});
    s.initial_model = j.value("initial_model", std::string{});
    s.iteration_budget = j.value("iteration_budget", 30000);
    s.max_corr_dist_m = j.value("max_corr_dist_m", 50.0);
    s.min_matched_fraction = j.value("min_matched_fraction", 0.9);
    s.regenerate_day_soft = j.value("regenerate_day_soft", false);
    if (j.contains("bilateral")) {
        const auto& b = j["bilateral"];
        s.bilateral.sigma_s = b.value("sigma_s", s.bilateral.sigma_s);
        s.bilateral.sigma_r = b.value("sigma_r", s.bilateral.sigma_r);
        s.bilateral.truncation_radius_factor =
            b.value("truncation_radius_factor", s.bilateral.truncation_radius_factor);
        s.bilateral.downsample_factor = b.value("downsample_factor", s.bilateral.downsample_factor);
    }
    if (j.contains("fusion")) {
        const auto& f = j["fusion"];
        s.fusion.alpha_l = f.value("alpha_l", s.fusion.alpha_l);
        s.fusion.alpha_h = f.value("alpha_h", s.fusion.alpha_h);
        s.fusion.eta = f.value("eta", s.fusion.eta);
    }
    return cfg;
}

} // namespace duskseg
