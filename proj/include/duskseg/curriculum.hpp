#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "duskseg/bilateral.hpp"
#include "duskseg/class_set.hpp"
#include "duskseg/fusion.hpp"
#include "duskseg/manifest.hpp"

namespace duskseg {

/// One domain in the darkness-ordered sequence. Index 1 is the lightest
/// (source) domain; only domains with index > 1 carry a synthetic labeled
/// manifest.
struct DomainSpec {
    int index = 0;
    std::string name;
    std::optional<std::filesystem::path> labeled_synthetic;
    std::filesystem::path unlabeled_real;
};

struct StepConfig {
    double mu = 1.0;  // pseudo-label loss weight, > 0
    std::string inference_command;  // placeholders: {manifest} {outdir} {model_in}
    std::string trainer_command;    // placeholders: {manifest} {model_out} {model_in} {outdir}
    std::string initial_model;      // {model_in} of the first step
    int iteration_budget = 30000;   // informational, echoed into step reports
    double max_corr_dist_m = 50.0;
    double min_matched_fraction = 0.9;  // guided step aborts below this coverage
    bool regenerate_day_soft = false;   // re-run day inference even if artifacts exist
    BilateralParams bilateral;
    FusionParams fusion;

    void check() const;
};

struct CurriculumStep {
    int number = 0;        // 1-based
    int source_index = 0;  // z-1: domain whose real images get pseudo-labels
    int target_index = 0;  // z: domain being adapted to
    bool guided = false;   // true iff source_index > 1
    DomainSpec source;
    DomainSpec target;
};

/// Emits one step per transition z-1 -> z in index order. Guidance applies
/// exactly when the pseudo-label source domain is not the lightest one.
/// Throws validation_error on fewer than two domains, non-consecutive
/// indices, missing manifests, or a missing synthetic manifest for a
/// target domain.
std::vector<CurriculumStep> plan(const std::vector<DomainSpec>& domains, const StepConfig& cfg);

/// Training manifest of a step: synthetic records first (weight 1) then
/// pseudo-labeled real records (weight mu), each in manifest order, with
/// paths rebased onto out_base_dir. Every referenced file must exist;
/// resolved label paths must not collide.
std::vector<ManifestRecord> emit_training_manifest(const DatasetManifest& synthetic,
                                                   const DatasetManifest& pseudo, double mu,
                                                   const std::filesystem::path& out_base_dir);

struct StepReport {
    int step = 0;
    bool dry_run = false;
    bool guided = false;
    bool aborted = false;
    std::string error;

    int images_processed = 0;
    std::uint64_t pixels_refined = 0;
    int matched = 0;
    int unmatched = 0;

    int inference_exit = 0;
    int trainer_exit = 0;
    std::string inference_diagnostics;
    std::string trainer_diagnostics;

    std::string manifest_path;
    std::string model_out;
    std::string pseudo_dir;

    std::string to_json() const;
};

/// Drives the per-step pipeline: external inference on the source domain's
/// real images, pseudo-label generation (guided by day predictions when the
/// source is darker than domain 1), training-manifest emission, external
/// trainer invocation. Steps run strictly in order; day soft predictions
/// are produced once in step 1 and reused by later guided steps.
class CurriculumRunner {
public:
    CurriculumRunner(std::vector<DomainSpec> domains, StepConfig cfg, ClassSet classes,
                     std::filesystem::path run_dir);

    const std::vector<CurriculumStep>& steps() const { return steps_; }

    /// dry_run validates inputs and reports planned artifacts without
    /// creating or writing any file.
    StepReport run_step(const CurriculumStep& step, bool dry_run);

    /// Runs all steps in order, stopping at the first aborted step.
    std::vector<StepReport> run_all(bool dry_run);

    std::filesystem::path step_dir(int step_number) const;

private:
    std::filesystem::path model_in_for(int step_number) const;
    StepReport dry_run_step(const CurriculumStep& step) const;

    std::vector<DomainSpec> domains_;
    StepConfig cfg_;
    ClassSet classes_;
    std::filesystem::path run_dir_;
    std::vector<CurriculumStep> steps_;
};

struct CurriculumConfig {
    std::vector<DomainSpec> domains;
    StepConfig step;
};

/// JSON config for the CLI; relative manifest paths resolve against the
/// config file's directory.
CurriculumConfig load_curriculum_config(const std::filesystem::path& path);

} // namespace duskseg
