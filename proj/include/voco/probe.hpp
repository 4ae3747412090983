#pragma once

#include <string>
#include <vector>

#include "voco/model.hpp"
#include "voco/trainer.hpp"

namespace voco {

// Volume indices below this belong to pretraining; probe volumes start here.
inline constexpr std::uint64_t kProbeVolumeOffset = 1'000'000;

struct ProbeConfig {
    int num_volumes = 8;        // evaluation phantoms
    int crops_per_volume = 64;
    double heldout_frac = 0.3;
    int steps = 200;            // fixed probe-optimizer budget
    double lr = 1e-2;
    std::uint64_t seed = 99;
    std::uint64_t volume_offset = kProbeVolumeOffset;
};

struct ProbeSample {
    Vec features;
    int label = 0;              // argmax cell, lowest index on ties
    Vec y;                      // soft position label
    std::string volume_id;
};

struct ProbeResult {
    double top1_accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    int num_eval_crops = 0;
    double chance_level = 0.0;
    double soft_mae = 0.0;      // mean |softmax(probe) - y|
};

int argmax_label(const Vec& y);

// Crop features come from the frozen encoder's pooled pre-projection
// output z; labels from the crop's position label on the training grid.
std::vector<ProbeSample> build_probe_dataset(const Model& frozen, const TrainConfig& tc,
                                             const ProbeConfig& pc);

// Same pipeline, but over caller-supplied volumes (e.g. VOL1 files);
// volumes are resized to the working shape before tiling.
std::vector<ProbeSample> build_probe_dataset(const Model& frozen, const TrainConfig& tc,
                                             const ProbeConfig& pc,
                                             const std::vector<Volume>& volumes);

// Trains a single linear softmax layer on the samples; encoder stays
// untouched. Metrics are reported on the held-out split.
ProbeResult train_linear_probe(const std::vector<ProbeSample>& samples, int n_classes,
                               const ProbeConfig& pc);

struct BasisDiagnostics {
    double mean_abs_s = 0.0;
    double max_abs_s = 0.0;
    double mean_rank = 0.0;     // numerical rank of each volume's stacked q, averaged
    int n = 0;
    std::vector<double> abs_s_values; // off-diagonal |s_ij| pool for histograms
};

BasisDiagnostics basis_diagnostics(const Model& m, const TrainConfig& tc, int num_volumes,
                                   std::uint64_t volume_offset = kProbeVolumeOffset);

// Numerical rank of a stacked row-vector matrix: singular values above
// 1e-4 relative to the largest.
int numerical_rank(const VecList& rows, double rel_tol = 1e-4);

struct AblationRow {
    std::string value;
    double final_l_pred = 0.0;
    double final_l_reg = 0.0;
    double final_l_total = 0.0;
    double final_mean_abs_s = 0.0;
    double probe_top1 = 0.0;
    double chance = 0.0;
};

struct AblationGrid {
    std::string axis; // "loss", "n", or "lambda"
    std::vector<AblationRow> rows;
};

// Trains one model per axis value (shared seed), probes each, and writes
// ablation_<axis>.csv plus a bar-chart SVG under out_dir.
AblationGrid run_ablation(const std::string& axis, const TrainConfig& base_cfg,
                          const std::string& out_dir);

} // namespace voco
