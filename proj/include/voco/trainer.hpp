#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "voco/loss.hpp"
#include "voco/model.hpp"
#include "voco/optim.hpp"
#include "voco/volume.hpp"

namespace voco {

inline constexpr const char* kVersion = "voco-0.1.0";

nlohmann::json phantom_to_json(const PhantomSpec& p);
PhantomSpec phantom_from_json(const nlohmann::json& j, const std::string& key_prefix = "phantom.");

struct TrainConfig {
    std::int64_t steps = 2000;
    std::int64_t warmup_steps = 100;
    double base_lr = 5e-3;
    double weight_decay = 1e-2;
    double lambda = 1.0;
    int batch_volumes = 2;
    int crops_per_volume = 4;
    Shape3 grid{4, 4, 1};
    Shape3 working_shape{96, 96, 16};
    std::optional<Shape3> crop_size;      // default: one grid cell
    Shape3 phantom_shape{64, 64, 32};     // native shape before the working resize
    int num_volumes = 16;
    std::uint64_t seed = 7;
    bool deterministic = true;
    bool augment = true;
    std::int64_t checkpoint_every = 500;
    std::string data_dir;                 // optional: read VOL1 files instead of phantoms
    PhantomSpec phantom;
    EncoderConfig encoder;

    TrainConfig();

    Shape3 cell_size() const;
    Shape3 effective_crop_size() const { return crop_size ? *crop_size : cell_size(); }
    int num_cells() const { return grid[0] * grid[1] * grid[2]; }

    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
    static TrainConfig load_file(const std::string& path);
};

// Linear warmup to base_lr, then half-cosine decay to zero at cfg.steps.
// Steps are 1-based: lr_at(warmup_steps) == base_lr, lr_at(steps) == 0.
double lr_at(std::int64_t step, const TrainConfig& cfg);

struct StepStats {
    std::int64_t step = 0;
    double lr = 0.0;
    double wall_ms = 0.0;
    double l_pred = 0.0;
    double l_reg = 0.0;
    double l_total = 0.0;
    double mean_abs_s = 0.0;
};

class Trainer {
public:
    explicit Trainer(TrainConfig cfg);

    StepStats train_step();

    // Full loop with manifest, loss CSV and checkpoints under out_dir.
    // Returns the executed step stats (empty when already finished).
    std::vector<StepStats> run(const std::string& out_dir);

    // Bare loop without filesystem output (used by ablations and tests).
    std::vector<StepStats> run_in_memory();

    void save_checkpoint(const std::string& path) const;
    static Trainer from_checkpoint(const std::string& path);

    std::int64_t step() const { return step_; }
    const TrainConfig& config() const { return cfg_; }
    Model& model() { return model_; }
    const Model& model() const { return model_; }

    // Deterministic training volume for a given index (phantom path),
    // already resized to working_shape. Also used by the probe to build
    // evaluation sets from a disjoint index range.
    Volume working_volume(std::uint64_t volume_index) const;

private:
    TrainConfig cfg_;
    Model model_;
    AdamW opt_;
    std::mt19937_64 rng_;
    std::int64_t step_ = 0;
    std::vector<std::string> data_files_; // when data_dir is set

    Trainer(TrainConfig cfg, Model m);
    void scan_data_dir();
};

void write_loss_csv_header(std::ostream& os);
void write_loss_csv_row(std::ostream& os, const StepStats& s);

} // namespace voco
