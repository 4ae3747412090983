#include "voco/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "voco/geometry.hpp"

namespace fs = std::filesystem;

namespace voco {

TrainConfig::TrainConfig() {
    phantom.num_organs = 5;
    phantom.organ_centers = {{0.25, 0.25, 0.35},
                             {0.75, 0.30, 0.60},
                             {0.30, 0.72, 0.50},
                             {0.72, 0.75, 0.40},
                             {0.50, 0.50, 0.50}};
    phantom.organ_radii = {0.10, 0.12, 0.09, 0.11, 0.14};
    phantom.jitter = 0.03;
    phantom.noise_level = 0.02;
    phantom.seed = 1;
    encoder.seed = seed;
}

nlohmann::json phantom_to_json(const PhantomSpec& p) {
    return {{"num_organs", p.num_organs},
            {"organ_centers", p.organ_centers},
            {"organ_radii", p.organ_radii},
            {"jitter", p.jitter},
            {"noise_level", p.noise_level},
            {"seed", p.seed}};
}

PhantomSpec phantom_from_json(const nlohmann::json& j, const std::string& key_prefix) {
    for (const char* key : {"num_organs", "organ_centers", "organ_radii"}) {
        if (!j.contains(key))
            throw ConfigError("missing required key: " + key_prefix + std::string(key));
    }
    PhantomSpec p;
    p.num_organs = j.at("num_organs").get<int>();
    p.organ_centers = j.at("organ_centers").get<std::vector<std::array<double, 3>>>();
    p.organ_radii = j.at("organ_radii").get<std::vector<double>>();
    p.jitter = j.value("jitter", 0.0);
    p.noise_level = j.value("noise_level", 0.0);
    p.seed = j.value("seed", std::uint64_t{0});
    p.validate();
    return p;
}

Shape3 TrainConfig::cell_size() const {
    return {working_shape[0] / grid[0], working_shape[1] / grid[1], working_shape[2] / grid[2]};
}

void TrainConfig::validate() const {
    if (steps < 1) throw ConfigError("TrainConfig: steps must be >= 1");
    if (warmup_steps < 0 || warmup_steps > steps)
        throw ConfigError("TrainConfig: warmup_steps must be in [0, steps]");
    if (base_lr < 0 || weight_decay < 0 || lambda < 0)
        throw ConfigError("TrainConfig: rates must be non-negative");
    if (batch_volumes < 1 || crops_per_volume < 1)
        throw ConfigError("TrainConfig: batch_volumes and crops_per_volume must be >= 1");
    if (num_volumes < 1) throw ConfigError("TrainConfig: num_volumes must be >= 1");
    if (num_cells() < 2) throw ConfigError("TrainConfig: grid must have at least 2 cells");
    make_base_grid(working_shape, grid); // throws naming the offending axis
    Shape3 cs = effective_crop_size();
    for (int a = 0; a < 3; ++a)
        if (cs[a] < 1 || cs[a] > working_shape[a])
            throw ConfigError("TrainConfig: crop_size exceeds working_shape");
    if (augment && working_shape[0] != working_shape[1])
        throw ConfigError("TrainConfig: augment requires square in-plane working_shape (z-rotations)");
    if (data_dir.empty()) phantom.validate();
    encoder.validate();
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j;
    j["steps"] = steps;
    j["warmup_steps"] = warmup_steps;
    j["base_lr"] = base_lr;
    j["weight_decay"] = weight_decay;
    j["lambda"] = lambda;
    j["batch_volumes"] = batch_volumes;
    j["crops_per_volume"] = crops_per_volume;
    j["grid"] = grid;
    j["working_shape"] = working_shape;
    j["crop_size"] = effective_crop_size();
    j["phantom_shape"] = phantom_shape;
    j["num_volumes"] = num_volumes;
    j["seed"] = seed;
    j["deterministic"] = deterministic;
    j["augment"] = augment;
    j["checkpoint_every"] = checkpoint_every;
    j["data_dir"] = data_dir;
    j["phantom"] = phantom_to_json(phantom);
    j["encoder"] = encoder.to_json();
    return j;
}

namespace {

Shape3 shape_from_json(const nlohmann::json& j, const std::string& key) {
    auto v = j.at(key).get<std::vector<int>>();
    if (v.size() != 3) throw ConfigError("TrainConfig: key '" + key + "' must have 3 entries");
    return {v[0], v[1], v[2]};
}

} // namespace

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    for (const char* key : {"steps", "base_lr", "seed", "grid"}) {
        if (!j.contains(key)) throw ConfigError("TrainConfig: missing required key: " + std::string(key));
    }
    c.steps = j.at("steps").get<std::int64_t>();
    c.base_lr = j.at("base_lr").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.grid = shape_from_json(j, "grid");
    c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.lambda = j.value("lambda", c.lambda);
    c.batch_volumes = j.value("batch_volumes", c.batch_volumes);
    c.crops_per_volume = j.value("crops_per_volume", c.crops_per_volume);
    if (j.contains("working_shape")) c.working_shape = shape_from_json(j, "working_shape");
    if (j.contains("crop_size")) c.crop_size = shape_from_json(j, "crop_size");
    if (j.contains("phantom_shape")) c.phantom_shape = shape_from_json(j, "phantom_shape");
    c.num_volumes = j.value("num_volumes", c.num_volumes);
    c.deterministic = j.value("deterministic", c.deterministic);
    c.augment = j.value("augment", c.augment);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.data_dir = j.value("data_dir", c.data_dir);
    if (j.contains("phantom")) c.phantom = phantom_from_json(j["phantom"]);
    if (j.contains("encoder")) {
        nlohmann::json e = j["encoder"];
        if (!e.contains("seed")) e["seed"] = c.seed;
        EncoderConfig def;
        if (!e.contains("channels_per_stage")) e["channels_per_stage"] = def.channels_per_stage;
        if (!e.contains("projector_dims")) e["projector_dims"] = def.projector_dims;
        if (!e.contains("input_shape")) e["input_shape"] = def.input_shape;
        c.encoder = EncoderConfig::from_json(e);
    } else {
        c.encoder.seed = c.seed;
    }
    c.validate();
    return c;
}

TrainConfig TrainConfig::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("TrainConfig: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("TrainConfig: invalid JSON in " + path);
    return from_json(j);
}

double lr_at(std::int64_t step, const TrainConfig& cfg) {
    if (step < 0 || step > cfg.steps) throw ConfigError("lr_at: step out of range");
    if (step < cfg.warmup_steps)
        return cfg.base_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    const double denom = static_cast<double>(std::max<std::int64_t>(1, cfg.steps - cfg.warmup_steps));
    const double progress = static_cast<double>(step - cfg.warmup_steps) / denom;
    return cfg.base_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)), model_(cfg_.encoder), rng_(cfg_.seed) {
    cfg_.validate();
    opt_.weight_decay = cfg_.weight_decay;
    opt_.init(model_.params());
    if (!cfg_.data_dir.empty()) scan_data_dir();
}

Trainer::Trainer(TrainConfig cfg, Model m) : cfg_(std::move(cfg)), model_(std::move(m)), rng_(cfg_.seed) {
    opt_.weight_decay = cfg_.weight_decay;
    opt_.init(model_.params());
    if (!cfg_.data_dir.empty()) scan_data_dir();
}

void Trainer::scan_data_dir() {
    for (const auto& e : fs::directory_iterator(cfg_.data_dir)) {
        if (e.path().extension() == ".vol1") data_files_.push_back(e.path().string());
    }
    std::sort(data_files_.begin(), data_files_.end());
    if (data_files_.empty()) throw ConfigError("Trainer: no .vol1 files in " + cfg_.data_dir);
}

Volume Trainer::working_volume(std::uint64_t volume_index) const {
    if (!data_files_.empty()) {
        Volume v = read_volume(data_files_[volume_index % data_files_.size()]);
        return resize_volume(v, cfg_.working_shape);
    }
    Volume v = generate_phantom(cfg_.phantom, volume_index, cfg_.phantom_shape);
    return resize_volume(v, cfg_.working_shape);
}

StepStats Trainer::train_step() {
    const auto t0 = std::chrono::steady_clock::now();
    if (step_ >= cfg_.steps) throw ConfigError("train_step: run already finished");
    const double lr = lr_at(step_ + 1, cfg_);
    model_.zero_grad();

    const int B = cfg_.batch_volumes;
    const int K = cfg_.crops_per_volume;
    const double scale = 1.0 / (static_cast<double>(B) * K);
    const int n = cfg_.num_cells();
    double sum_pred = 0.0, sum_reg = 0.0, sum_mas = 0.0;

    std::uniform_int_distribution<std::uint64_t> pick(0, static_cast<std::uint64_t>(cfg_.num_volumes) - 1);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> turns(0, 3);

    for (int b = 0; b < B; ++b) {
        Volume vol = working_volume(pick(rng_));
        if (cfg_.augment) {
            for (int axis = 0; axis < 3; ++axis)
                if (coin(rng_)) vol = flip_volume(vol, axis);
            int k = turns(rng_);
            if (k != 0) vol = rotate90_z(vol, k);
        }
        BaseGrid grid = make_base_grid(cfg_.working_shape, cfg_.grid);
        std::vector<Volume> base_vols;
        base_vols.reserve(grid.cells.size());
        for (const auto& cell : grid.cells)
            base_vols.push_back(crop_and_resize(vol, cell, cfg_.encoder.input_shape));

        std::vector<Trace> base_traces;
        BasisSet bs = model_.embed_bases(base_vols, &base_traces);

        VecList dq_acc(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(cfg_.encoder.feature_dim()), 0.0));
        for (int j = 0; j < K; ++j) {
            CropRegion region = sample_random_crop(cfg_.working_shape, cfg_.effective_crop_size(), rng_);
            Vec y = position_label(region, grid);
            Volume cv = crop_and_resize(vol, region, cfg_.encoder.input_shape);
            Trace tr;
            Embedding e = model_.embed(cv, &tr);
            LossGrads g;
            LossReport rep = total_loss(e.q, bs.q, y, cfg_.lambda, &g);
            sum_pred += rep.l_pred;
            sum_reg += rep.l_reg;
            sum_mas += rep.mean_abs_s();
            for (auto& x : g.d_p) x *= scale;
            model_.backward(tr, g.d_p);
            for (int i = 0; i < n; ++i)
                for (std::size_t k = 0; k < dq_acc[i].size(); ++k)
                    dq_acc[i][k] += scale * g.d_q[i][k];
        }
        for (int i = 0; i < n; ++i) model_.backward(base_traces[i], dq_acc[i]);
    }

    opt_.step(model_.params(), lr);
    ++step_;

    StepStats s;
    s.step = step_;
    s.lr = lr;
    s.l_pred = sum_pred * scale;
    s.l_reg = sum_reg * scale;
    s.l_total = s.l_pred + cfg_.lambda * s.l_reg;
    s.mean_abs_s = sum_mas * scale;
    s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

std::vector<StepStats> Trainer::run_in_memory() {
    std::vector<StepStats> out;
    while (step_ < cfg_.steps) out.push_back(train_step());
    return out;
}

void write_loss_csv_header(std::ostream& os) {
    os << "step,lr,L_pred,L_reg,L_total,mean_abs_s,wall_ms\n";
}

void write_loss_csv_row(std::ostream& os, const StepStats& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                  static_cast<long long>(s.step), s.lr, s.l_pred, s.l_reg, s.l_total,
                  s.mean_abs_s, s.wall_ms);
    os << buf;
}

std::vector<StepStats> Trainer::run(const std::string& out_dir) {
    fs::create_directories(out_dir);

    const std::string manifest_path = out_dir + "/manifest.json";
    if (!fs::exists(manifest_path)) {
        nlohmann::json manifest;
        manifest["version"] = kVersion;
        manifest["seed"] = cfg_.seed;
        manifest["started_at_step"] = step_;
        manifest["created"] = static_cast<std::int64_t>(
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch()).count());
        manifest["config"] = cfg_.to_json();
        manifest["outputs"] = {{"loss_csv", "loss.csv"}, {"final_checkpoint", "final.vck"}};
        std::ofstream ms(manifest_path);
        if (!ms) throw IoError("Trainer::run: cannot write " + manifest_path);
        ms << manifest.dump(2) << "\n";
    }

    const std::string csv_path = out_dir + "/loss.csv";
    const bool fresh = !fs::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app);
    if (!csv) throw IoError("Trainer::run: cannot write " + csv_path);
    if (fresh) write_loss_csv_header(csv);

    std::vector<StepStats> out;
    while (step_ < cfg_.steps) {
        StepStats s = train_step();
        write_loss_csv_row(csv, s);
        csv.flush();
        if (cfg_.checkpoint_every > 0 && s.step % cfg_.checkpoint_every == 0 && s.step < cfg_.steps)
            save_checkpoint(out_dir + "/ckpt_" + std::to_string(s.step) + ".vck");
        out.push_back(s);
    }
    save_checkpoint(out_dir + "/final.vck");
    return out;
}

void Trainer::save_checkpoint(const std::string& path) const {
    Archive a;
    model_.add_to_archive(a);
    opt_.add_to_archive(a, model_.params());
    a.meta["train_config"] = cfg_.to_json();
    a.meta["step"] = step_;
    std::ostringstream rs;
    rs << rng_;
    a.meta["rng"] = rs.str();
    a.save(path);
}

Trainer Trainer::from_checkpoint(const std::string& path) {
    Archive a = Archive::load(path);
    if (!a.meta.contains("train_config") || !a.meta.contains("step") || !a.meta.contains("rng"))
        throw CheckpointError("Trainer::from_checkpoint: missing training state in " + path);
    TrainConfig cfg = TrainConfig::from_json(a.meta["train_config"]);
    Model m = Model::from_archive(a);
    Trainer t(std::move(cfg), std::move(m));
    t.opt_.load_from_archive(a, t.model_.params());
    t.step_ = a.meta["step"].get<std::int64_t>();
    std::istringstream rs(a.meta["rng"].get<std::string>());
    rs >> t.rng_;
    if (rs.fail()) throw CheckpointError("Trainer::from_checkpoint: bad rng state in " + path);
    return t;
}

} // namespace voco
