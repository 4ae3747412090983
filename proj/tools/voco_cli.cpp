#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "voco/geometry.hpp"
#include "voco/probe.hpp"
#include "voco/report.hpp"
#include "voco/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

voco::Shape3 parse_triple(const std::string& s, const std::string& what) {
    voco::Shape3 out{};
    int n = 0;
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        std::size_t next = s.find(',', pos);
        std::string tok = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            out[i] = std::stoi(tok);
        } catch (...) {
            throw voco::ConfigError(what + ": expected X,Y,Z integers, got '" + s + "'");
        }
        ++n;
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (n != 3) throw voco::ConfigError(what + ": expected X,Y,Z integers, got '" + s + "'");
    return out;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw voco::IoError("cannot open " + path);
    json j = json::parse(is, nullptr, false);
    if (j.is_discarded()) throw voco::ConfigError("invalid JSON in " + path);
    return j;
}

int cmd_gen_data(const std::string& spec_path, int count, const std::string& out_dir,
                 const std::string& shape_str, std::uint64_t seed_base) {
    voco::PhantomSpec spec = voco::phantom_from_json(load_json_file(spec_path), "");
    voco::Shape3 shape = parse_triple(shape_str, "--shape");
    fs::create_directories(out_dir);

    json manifest;
    manifest["version"] = voco::kVersion;
    manifest["spec"] = voco::phantom_to_json(spec);
    manifest["spec_hash"] = fnv1a(voco::phantom_to_json(spec).dump());
    manifest["shape"] = shape;
    manifest["volumes"] = json::array();
    for (int i = 0; i < count; ++i) {
        std::uint64_t sample_seed = seed_base + static_cast<std::uint64_t>(i);
        voco::Volume v = voco::generate_phantom(spec, sample_seed, shape);
        char name[64];
        std::snprintf(name, sizeof(name), "vol_%05d.vol1", i);
        voco::write_volume(v, out_dir + "/" + name);
        manifest["volumes"].push_back({{"file", name}, {"id", v.id}, {"sample_seed", sample_seed}});
    }
    std::ofstream ms(out_dir + "/manifest.json");
    ms << manifest.dump(2) << "\n";
    std::cerr << "wrote " << count << " volumes to " << out_dir << "\n";
    return 0;
}

int cmd_pretrain(const std::string& config_path, const std::string& out_dir,
                 const std::string& resume_path, bool deterministic) {
    std::optional<voco::Trainer> trainer;
    if (!resume_path.empty()) {
        trainer.emplace(voco::Trainer::from_checkpoint(resume_path));
        if (trainer->step() >= trainer->config().steps) {
            std::cerr << "checkpoint already at final step " << trainer->step()
                      << "; nothing to do\n";
            return 0;
        }
    } else {
        voco::TrainConfig cfg = voco::TrainConfig::load_file(config_path);
        if (deterministic) cfg.deterministic = true;
        trainer.emplace(cfg);
    }
    auto stats = trainer->run(out_dir);
    if (!stats.empty()) {
        std::vector<double> lt, lp, lr;
        for (const auto& s : stats) {
            lt.push_back(s.l_total);
            lp.push_back(s.l_pred);
            lr.push_back(s.l_reg);
        }
        voco::svg_line_chart(out_dir + "/loss_curve.svg", "training loss",
                             {{"L_total", lt}, {"L_pred", lp}, {"L_reg", lr}});
        std::cerr << "finished at step " << trainer->step() << ", final L_total = "
                  << stats.back().l_total << "\n";
    }
    return 0;
}

int cmd_probe(const std::string& ckpt_path, const std::string& data_dir, const std::string& out_dir) {
    voco::Trainer trainer = voco::Trainer::from_checkpoint(ckpt_path);
    const voco::TrainConfig& tc = trainer.config();

    json manifest = load_json_file(data_dir + "/manifest.json");
    std::uint64_t train_hash = fnv1a(voco::phantom_to_json(tc.phantom).dump());
    std::vector<voco::Volume> volumes;
    for (const auto& e : manifest.at("volumes")) {
        if (manifest.value("spec_hash", std::uint64_t{0}) == train_hash &&
            e.at("sample_seed").get<std::uint64_t>() < static_cast<std::uint64_t>(tc.num_volumes))
            throw voco::ConfigError("probe data volume " + e.at("id").get<std::string>() +
                                    " overlaps the pretraining volume seeds");
        volumes.push_back(voco::read_volume(data_dir + "/" + e.at("file").get<std::string>()));
        volumes.back().id = e.at("id").get<std::string>();
    }

    voco::ProbeConfig pc;
    pc.seed = tc.seed + 1;
    auto samples = voco::build_probe_dataset(trainer.model(), tc, pc, volumes);
    voco::ProbeResult pr = voco::train_linear_probe(samples, tc.num_cells(), pc);
    voco::BasisDiagnostics diag =
        voco::basis_diagnostics(trainer.model(), tc, std::min<int>(8, static_cast<int>(volumes.size())));

    fs::create_directories(out_dir);
    json out;
    out["top1_accuracy"] = pr.top1_accuracy;
    out["per_class_accuracy"] = pr.per_class_accuracy;
    out["num_eval_crops"] = pr.num_eval_crops;
    out["chance_level"] = pr.chance_level;
    out["soft_mae"] = pr.soft_mae;
    out["basis_mean_abs_s"] = diag.mean_abs_s;
    out["basis_max_abs_s"] = diag.max_abs_s;
    out["basis_mean_rank"] = diag.mean_rank;
    std::ofstream os(out_dir + "/probe_result.json");
    os << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";

    std::vector<std::string> labels;
    for (std::size_t i = 0; i < pr.per_class_accuracy.size(); ++i)
        labels.push_back(std::to_string(i + 1));
    voco::svg_bar_chart(out_dir + "/probe_per_class.svg", "per-class probe accuracy", labels,
                        pr.per_class_accuracy);
    voco::svg_histogram(out_dir + "/basis_abs_s_hist.svg", "|s_ij| distribution",
                        diag.abs_s_values, 20);
    return 0;
}

int cmd_ablate(const std::string& axis, const std::string& config_path, const std::string& out_dir) {
    voco::TrainConfig cfg = voco::TrainConfig::load_file(config_path);
    voco::AblationGrid grid = voco::run_ablation(axis, cfg, out_dir);
    for (const auto& r : grid.rows)
        std::cerr << axis << "=" << r.value << "  probe_top1=" << r.probe_top1
                  << "  final_mean_abs_s=" << r.final_mean_abs_s << "\n";
    return 0;
}

int cmd_inspect_labels(const std::string& grid_str, const std::string& shape_str,
                       const std::string& crop_str, const std::string& origin_str,
                       std::uint64_t seed, bool fig3, const std::string& csv_path) {
    voco::Shape3 shape, gridc, crop_size;
    voco::CropRegion crop;
    if (fig3) {
        // Closest realizable reconstruction of the published example:
        // a 4x4 in-plane grid, crop straddling classes 5, 6, 9, 10.
        shape = {160, 160, 8};
        gridc = {4, 4, 1};
        crop = {{10, 66, 0}, {40, 40, 8}};
    } else {
        gridc = parse_triple(grid_str, "--grid");
        shape = parse_triple(shape_str, "--shape");
        crop_size = parse_triple(crop_str, "--crop-size");
        if (!origin_str.empty()) {
            crop = {parse_triple(origin_str, "--origin"), crop_size};
        } else {
            std::mt19937_64 rng(seed);
            crop = voco::sample_random_crop(shape, crop_size, rng);
        }
    }
    voco::BaseGrid grid = voco::make_base_grid(shape, gridc);
    std::vector<double> y = voco::position_label(crop, grid);

    double sum = 0.0;
    for (double v : y) sum += v;
    if (std::abs(sum - 1.0) > 1e-12)
        throw voco::Error("inspect-labels: label sum deviates from 1");

    std::printf("volume %d,%d,%d  grid %d,%d,%d  crop origin %d,%d,%d size %d,%d,%d\n",
                shape[0], shape[1], shape[2], gridc[0], gridc[1], gridc[2],
                crop.origin[0], crop.origin[1], crop.origin[2],
                crop.size[0], crop.size[1], crop.size[2]);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > 0.0)
            std::printf("class %zu: %.6g\n", i + 1, y[i]); // 1-based, matching published figures
    }
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        for (std::size_t i = 0; i < y.size(); ++i) csv << (i ? "," : "") << y[i];
        csv << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"VoCo volume-contrast pretraining lab"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "generate phantom volumes as VOL1 files");
    std::string gd_spec, gd_out, gd_shape = "64,64,32";
    int gd_count = 0;
    std::uint64_t gd_seed_base = 0;
    gen->add_option("--spec", gd_spec, "PhantomSpec JSON file")->required();
    gen->add_option("--count", gd_count, "number of volumes")->required();
    gen->add_option("--out", gd_out, "output directory")->required();
    gen->add_option("--shape", gd_shape, "volume shape X,Y,Z");
    gen->add_option("--seed-base", gd_seed_base, "first sample seed");

    auto* pre = app.add_subcommand("pretrain", "run VoCo pretraining");
    std::string pt_config, pt_out, pt_resume;
    bool pt_det = false;
    pre->add_option("--config", pt_config, "TrainConfig JSON file");
    pre->add_option("--out", pt_out, "run directory")->required();
    pre->add_option("--resume", pt_resume, "checkpoint to resume from");
    pre->add_flag("--deterministic", pt_det, "force deterministic mode");

    auto* prb = app.add_subcommand("probe", "linear position probe on a frozen checkpoint");
    std::string pb_ckpt, pb_data, pb_out;
    prb->add_option("--ckpt", pb_ckpt, "checkpoint file")->required();
    prb->add_option("--data", pb_data, "directory of evaluation VOL1 files")->required();
    prb->add_option("--out", pb_out, "output directory")->required();

    auto* abl = app.add_subcommand("ablate", "toy-scale ablation over one axis");
    std::string ab_axis, ab_config, ab_out;
    abl->add_option("--axis", ab_axis, "one of: loss, n, lambda")->required();
    abl->add_option("--config", ab_config, "base TrainConfig JSON file")->required();
    abl->add_option("--out", ab_out, "output directory")->required();

    auto* ins = app.add_subcommand("inspect-labels", "print overlap-proportion labels for a crop");
    std::string il_grid = "4,4,1", il_shape = "96,96,16", il_crop = "24,24,16", il_origin, il_csv;
    std::uint64_t il_seed = 0;
    bool il_fig3 = false;
    ins->add_option("--grid", il_grid, "grid GX,GY,GZ");
    ins->add_option("--shape", il_shape, "volume shape X,Y,Z");
    ins->add_option("--crop-size", il_crop, "crop size CX,CY,CZ");
    ins->add_option("--origin", il_origin, "crop origin OX,OY,OZ (otherwise sampled)");
    ins->add_option("--seed", il_seed, "sampling seed when --origin is absent");
    ins->add_flag("--fig3", il_fig3, "use the documented figure-3 demo geometry");
    ins->add_option("--csv", il_csv, "also dump the full label vector as one CSV row");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(gd_spec, gd_count, gd_out, gd_shape, gd_seed_base);
        if (pre->parsed()) {
            if (pt_resume.empty() && pt_config.empty())
                throw voco::ConfigError("pretrain: --config is required unless --resume is given");
            return cmd_pretrain(pt_config, pt_out, pt_resume, pt_det);
        }
        if (prb->parsed()) return cmd_probe(pb_ckpt, pb_data, pb_out);
        if (abl->parsed()) return cmd_ablate(ab_axis, ab_config, ab_out);
        if (ins->parsed())
            return cmd_inspect_labels(il_grid, il_shape, il_crop, il_origin, il_seed, il_fig3, il_csv);
    } catch (const voco::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
