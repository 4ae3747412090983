#include "voco/probe.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "voco/geometry.hpp"
#include "voco/report.hpp"

namespace voco {

int argmax_label(const Vec& y) {
    return static_cast<int>(std::max_element(y.begin(), y.end()) - y.begin());
}

namespace {

Volume probe_volume(const TrainConfig& tc, std::uint64_t index) {
    Volume v = generate_phantom(tc.phantom, index, tc.phantom_shape);
    return resize_volume(v, tc.working_shape);
}

void softmax(const Vec& logits, Vec& out) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    out.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (auto& x : out) x /= sum;
}

} // namespace

std::vector<ProbeSample> build_probe_dataset(const Model& frozen, const TrainConfig& tc,
                                             const ProbeConfig& pc,
                                             const std::vector<Volume>& volumes) {
    if (volumes.empty()) throw ConfigError("build_probe_dataset: empty dataset");
    std::mt19937_64 rng(pc.seed);
    BaseGrid grid = make_base_grid(tc.working_shape, tc.grid);
    std::vector<ProbeSample> samples;
    for (const Volume& raw : volumes) {
        Volume vol = resize_volume(raw, tc.working_shape);
        for (int j = 0; j < pc.crops_per_volume; ++j) {
            CropRegion region = sample_random_crop(tc.working_shape, tc.effective_crop_size(), rng);
            Vec y = position_label(region, grid);
            Volume cv = crop_and_resize(vol, region, tc.encoder.input_shape);
            Embedding e = frozen.embed(cv);
            samples.push_back({std::move(e.z), argmax_label(y), std::move(y), vol.id});
        }
    }
    return samples;
}

std::vector<ProbeSample> build_probe_dataset(const Model& frozen, const TrainConfig& tc,
                                             const ProbeConfig& pc) {
    if (pc.volume_offset < static_cast<std::uint64_t>(tc.num_volumes))
        throw ConfigError("build_probe_dataset: probe volumes overlap pretraining volumes");
    std::vector<Volume> volumes;
    for (int i = 0; i < pc.num_volumes; ++i)
        volumes.push_back(probe_volume(tc, pc.volume_offset + static_cast<std::uint64_t>(i)));
    return build_probe_dataset(frozen, tc, pc, volumes);
}

ProbeResult train_linear_probe(const std::vector<ProbeSample>& samples, int n_classes,
                               const ProbeConfig& pc) {
    if (samples.empty()) throw ConfigError("train_linear_probe: empty dataset");
    const int dim = static_cast<int>(samples[0].features.size());

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(pc.seed ^ 0x9e3779b97f4a7c15ull);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_hold = std::max<std::size_t>(1, static_cast<std::size_t>(pc.heldout_frac * samples.size()));
    const std::size_t n_train = samples.size() - n_hold;

    std::vector<Param> params;
    params.push_back({"probe.w", Tensor({n_classes, dim}), Tensor({n_classes, dim})});
    params.push_back({"probe.b", Tensor({n_classes}), Tensor({n_classes})});
    AdamW opt;
    opt.init(params);

    auto logits_of = [&](const Vec& x, Vec& out) {
        out.assign(static_cast<std::size_t>(n_classes), 0.0);
        const double* W = params[0].value.data.data();
        const double* B = params[1].value.data.data();
        for (int c = 0; c < n_classes; ++c) {
            double s = B[c];
            const double* row = W + static_cast<std::size_t>(c) * dim;
            for (int k = 0; k < dim; ++k) s += row[k] * x[k];
            out[static_cast<std::size_t>(c)] = s;
        }
    };

    Vec logits, probs;
    for (int step = 0; step < pc.steps; ++step) {
        params[0].grad.zero();
        params[1].grad.zero();
        for (std::size_t t = 0; t < n_train; ++t) {
            const ProbeSample& s = samples[order[t]];
            logits_of(s.features, logits);
            softmax(logits, probs);
            // dCE/dlogit = softmax - onehot, averaged over the batch
            for (int c = 0; c < n_classes; ++c) {
                double g = (probs[static_cast<std::size_t>(c)] - (c == s.label ? 1.0 : 0.0)) /
                           static_cast<double>(n_train);
                params[1].grad.data[static_cast<std::size_t>(c)] += g;
                double* grow = params[0].grad.data.data() + static_cast<std::size_t>(c) * dim;
                for (int k = 0; k < dim; ++k) grow[k] += g * s.features[static_cast<std::size_t>(k)];
            }
        }
        opt.step(params, pc.lr);
    }

    ProbeResult r;
    r.chance_level = 1.0 / n_classes;
    r.per_class_accuracy.assign(static_cast<std::size_t>(n_classes), 0.0);
    std::vector<int> class_total(static_cast<std::size_t>(n_classes), 0);
    int correct = 0;
    double mae_sum = 0.0;
    for (std::size_t t = n_train; t < samples.size(); ++t) {
        const ProbeSample& s = samples[order[t]];
        logits_of(s.features, logits);
        softmax(logits, probs);
        int pred = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
        ++class_total[static_cast<std::size_t>(s.label)];
        if (pred == s.label) {
            ++correct;
            r.per_class_accuracy[static_cast<std::size_t>(s.label)] += 1.0;
        }
        double mae = 0.0;
        for (int c = 0; c < n_classes; ++c)
            mae += std::abs(probs[static_cast<std::size_t>(c)] - s.y[static_cast<std::size_t>(c)]);
        mae_sum += mae / n_classes;
    }
    r.num_eval_crops = static_cast<int>(n_hold);
    r.top1_accuracy = static_cast<double>(correct) / static_cast<double>(n_hold);
    r.soft_mae = mae_sum / static_cast<double>(n_hold);
    for (int c = 0; c < n_classes; ++c)
        if (class_total[static_cast<std::size_t>(c)] > 0)
            r.per_class_accuracy[static_cast<std::size_t>(c)] /= class_total[static_cast<std::size_t>(c)];
    return r;
}

int numerical_rank(const VecList& rows, double rel_tol) {
    const std::size_t n = rows.size();
    // Gram matrix eigenvalues via cyclic Jacobi; singular values are their roots.
    std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < rows[i].size(); ++k) s += rows[i][k] * rows[j][k];
            g[i][j] = g[j][i] = s;
        }
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += g[p][q] * g[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(g[p][q]) < 1e-18) continue;
                double theta = 0.5 * std::atan2(2.0 * g[p][q], g[q][q] - g[p][p]);
                double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t k = 0; k < n; ++k) {
                    double gkp = g[k][p], gkq = g[k][q];
                    g[k][p] = c * gkp - s * gkq;
                    g[k][q] = s * gkp + c * gkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double gpk = g[p][k], gqk = g[q][k];
                    g[p][k] = c * gpk - s * gqk;
                    g[q][k] = s * gpk + c * gqk;
                }
            }
    }
    double max_sv = 0.0;
    std::vector<double> sv(n);
    for (std::size_t i = 0; i < n; ++i) {
        sv[i] = std::sqrt(std::max(0.0, g[i][i]));
        max_sv = std::max(max_sv, sv[i]);
    }
    if (max_sv == 0.0) return 0;
    int rank = 0;
    for (double s : sv)
        if (s > rel_tol * max_sv) ++rank;
    return rank;
}

BasisDiagnostics basis_diagnostics(const Model& m, const TrainConfig& tc, int num_volumes,
                                   std::uint64_t volume_offset) {
    BasisDiagnostics d;
    d.n = tc.num_cells();
    BaseGrid grid = make_base_grid(tc.working_shape, tc.grid);
    double sum = 0.0;
    long long count = 0;
    for (int i = 0; i < num_volumes; ++i) {
        Volume vol = probe_volume(tc, volume_offset + static_cast<std::uint64_t>(i));
        std::vector<Volume> base_vols;
        for (const auto& cell : grid.cells)
            base_vols.push_back(crop_and_resize(vol, cell, tc.encoder.input_shape));
        BasisSet bs = m.embed_bases(base_vols);
        auto s = basis_similarity(bs.q);
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = a + 1; b < s.size(); ++b) {
                double v = std::abs(s[a][b]);
                d.abs_s_values.push_back(v);
                d.max_abs_s = std::max(d.max_abs_s, v);
                sum += v;
                ++count;
            }
        d.mean_rank += numerical_rank(bs.q);
    }
    d.mean_abs_s = count > 0 ? sum / static_cast<double>(count) : 0.0;
    d.mean_rank /= std::max(1, num_volumes);
    return d;
}

AblationGrid run_ablation(const std::string& axis, const TrainConfig& base_cfg,
                          const std::string& out_dir) {
    struct Variant {
        std::string name;
        TrainConfig cfg;
    };
    std::vector<Variant> variants;
    if (axis == "loss") {
        TrainConfig a = base_cfg;
        a.lambda = 0.0;
        TrainConfig b = base_cfg;
        if (b.lambda <= 0.0) b.lambda = 1.0;
        variants.push_back({"L_pred_only", a});
        variants.push_back({"L_pred+L_reg", b});
    } else if (axis == "n") {
        for (Shape3 g : {Shape3{2, 2, 1}, Shape3{3, 3, 1}, Shape3{4, 4, 1}}) {
            TrainConfig c = base_cfg;
            c.grid = g;
            c.crop_size.reset(); // crop tracks the cell size
            variants.push_back({std::to_string(g[0]) + "x" + std::to_string(g[1]) + "x" + std::to_string(g[2]), c});
        }
    } else if (axis == "lambda") {
        for (double l : {0.5, 1.0, 1.5}) {
            TrainConfig c = base_cfg;
            c.lambda = l;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.1f", l);
            variants.push_back({buf, c});
        }
    } else {
        throw ConfigError("run_ablation: unknown axis '" + axis + "' (expected loss, n, or lambda)");
    }

    std::filesystem::create_directories(out_dir);
    AblationGrid gridres;
    gridres.axis = axis;
    std::vector<std::pair<std::string, std::vector<double>>> curves;
    for (auto& v : variants) {
        v.cfg.validate();
        Trainer t(v.cfg);
        auto stats = t.run_in_memory();
        ProbeConfig pc;
        pc.seed = v.cfg.seed + 1;
        auto samples = build_probe_dataset(t.model(), v.cfg, pc);
        ProbeResult pr = train_linear_probe(samples, v.cfg.num_cells(), pc);
        const StepStats& last = stats.back();
        gridres.rows.push_back({v.name, last.l_pred, last.l_reg, last.l_total,
                                last.mean_abs_s, pr.top1_accuracy, pr.chance_level});
        std::vector<double> curve;
        for (const auto& s : stats) curve.push_back(s.l_total);
        curves.emplace_back(v.name, std::move(curve));
    }

    std::ofstream csv(out_dir + "/ablation_" + axis + ".csv");
    if (!csv) throw IoError("run_ablation: cannot write CSV in " + out_dir);
    csv << "value,final_L_pred,final_L_reg,final_L_total,final_mean_abs_s,probe_top1,chance\n";
    for (const auto& r : gridres.rows) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g\n", r.value.c_str(),
                      r.final_l_pred, r.final_l_reg, r.final_l_total, r.final_mean_abs_s,
                      r.probe_top1, r.chance);
        csv << buf;
    }

    std::vector<std::string> labels;
    std::vector<double> accs;
    for (const auto& r : gridres.rows) {
        labels.push_back(r.value);
        accs.push_back(r.probe_top1);
    }
    svg_bar_chart(out_dir + "/ablation_" + axis + "_accuracy.svg",
                  "probe top-1 accuracy (" + axis + " axis)", labels, accs);
    svg_line_chart(out_dir + "/ablation_" + axis + "_loss.svg",
                   "L_total curves (" + axis + " axis)", curves);
    return gridres;
}

} // namespace voco
