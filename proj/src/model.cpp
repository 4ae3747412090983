#include "voco/model.hpp"

#include <cmath>
#include <random>

#include "voco/errors.hpp"

namespace voco {

void EncoderConfig::validate() const {
    if (channels_per_stage.empty()) throw ConfigError("EncoderConfig: channels_per_stage is empty");
    for (int c : channels_per_stage)
        if (c < 1) throw ConfigError("EncoderConfig: all stage widths must be >= 1");
    if (projector_dims.empty()) throw ConfigError("EncoderConfig: projector_dims is empty");
    for (int c : projector_dims)
        if (c < 1) throw ConfigError("EncoderConfig: all projector widths must be >= 1");
    if (feature_dim() < 2) throw ConfigError("EncoderConfig: feature_dim must be >= 2");
    for (int a = 0; a < 3; ++a) {
        int d = input_shape[a];
        for (int s = 0; s < num_stages(); ++s) d = conv_out_dim(d);
        if (d < 1 || input_shape[a] < 1) throw ConfigError("EncoderConfig: input_shape too small for stages");
    }
}

nlohmann::json EncoderConfig::to_json() const {
    return {{"channels_per_stage", channels_per_stage},
            {"projector_dims", projector_dims},
            {"input_shape", input_shape},
            {"seed", seed}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
    EncoderConfig c;
    c.channels_per_stage = j.at("channels_per_stage").get<std::vector<int>>();
    c.projector_dims = j.at("projector_dims").get<std::vector<int>>();
    auto s = j.at("input_shape").get<std::vector<int>>();
    if (s.size() != 3) throw ConfigError("EncoderConfig: input_shape must have 3 entries");
    c.input_shape = {s[0], s[1], s[2]};
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

Model::Model(EncoderConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    build_params();
    init_params();
}

void Model::build_params() {
    auto add = [&](const std::string& name, std::vector<int> shape) {
        params_.push_back({name, Tensor(shape), Tensor(std::move(shape))});
        return static_cast<int>(params_.size()) - 1;
    };
    int in_ch = 1;
    for (int s = 0; s < cfg_.num_stages(); ++s) {
        int out_ch = cfg_.channels_per_stage[s];
        ConvRef c;
        c.in_ch = in_ch;
        c.out_ch = out_ch;
        c.w = add("enc.conv" + std::to_string(s) + ".w", {out_ch, in_ch, 3, 3, 3});
        c.b = add("enc.conv" + std::to_string(s) + ".b", {out_ch});
        convs_.push_back(c);
        in_ch = out_ch;
    }
    int in_dim = cfg_.pooled_dim();
    for (std::size_t i = 0; i < cfg_.projector_dims.size(); ++i) {
        int out_dim = cfg_.projector_dims[i];
        LinRef l;
        l.in_dim = in_dim;
        l.out_dim = out_dim;
        l.w = add("proj.lin" + std::to_string(i) + ".w", {out_dim, in_dim});
        l.b = add("proj.lin" + std::to_string(i) + ".b", {out_dim});
        lins_.push_back(l);
        in_dim = out_dim;
    }
}

void Model::init_params() {
    std::mt19937_64 rng(cfg_.seed);
    auto xavier = [&](Tensor& w, int fan_in, int fan_out) {
        double a = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-a, a);
        for (auto& x : w.data) x = dist(rng);
    };
    for (const auto& c : convs_)
        xavier(params_[c.w].value, c.in_ch * 27, c.out_ch * 27);
    for (const auto& l : lins_)
        xavier(params_[l.w].value, l.in_dim, l.out_dim);
    // biases stay zero
}

Tensor Model::volume_to_tensor(const Volume& v) {
    Tensor t({1, v.shape[0], v.shape[1], v.shape[2]});
    for (std::size_t i = 0; i < v.data.size(); ++i) t.data[i] = v.data[i];
    return t;
}

Tensor Model::conv_forward(const ConvRef& c, const Tensor& in) const {
    const int X = in.shape[1], Y = in.shape[2], Z = in.shape[3];
    const int OX = conv_out_dim(X), OY = conv_out_dim(Y), OZ = conv_out_dim(Z);
    Tensor out({c.out_ch, OX, OY, OZ});
    const double* W = params_[c.w].value.data.data();
    const double* B = params_[c.b].value.data.data();
    const std::size_t in_cs = static_cast<std::size_t>(X) * Y * Z;
    const std::size_t out_cs = static_cast<std::size_t>(OX) * OY * OZ;
    for (int co = 0; co < c.out_ch; ++co) {
        for (int oz = 0; oz < OZ; ++oz)
            for (int oy = 0; oy < OY; ++oy)
                for (int ox = 0; ox < OX; ++ox) {
                    double sum = B[co];
                    const int ix0 = ox * 2 - 1, iy0 = oy * 2 - 1, iz0 = oz * 2 - 1;
                    for (int ci = 0; ci < c.in_ch; ++ci) {
                        const double* ip = in.data.data() + ci * in_cs;
                        const double* wp = W + ((static_cast<std::size_t>(co) * c.in_ch + ci) * 27);
                        for (int kz = 0; kz < 3; ++kz) {
                            const int z = iz0 + kz;
                            if (z < 0 || z >= Z) continue;
                            for (int ky = 0; ky < 3; ++ky) {
                                const int y = iy0 + ky;
                                if (y < 0 || y >= Y) continue;
                                for (int kx = 0; kx < 3; ++kx) {
                                    const int x = ix0 + kx;
                                    if (x < 0 || x >= X) continue;
                                    sum += wp[(kz * 3 + ky) * 3 + kx] *
                                           ip[(static_cast<std::size_t>(z) * Y + y) * X + x];
                                }
                            }
                        }
                    }
                    out.data[co * out_cs + (static_cast<std::size_t>(oz) * OY + oy) * OX + ox] = sum;
                }
    }
    return out;
}

void Model::conv_backward(const ConvRef& c, const Tensor& in, const Tensor& gout,
                          Tensor* gin, Tensor& gw, Tensor& gb) const {
    const int X = in.shape[1], Y = in.shape[2], Z = in.shape[3];
    const int OX = gout.shape[1], OY = gout.shape[2], OZ = gout.shape[3];
    const double* W = params_[c.w].value.data.data();
    const std::size_t in_cs = static_cast<std::size_t>(X) * Y * Z;
    const std::size_t out_cs = static_cast<std::size_t>(OX) * OY * OZ;
    for (int co = 0; co < c.out_ch; ++co) {
        for (int oz = 0; oz < OZ; ++oz)
            for (int oy = 0; oy < OY; ++oy)
                for (int ox = 0; ox < OX; ++ox) {
                    const double g = gout.data[co * out_cs + (static_cast<std::size_t>(oz) * OY + oy) * OX + ox];
                    if (g == 0.0) continue;
                    gb.data[co] += g;
                    const int ix0 = ox * 2 - 1, iy0 = oy * 2 - 1, iz0 = oz * 2 - 1;
                    for (int ci = 0; ci < c.in_ch; ++ci) {
                        const double* ip = in.data.data() + ci * in_cs;
                        double* gwp = gw.data.data() + ((static_cast<std::size_t>(co) * c.in_ch + ci) * 27);
                        const double* wp = W + ((static_cast<std::size_t>(co) * c.in_ch + ci) * 27);
                        double* gip = gin ? gin->data.data() + ci * in_cs : nullptr;
                        for (int kz = 0; kz < 3; ++kz) {
                            const int z = iz0 + kz;
                            if (z < 0 || z >= Z) continue;
                            for (int ky = 0; ky < 3; ++ky) {
                                const int y = iy0 + ky;
                                if (y < 0 || y >= Y) continue;
                                for (int kx = 0; kx < 3; ++kx) {
                                    const int x = ix0 + kx;
                                    if (x < 0 || x >= X) continue;
                                    const std::size_t ii = (static_cast<std::size_t>(z) * Y + y) * X + x;
                                    gwp[(kz * 3 + ky) * 3 + kx] += g * ip[ii];
                                    if (gip) gip[ii] += g * wp[(kz * 3 + ky) * 3 + kx];
                                }
                            }
                        }
                    }
                }
    }
}

Tensor Model::encode(const Tensor& input, Trace* tr) const {
    if (input.shape.size() != 4 || input.shape[0] != 1 ||
        input.shape[1] != cfg_.input_shape[0] || input.shape[2] != cfg_.input_shape[1] ||
        input.shape[3] != cfg_.input_shape[2])
        throw ConfigError("Model::encode: input shape does not match EncoderConfig.input_shape");
    if (tr) {
        tr->acts.clear();
        tr->acts.push_back(input);
    }
    Tensor cur = input;
    for (const auto& c : convs_) {
        Tensor out = conv_forward(c, cur);
        for (auto& x : out.data) x = std::tanh(x);
        if (tr) tr->acts.push_back(out);
        cur = std::move(out);
    }
    return cur;
}

std::vector<double> Model::pool(const Tensor& fmap) const {
    const int C = fmap.shape[0];
    const std::size_t sites = fmap.numel() / C;
    std::vector<double> z(C, 0.0);
    for (int c = 0; c < C; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < sites; ++i) s += fmap.data[c * sites + i];
        z[c] = s / static_cast<double>(sites);
    }
    return z;
}

std::vector<double> Model::project(const std::vector<double>& z, Trace* tr) const {
    if (static_cast<int>(z.size()) != lins_.front().in_dim)
        throw ConfigError("Model::project: input length does not match projector");
    if (tr) tr->hidden.assign(lins_.size(), {});
    std::vector<double> cur = z;
    for (std::size_t i = 0; i < lins_.size(); ++i) {
        const auto& l = lins_[i];
        const double* W = params_[l.w].value.data.data();
        const double* B = params_[l.b].value.data.data();
        std::vector<double> out(l.out_dim);
        for (int o = 0; o < l.out_dim; ++o) {
            double s = B[o];
            const double* wrow = W + static_cast<std::size_t>(o) * l.in_dim;
            for (int k = 0; k < l.in_dim; ++k) s += wrow[k] * cur[k];
            out[o] = (i + 1 < lins_.size()) ? std::tanh(s) : s;
        }
        if (tr) tr->hidden[i] = out;
        cur = std::move(out);
    }
    return cur;
}

Embedding Model::embed(const Volume& v, Trace* tr) const {
    Tensor input = volume_to_tensor(v);
    Tensor fmap = encode(input, tr);
    std::vector<double> z = pool(fmap);
    if (tr) tr->z = z;
    std::vector<double> q = project(z, tr);
    return {std::move(z), std::move(q)};
}

BasisSet Model::embed_bases(const std::vector<Volume>& base_volumes, std::vector<Trace>* traces) const {
    BasisSet bs;
    if (traces) traces->assign(base_volumes.size(), {});
    for (std::size_t i = 0; i < base_volumes.size(); ++i) {
        Embedding e = embed(base_volumes[i], traces ? &(*traces)[i] : nullptr);
        bs.z.push_back(std::move(e.z));
        bs.q.push_back(std::move(e.q));
    }
    return bs;
}

void Model::zero_grad() {
    for (auto& p : params_) p.grad.zero();
}

void Model::backward(const Trace& tr, const std::vector<double>& dq) {
    // projector, last layer first
    std::vector<double> cur = dq;
    for (int i = static_cast<int>(lins_.size()) - 1; i >= 0; --i) {
        const auto& l = lins_[i];
        const std::vector<double>& out = tr.hidden[i];
        const std::vector<double>& in = (i == 0) ? tr.z : tr.hidden[i - 1];
        std::vector<double> dpre(l.out_dim);
        const bool last = (i + 1 == static_cast<int>(lins_.size()));
        for (int o = 0; o < l.out_dim; ++o)
            dpre[o] = last ? cur[o] : cur[o] * (1.0 - out[o] * out[o]);
        double* gW = params_[l.w].grad.data.data();
        double* gB = params_[l.b].grad.data.data();
        const double* W = params_[l.w].value.data.data();
        std::vector<double> din(l.in_dim, 0.0);
        for (int o = 0; o < l.out_dim; ++o) {
            gB[o] += dpre[o];
            double* gwrow = gW + static_cast<std::size_t>(o) * l.in_dim;
            const double* wrow = W + static_cast<std::size_t>(o) * l.in_dim;
            for (int k = 0; k < l.in_dim; ++k) {
                gwrow[k] += dpre[o] * in[k];
                din[k] += dpre[o] * wrow[k];
            }
        }
        cur = std::move(din);
    }

    // pool backward: spread channel grads evenly over spatial sites
    const Tensor& fmap = tr.acts.back();
    const int C = fmap.shape[0];
    const std::size_t sites = fmap.numel() / C;
    Tensor gfmap(fmap.shape);
    for (int c = 0; c < C; ++c) {
        const double g = cur[c] / static_cast<double>(sites);
        for (std::size_t i = 0; i < sites; ++i) gfmap.data[c * sites + i] = g;
    }

    // conv stages, last first; acts[s] is the input of stage s
    Tensor gout = std::move(gfmap);
    for (int s = static_cast<int>(convs_.size()) - 1; s >= 0; --s) {
        const Tensor& out = tr.acts[s + 1];
        for (std::size_t i = 0; i < gout.data.size(); ++i)
            gout.data[i] *= (1.0 - out.data[i] * out.data[i]);
        const Tensor& in = tr.acts[s];
        Tensor gin(in.shape);
        conv_backward(convs_[s], in, gout, s > 0 ? &gin : nullptr,
                      params_[convs_[s].w].grad, params_[convs_[s].b].grad);
        gout = std::move(gin);
    }
}

void Model::add_to_archive(Archive& a) const {
    a.meta["encoder_config"] = cfg_.to_json();
    for (const auto& p : params_) a.add("param." + p.name, p.value);
}

Model Model::from_archive(const Archive& a) {
    if (!a.meta.contains("encoder_config"))
        throw CheckpointError("Model::from_archive: missing encoder_config");
    Model m(EncoderConfig::from_json(a.meta["encoder_config"]));
    for (auto& p : m.params_) {
        const Tensor* t = a.find("param." + p.name);
        if (!t) throw CheckpointError("Model::from_archive: missing tensor param." + p.name);
        if (t->shape != p.value.shape)
            throw CheckpointError("Model::from_archive: shape mismatch for param." + p.name);
        p.value = *t;
    }
    return m;
}

} // namespace voco
