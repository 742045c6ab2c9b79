#include "openobj/field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <stdexcept>

#include "openobj/tensor.hpp"

namespace openobj {

using json = nlohmann::json;

Eigen::VectorXd positional_encode(const Eigen::Vector3d& p, int freqs) {
    Eigen::VectorXd out(3 + 6 * freqs);
    out.head<3>() = p;
    for (int l = 0; l < freqs; ++l) {
        double s = std::pow(2.0, l) * M_PI;
        for (int a = 0; a < 3; ++a) {
            out[3 + 6 * l + a] = std::sin(s * p[a]);
            out[3 + 6 * l + 3 + a] = std::cos(s * p[a]);
        }
    }
    return out;
}

namespace {

Eigen::MatrixXd encode_batch(const Eigen::Matrix<double, Eigen::Dynamic, 3>& pts, int freqs) {
    const int64_t n = pts.rows();
    Eigen::MatrixXd out(n, 3 + 6 * freqs);
    out.leftCols<3>() = pts;
    for (int l = 0; l < freqs; ++l) {
        double s = std::pow(2.0, l) * M_PI;
        out.middleCols(3 + 6 * l, 3) = (pts.array() * s).sin();
        out.middleCols(3 + 6 * l + 3, 3) = (pts.array() * s).cos();
    }
    return out;
}

LinearLayer init_layer(int out_dim, int in_dim, std::mt19937_64& rng) {
    // He-style uniform init
    double bound = std::sqrt(6.0 / double(in_dim));
    std::uniform_real_distribution<double> u(-bound, bound);
    LinearLayer l;
    l.W.resize(out_dim, in_dim);
    for (int r = 0; r < out_dim; ++r)
        for (int c = 0; c < in_dim; ++c) l.W(r, c) = u(rng);
    l.b = Eigen::VectorXd::Zero(out_dim);
    return l;
}

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) {
    return 1.0 / (1.0 + (-x).exp());
}

template <typename Fn>
void for_each_layer(FieldParamSet& p, Fn&& fn) {
    for (auto& l : p.trunk) fn(l);
    fn(p.color_head);
    fn(p.occ_head);
    fn(p.feat_head);
}

template <typename Fn>
void for_each_layer(const FieldParamSet& p, Fn&& fn) {
    for (const auto& l : p.trunk) fn(l);
    fn(p.color_head);
    fn(p.occ_head);
    fn(p.feat_head);
}

}  // namespace

void FieldParamSet::set_zero() {
    for_each_layer(*this, [](LinearLayer& l) {
        l.W.setZero();
        l.b.setZero();
    });
}

bool FieldParamSet::all_finite() const {
    bool ok = true;
    for_each_layer(*this, [&](const LinearLayer& l) {
        ok = ok && l.W.allFinite() && l.b.allFinite();
    });
    return ok;
}

FieldNetwork::FieldNetwork(const FieldConfig& cfg, const Eigen::Vector3d& domain_center,
                           const Eigen::Vector3d& domain_half_extent, uint64_t seed)
    : cfg_(cfg), center_(domain_center), half_extent_(domain_half_extent) {
    if ((half_extent_.array() <= 0).any())
        throw std::invalid_argument("FieldNetwork: half extent must be positive");
    std::mt19937_64 rng(seed);
    int in_dim = cfg.input_dim();
    for (int i = 0; i < cfg.hidden_layers; ++i) {
        params_.trunk.push_back(init_layer(cfg.hidden_dim, in_dim, rng));
        in_dim = cfg.hidden_dim;
    }
    params_.color_head = init_layer(3, cfg.hidden_dim, rng);
    params_.occ_head = init_layer(1, cfg.hidden_dim, rng);
    params_.feat_head = init_layer(cfg.feat_dim, cfg.hidden_dim, rng);
}

Eigen::Matrix<double, Eigen::Dynamic, 3> FieldNetwork::normalize_points(
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& world) const {
    Eigen::Matrix<double, Eigen::Dynamic, 3> out = world;
    out.rowwise() -= center_.transpose();
    out.array().rowwise() /= half_extent_.transpose().array();
    return out.cwiseMax(-1.0).cwiseMin(1.0);
}

FieldOutput FieldNetwork::forward(const Eigen::Matrix<double, Eigen::Dynamic, 3>& world,
                                  ForwardCache* cache) const {
    if (!params_.all_finite()) throw std::runtime_error("field forward: non-finite parameters");
    Eigen::MatrixXd enc = encode_batch(normalize_points(world), cfg_.enc_freqs);

    std::vector<Eigen::MatrixXd> hidden;
    const Eigen::MatrixXd* x = &enc;
    for (const auto& l : params_.trunk) {
        Eigen::MatrixXd h = (*x * l.W.transpose()).rowwise() + l.b.transpose();
        hidden.push_back(h.cwiseMax(0.0));
        x = &hidden.back();
    }
    const Eigen::MatrixXd& last = *x;

    FieldOutput out;
    out.color = sigmoid(((last * params_.color_head.W.transpose()).rowwise() +
                         params_.color_head.b.transpose())
                            .array());
    out.occ = sigmoid(((last * params_.occ_head.W.transpose()).rowwise() +
                       params_.occ_head.b.transpose())
                          .array())
                  .col(0);
    out.feat = (last * params_.feat_head.W.transpose()).rowwise() +
               params_.feat_head.b.transpose();

    if (cache) {
        cache->enc = std::move(enc);
        cache->hidden = std::move(hidden);
    }
    return out;
}

void FieldNetwork::backward(const ForwardCache& cache, const FieldOutput& out,
                            const Eigen::MatrixXd& d_color, const Eigen::VectorXd& d_occ,
                            const Eigen::MatrixXd& d_feat, FieldParamSet& grads) const {
    const Eigen::MatrixXd& last = cache.hidden.empty() ? cache.enc : cache.hidden.back();

    // heads: logistic derivative y(1-y) for the squashed outputs
    Eigen::MatrixXd d_color_logit =
        d_color.array() * out.color.array() * (1.0 - out.color.array());
    Eigen::VectorXd d_occ_logit =
        (d_occ.array() * out.occ.array() * (1.0 - out.occ.array())).matrix();

    Eigen::MatrixXd d_last = Eigen::MatrixXd::Zero(last.rows(), last.cols());

    grads.color_head.W += d_color_logit.transpose() * last;
    grads.color_head.b += d_color_logit.colwise().sum().transpose();
    d_last += d_color_logit * params_.color_head.W;

    grads.occ_head.W += d_occ_logit.transpose() * last;
    grads.occ_head.b += Eigen::VectorXd::Constant(1, d_occ_logit.sum());
    d_last += d_occ_logit * params_.occ_head.W;

    grads.feat_head.W += d_feat.transpose() * last;
    grads.feat_head.b += d_feat.colwise().sum().transpose();
    d_last += d_feat * params_.feat_head.W;

    for (int i = int(params_.trunk.size()) - 1; i >= 0; --i) {
        const Eigen::MatrixXd& act = cache.hidden[size_t(i)];
        const Eigen::MatrixXd& input = i == 0 ? cache.enc : cache.hidden[size_t(i - 1)];
        Eigen::MatrixXd d_pre = (d_last.array() * (act.array() > 0.0).cast<double>()).matrix();
        grads.trunk[size_t(i)].W += d_pre.transpose() * input;
        grads.trunk[size_t(i)].b += d_pre.colwise().sum().transpose();
        if (i > 0) d_last = d_pre * params_.trunk[size_t(i)].W;
    }

    if (!grads.all_finite()) throw std::runtime_error("field backward: non-finite gradient");
}

FieldParamSet FieldNetwork::zero_like() const {
    FieldParamSet g = params_;
    g.set_zero();
    return g;
}

Eigen::VectorXd FieldNetwork::flatten(const FieldParamSet& p) {
    int64_t n = 0;
    for_each_layer(p, [&](const LinearLayer& l) { n += l.W.size() + l.b.size(); });
    Eigen::VectorXd flat(n);
    int64_t off = 0;
    for_each_layer(p, [&](const LinearLayer& l) {
        flat.segment(off, l.W.size()) = Eigen::Map<const Eigen::VectorXd>(l.W.data(), l.W.size());
        off += l.W.size();
        flat.segment(off, l.b.size()) = l.b;
        off += l.b.size();
    });
    return flat;
}

Eigen::VectorXd FieldNetwork::flatten_params() const { return flatten(params_); }

void FieldNetwork::unflatten_params(const Eigen::VectorXd& flat) {
    int64_t off = 0;
    for_each_layer(params_, [&](LinearLayer& l) {
        Eigen::Map<Eigen::VectorXd>(l.W.data(), l.W.size()) = flat.segment(off, l.W.size());
        off += l.W.size();
        l.b = flat.segment(off, l.b.size());
        off += l.b.size();
    });
    if (off != flat.size()) throw std::invalid_argument("unflatten_params: size mismatch");
}

bool FieldNetwork::operator==(const FieldNetwork& o) const {
    return center_ == o.center_ && half_extent_ == o.half_extent_ &&
           flatten_params() == o.flatten_params();
}

AdamState make_adam_state(const FieldNetwork& net) {
    AdamState s;
    s.m = net.zero_like();
    s.v = net.zero_like();
    return s;
}

namespace {

void adam_update_layer(LinearLayer& p, const LinearLayer& g, LinearLayer& m, LinearLayer& v,
                       const AdamConfig& cfg, double bc1, double bc2) {
    m.W = cfg.beta1 * m.W + (1 - cfg.beta1) * g.W;
    m.b = cfg.beta1 * m.b + (1 - cfg.beta1) * g.b;
    v.W = cfg.beta2 * v.W.array().matrix() + (1 - cfg.beta2) * g.W.cwiseProduct(g.W);
    v.b = cfg.beta2 * v.b + (1 - cfg.beta2) * g.b.cwiseProduct(g.b);
    p.W.array() -= cfg.lr * (m.W.array() / bc1) / ((v.W.array() / bc2).sqrt() + cfg.eps);
    p.b.array() -= cfg.lr * (m.b.array() / bc1) / ((v.b.array() / bc2).sqrt() + cfg.eps);
}

}  // namespace

void adam_step(FieldNetwork& net, const FieldParamSet& grads, AdamState& state,
               const AdamConfig& cfg) {
    state.step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, double(state.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, double(state.step));
    FieldParamSet& p = net.params();
    for (size_t i = 0; i < p.trunk.size(); ++i)
        adam_update_layer(p.trunk[i], grads.trunk[i], state.m.trunk[i], state.v.trunk[i], cfg, bc1,
                          bc2);
    adam_update_layer(p.color_head, grads.color_head, state.m.color_head, state.v.color_head, cfg,
                      bc1, bc2);
    adam_update_layer(p.occ_head, grads.occ_head, state.m.occ_head, state.v.occ_head, cfg, bc1,
                      bc2);
    adam_update_layer(p.feat_head, grads.feat_head, state.m.feat_head, state.v.feat_head, cfg, bc1,
                      bc2);
}

void adam_step_flat(Eigen::VectorXd& params, const Eigen::VectorXd& grads, Eigen::VectorXd& m,
                    Eigen::VectorXd& v, int64_t& step, const AdamConfig& cfg) {
    step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, double(step));
    double bc2 = 1.0 - std::pow(cfg.beta2, double(step));
    m = cfg.beta1 * m + (1 - cfg.beta1) * grads;
    v = cfg.beta2 * v.array().matrix() + (1 - cfg.beta2) * grads.cwiseProduct(grads);
    params.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

void save_checkpoint(const std::filesystem::path& path, const FieldNetwork& net) {
    json header;
    header["enc_freqs"] = net.config().enc_freqs;
    header["hidden_layers"] = net.config().hidden_layers;
    header["hidden_dim"] = net.config().hidden_dim;
    header["feat_dim"] = net.config().feat_dim;
    header["center"] = {net.center()[0], net.center()[1], net.center()[2]};
    header["half_extent"] = {net.half_extent()[0], net.half_extent()[1], net.half_extent()[2]};
    std::string hs = header.dump();

    std::vector<uint8_t> buf;
    buf.insert(buf.end(), {'O', 'B', 'C', 'K'});
    uint32_t len = uint32_t(hs.size());
    for (int b = 0; b < 4; ++b) buf.push_back(uint8_t(len >> (8 * b)));
    buf.insert(buf.end(), hs.begin(), hs.end());

    Eigen::VectorXd flat = net.flatten_params();
    std::vector<double> vals(flat.data(), flat.data() + flat.size());
    serialize_tensor(buf, TensorBlob::from_f64({uint64_t(vals.size())}, vals));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path.string());
    f.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

FieldNetwork load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path.string());
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
    if (buf.size() < 8 || std::memcmp(buf.data(), "OBCK", 4) != 0)
        throw std::runtime_error("bad checkpoint magic in " + path.string());
    uint32_t len = 0;
    for (int b = 0; b < 4; ++b) len |= uint32_t(buf[4 + size_t(b)]) << (8 * b);
    if (buf.size() < 8 + size_t(len)) throw std::runtime_error("truncated checkpoint header");
    json header = json::parse(std::string(buf.begin() + 8, buf.begin() + 8 + len));

    FieldConfig cfg;
    cfg.enc_freqs = header.at("enc_freqs").get<int>();
    cfg.hidden_layers = header.at("hidden_layers").get<int>();
    cfg.hidden_dim = header.at("hidden_dim").get<int>();
    cfg.feat_dim = header.at("feat_dim").get<int>();
    Eigen::Vector3d center(header.at("center")[0].get<double>(),
                           header.at("center")[1].get<double>(),
                           header.at("center")[2].get<double>());
    Eigen::Vector3d half(header.at("half_extent")[0].get<double>(),
                         header.at("half_extent")[1].get<double>(),
                         header.at("half_extent")[2].get<double>());

    FieldNetwork net(cfg, center, half, 0);
    size_t offset = 8 + size_t(len);
    TensorBlob t = deserialize_tensor(buf.data(), buf.size(), offset);
    std::vector<double> vals = t.as_f64();
    net.unflatten_params(Eigen::Map<const Eigen::VectorXd>(vals.data(), int64_t(vals.size())));
    return net;
}

}  // namespace openobj
