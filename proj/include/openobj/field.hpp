#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace openobj {

// Sinusoidal positional encoding: [p, sin(2^l pi p), cos(2^l pi p)]
// for l = 0..L-1 per axis; output length 3 + 6L.
Eigen::VectorXd positional_encode(const Eigen::Vector3d& p, int freqs);

struct FieldConfig {
    int enc_freqs = 5;
    int hidden_layers = 4;
    int hidden_dim = 32;
    int feat_dim = 16;

    int input_dim() const { return 3 + 6 * enc_freqs; }
};

struct LinearLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
};

// Structured gradient/moment mirror of the network parameters.
struct FieldParamSet {
    std::vector<LinearLayer> trunk;
    LinearLayer color_head, occ_head, feat_head;

    void set_zero();
    bool all_finite() const;
};

struct ForwardCache {
    Eigen::MatrixXd enc;                  // P x input_dim
    std::vector<Eigen::MatrixXd> hidden;  // P x hidden_dim post-ReLU
};

struct FieldOutput {
    Eigen::MatrixXd color;  // P x 3, in (0,1)
    Eigen::VectorXd occ;    // P, in (0,1)
    Eigen::MatrixXd feat;   // P x feat_dim, linear
};

// Per-object coordinate MLP mapping world position -> (color, occupancy,
// feature). Shared ReLU trunk, three linear heads; color and occupancy pass
// through a logistic squash. View direction is not an input.
class FieldNetwork {
public:
    FieldNetwork() = default;
    FieldNetwork(const FieldConfig& cfg, const Eigen::Vector3d& domain_center,
                 const Eigen::Vector3d& domain_half_extent, uint64_t seed);

    const FieldConfig& config() const { return cfg_; }
    const Eigen::Vector3d& center() const { return center_; }
    const Eigen::Vector3d& half_extent() const { return half_extent_; }

    FieldParamSet& params() { return params_; }
    const FieldParamSet& params() const { return params_; }

    // Maps world points into the clamped [-1,1]^3 field domain.
    Eigen::Matrix<double, Eigen::Dynamic, 3> normalize_points(
        const Eigen::Matrix<double, Eigen::Dynamic, 3>& world) const;

    // Batched forward pass on world points (rows). Cache is optional and
    // required for backward().
    FieldOutput forward(const Eigen::Matrix<double, Eigen::Dynamic, 3>& world,
                        ForwardCache* cache = nullptr) const;

    // Accumulates exact parameter gradients given upstream derivatives of the
    // squashed color, squashed occupancy, and linear feature outputs.
    void backward(const ForwardCache& cache, const FieldOutput& out,
                  const Eigen::MatrixXd& d_color, const Eigen::VectorXd& d_occ,
                  const Eigen::MatrixXd& d_feat, FieldParamSet& grads) const;

    FieldParamSet zero_like() const;

    // Flat f64 views for checkpointing and finite differencing.
    Eigen::VectorXd flatten_params() const;
    void unflatten_params(const Eigen::VectorXd& flat);
    static Eigen::VectorXd flatten(const FieldParamSet& p);

    bool operator==(const FieldNetwork& o) const;

private:
    FieldConfig cfg_;
    Eigen::Vector3d center_ = Eigen::Vector3d::Zero();
    Eigen::Vector3d half_extent_ = Eigen::Vector3d::Ones();
    FieldParamSet params_;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    FieldParamSet m, v;
    int64_t step = 0;
};

AdamState make_adam_state(const FieldNetwork& net);

// Bias-corrected adaptive-moment update applied in place.
void adam_step(FieldNetwork& net, const FieldParamSet& grads, AdamState& state,
               const AdamConfig& cfg);

// Scalar Adam update (same rule) for plain parameter vectors.
void adam_step_flat(Eigen::VectorXd& params, const Eigen::VectorXd& grads, Eigen::VectorXd& m,
                    Eigen::VectorXd& v, int64_t& step, const AdamConfig& cfg);

void save_checkpoint(const std::filesystem::path& path, const FieldNetwork& net);
FieldNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace openobj
