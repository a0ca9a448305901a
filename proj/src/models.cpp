#include "qforecast/models.hpp"

#include <cmath>
#include <numeric>

namespace qforecast::models {

namespace {

using nn::VectorXd;

// Entangling angles start near identity; large random angles would start
// the circuit deep in a featureless region of the loss landscape.
constexpr double kQuantumInitRange = 0.1;

void check_latent(const ModelLabel& label, const VectorXd& latent) {
    if (latent.size() != label.n_q) {
        throw UsageError("latent length " + std::to_string(latent.size()) + " does not match N_q = " +
                         std::to_string(label.n_q));
    }
}

std::vector<double> to_std(const VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

qsim::ReuploadCircuitSpec random_circuit(int n_qubits, int n_blocks, double angle_scale, Rng& rng) {
    qsim::ReuploadCircuitSpec spec = qsim::ReuploadCircuitSpec::zeros(n_qubits, n_blocks, angle_scale);
    for (auto& block : spec.blocks) {
        for (auto& triple : block.angles) {
            for (double& a : triple) {
                a = uniform(rng, -kQuantumInitRange, kQuantumInitRange);
            }
        }
    }
    return spec;
}

class ClassicA final : public Regressor {
public:
    ClassicA(const ModelLabel& label, std::uint64_t seed) : label_(label) {
        Rng rng(seed);
        const int hidden = 1 << label.n_q;
        hidden_ = nn::DenseLayer::create(label.n_q, hidden, nn::Activation::Tanh, rng);
        output_ = nn::DenseLayer::create(hidden, 1, nn::Activation::Linear, rng);
        param_count_ = parameters().total_size();
    }

    const ModelLabel& label() const override { return label_; }

    ModelInfo info() const override {
        ModelInfo info;
        info.latent_dim = label_.n_q;
        info.hidden_width = hidden_.out_dim();
        info.parameter_count = param_count_;
        return info;
    }

    double predict(const VectorXd& latent) const override {
        check_latent(label_, latent);
        return nn::dense_forward(output_, nn::dense_forward(hidden_, latent))(0);
    }

    double forward(const VectorXd& latent) override {
        check_latent(label_, latent);
        const VectorXd h = nn::dense_forward(hidden_, latent, hidden_cache_);
        has_cache_ = true;
        return nn::dense_forward(output_, h, output_cache_)(0);
    }

    void backward(double upstream) override {
        if (!has_cache_) {
            throw InternalError("backward without a forward cache");
        }
        const VectorXd dh = nn::dense_backward(output_, output_cache_, VectorXd::Constant(1, upstream));
        nn::dense_backward(hidden_, hidden_cache_, dh);
    }

    nn::ParameterBundle parameters() override {
        return nn::concat({nn::dense_params(hidden_, "hidden"), nn::dense_params(output_, "output")});
    }

private:
    ModelLabel label_;
    nn::DenseLayer hidden_;
    nn::DenseLayer output_;
    nn::DenseCache hidden_cache_, output_cache_;
    bool has_cache_ = false;
    std::size_t param_count_ = 0;
};

class HybridBase : public Regressor {
public:
    HybridBase(const ModelLabel& label, int n_blocks, double angle_scale, std::uint64_t seed)
        : label_(label) {
        Rng rng(seed);
        spec_ = random_circuit(label.n_q, n_blocks, angle_scale, rng);
        grads_.assign(spec_.blocks.size(), qsim::EntanglingBlockParams::zeros(label.n_q));
        output_ = nn::DenseLayer::create(label.n_q, 1, nn::Activation::Linear, rng);
        param_count_ = parameters().total_size();
    }

    const ModelLabel& label() const override { return label_; }

    ModelInfo info() const override {
        ModelInfo info;
        info.latent_dim = label_.n_q;
        info.reupload_blocks = spec_.n_blocks;
        info.n_qubits = spec_.n_qubits;
        info.parameter_count = param_count_;
        return info;
    }

    double predict(const VectorXd& latent) const override {
        check_latent(label_, latent);
        const auto expectations = qsim::run_reupload_circuit(spec_, to_std(latent));
        return nn::dense_forward(output_, Eigen::Map<const VectorXd>(expectations.data(),
                                                                     static_cast<Eigen::Index>(expectations.size())))(0);
    }

    double forward(const VectorXd& latent) override {
        check_latent(label_, latent);
        features_ = to_std(latent);
        const auto expectations = qsim::run_reupload_circuit(spec_, features_);
        const VectorXd exp_vec =
            Eigen::Map<const VectorXd>(expectations.data(), static_cast<Eigen::Index>(expectations.size()));
        has_cache_ = true;
        return nn::dense_forward(output_, exp_vec, output_cache_)(0);
    }

    void backward(double upstream) override {
        if (!has_cache_) {
            throw InternalError("backward without a forward cache");
        }
        const VectorXd d_expect =
            nn::dense_backward(output_, output_cache_, VectorXd::Constant(1, upstream));
        const qsim::CircuitGradient grad = qsim::circuit_gradient(spec_, features_, to_std(d_expect));
        circuit_evals_ += grad.n_circuit_evals;
        // The latent comes from the frozen encoder, so grad.feature_grad is
        // dropped here.
        for (std::size_t b = 0; b < grads_.size(); ++b) {
            for (std::size_t q = 0; q < grads_[b].angles.size(); ++q) {
                for (int j = 0; j < 3; ++j) {
                    grads_[b].angles[q][j] += grad.block_grads[b].angles[q][j];
                }
            }
        }
    }

    nn::ParameterBundle parameters() override {
        nn::ParameterBundle bundle;
        for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
            const int count = spec_.n_qubits * 3;
            bundle.blocks.push_back(nn::ParamBlock("quantum.block" + std::to_string(b),
                                                   spec_.blocks[b].angles[0].data(),
                                                   grads_[b].angles[0].data(), count, 1));
        }
        return nn::concat({std::move(bundle), nn::dense_params(output_, "output")});
    }

    std::int64_t circuit_evals() const override { return circuit_evals_; }

protected:
    ModelLabel label_;
    qsim::ReuploadCircuitSpec spec_;
    std::vector<qsim::EntanglingBlockParams> grads_;
    nn::DenseLayer output_;
    nn::DenseCache output_cache_;
    std::vector<double> features_;
    bool has_cache_ = false;
    std::int64_t circuit_evals_ = 0;
    std::size_t param_count_ = 0;
};

// Scenario A hybrid: a single embed+entangle block, no re-uploading.
class HybridA final : public HybridBase {
public:
    HybridA(const ModelLabel& label, double angle_scale, std::uint64_t seed)
        : HybridBase(label, 1, angle_scale, seed) {}
};

// Scenario B hybrid: n_q re-uploads on n_q qubits.
class HybridB final : public HybridBase {
public:
    HybridB(const ModelLabel& label, double angle_scale, std::uint64_t seed)
        : HybridBase(label, label.n_q, angle_scale, seed) {}
};

// Scenario B classic: the latent is consumed as n_q scalar timesteps, so
// the cell recurses exactly n_q times.
class ClassicB final : public Regressor {
public:
    ClassicB(const ModelLabel& label, std::uint64_t seed) : label_(label) {
        Rng rng(seed);
        lstm_ = nn::LstmCell::create(1, label.n_q, rng);
        output_ = nn::DenseLayer::create(label.n_q, 1, nn::Activation::Linear, rng);
        param_count_ = parameters().total_size();
    }

    const ModelLabel& label() const override { return label_; }

    ModelInfo info() const override {
        ModelInfo info;
        info.latent_dim = label_.n_q;
        info.recursion_count = label_.n_q;
        info.parameter_count = param_count_;
        return info;
    }

    double predict(const VectorXd& latent) const override {
        check_latent(label_, latent);
        const auto out = nn::lstm_forward(lstm_, as_sequence(latent));
        return nn::dense_forward(output_, out.final_hidden)(0);
    }

    double forward(const VectorXd& latent) override {
        check_latent(label_, latent);
        const auto out = nn::lstm_forward(lstm_, as_sequence(latent), &lstm_cache_);
        has_cache_ = true;
        return nn::dense_forward(output_, out.final_hidden, output_cache_)(0);
    }

    void backward(double upstream) override {
        if (!has_cache_) {
            throw InternalError("backward without a forward cache");
        }
        const VectorXd dh = nn::dense_backward(output_, output_cache_, VectorXd::Constant(1, upstream));
        std::vector<VectorXd> upstream_h(lstm_cache_.steps.size(), VectorXd::Zero(label_.n_q));
        upstream_h.back() = dh;
        nn::lstm_backward_through_time(lstm_, lstm_cache_, upstream_h);
    }

    nn::ParameterBundle parameters() override {
        return nn::concat({nn::lstm_params(lstm_, "lstm"), nn::dense_params(output_, "output")});
    }

private:
    static std::vector<VectorXd> as_sequence(const VectorXd& latent) {
        std::vector<VectorXd> seq(static_cast<std::size_t>(latent.size()));
        for (Eigen::Index t = 0; t < latent.size(); ++t) {
            seq[static_cast<std::size_t>(t)] = VectorXd::Constant(1, latent(t));
        }
        return seq;
    }

    ModelLabel label_;
    nn::LstmCell lstm_;
    nn::DenseLayer output_;
    nn::LstmSequenceCache lstm_cache_;
    nn::DenseCache output_cache_;
    bool has_cache_ = false;
    std::size_t param_count_ = 0;
};

} // namespace

std::string to_string(Scenario s) {
    return s == Scenario::A ? "A" : "B";
}

std::string to_string(Variant v) {
    return v == Variant::Classic ? "classic" : "hybrid";
}

Scenario scenario_from_string(const std::string& token) {
    if (token == "A" || token == "a") {
        return Scenario::A;
    }
    if (token == "B" || token == "b") {
        return Scenario::B;
    }
    throw UsageError("invalid scenario '" + token + "' (valid: A, B)");
}

Variant variant_from_string(const std::string& token) {
    if (token == "classic") {
        return Variant::Classic;
    }
    if (token == "hybrid") {
        return Variant::Hybrid;
    }
    throw UsageError("invalid variant '" + token + "' (valid: classic, hybrid)");
}

std::string ModelLabel::display() const {
    return "Q" + std::to_string(n_q);
}

std::string ModelLabel::id() const {
    return to_string(scenario) + "-" + to_string(variant) + "-" + display();
}

std::vector<int> default_qubit_grid() {
    return {2, 4, 6, 8, 10, 12, 14};
}

std::unique_ptr<Regressor> build_model(const ModelLabel& label, std::uint64_t seed,
                                       double angle_scale) {
    if (label.n_q < kMinQubits || label.n_q > kMaxModelQubits) {
        throw ConfigError("N_q must be in [" + std::to_string(kMinQubits) + ", " +
                          std::to_string(kMaxModelQubits) + "], got " + std::to_string(label.n_q));
    }
    if (label.scenario == Scenario::A) {
        if (label.variant == Variant::Classic) {
            return std::make_unique<ClassicA>(label, seed);
        }
        return std::make_unique<HybridA>(label, angle_scale, seed);
    }
    if (label.variant == Variant::Classic) {
        return std::make_unique<ClassicB>(label, seed);
    }
    return std::make_unique<HybridB>(label, angle_scale, seed);
}

LatentDataset encode_windows(const ae::AutoencoderWeights& encoder, const data::WindowSet& windows) {
    if (windows.count() == 0) {
        throw UsageError("cannot encode an empty window set");
    }
    LatentDataset out;
    out.latents.resize(windows.count(), encoder.n_latent);
    out.targets = windows.targets;
    for (Eigen::Index j = 0; j < windows.count(); ++j) {
        out.latents.row(j) = ae::encode(encoder, windows.inputs.row(j).transpose()).transpose();
    }
    return out;
}

TrainResult train_regressor(Regressor& model, const LatentDataset& train, const LatentDataset* validation,
                            const TrainConfig& config) {
    if (train.latents.rows() == 0) {
        throw UsageError("cannot train a regressor on an empty dataset");
    }
    if (config.epochs < 1 || config.batch_size < 1) {
        throw ConfigError("epochs and batch size must be positive");
    }

    nn::ParameterBundle params = model.parameters();
    nn::AdamState adam;
    adam.learning_rate = config.learning_rate;
    adam.init_for(params);

    Rng shuffle_rng(seed_mix(config.seed, 0x5e6));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(train.latents.rows()));
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_in_place(order, shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
            params.zero_grads();
            for (std::size_t s = begin; s < end; ++s) {
                const VectorXd latent = train.latents.row(order[s]).transpose();
                const double pred = model.forward(latent);
                const double residual = pred - train.targets(order[s]);
                epoch_loss += residual * residual;
                model.backward(2.0 * residual);
            }
            params.scale_grads(1.0 / static_cast<double>(end - begin));
            params.clip_grad_norm(config.clip_norm);
            nn::adam_update(adam, params);
        }
        result.train_loss.push_back(epoch_loss / static_cast<double>(train.latents.rows()));
        if (validation != nullptr) {
            result.val_loss.push_back(mean_mse(model, *validation));
        }
    }
    return result;
}

nn::VectorXd predict_all(const Regressor& model, const nn::MatrixXd& latents) {
    VectorXd out(latents.rows());
    for (Eigen::Index j = 0; j < latents.rows(); ++j) {
        out(j) = model.predict(latents.row(j).transpose());
    }
    return out;
}

double mean_mse(const Regressor& model, const LatentDataset& dataset) {
    const VectorXd pred = predict_all(model, dataset.latents);
    return (pred - dataset.targets).squaredNorm() / static_cast<double>(dataset.targets.size());
}

} // namespace qforecast::models
