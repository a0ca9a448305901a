#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qforecast/autoencoder.hpp"
#include "qforecast/nn.hpp"
#include "qforecast/qsim.hpp"

namespace qforecast::models {

enum class Scenario { A, B };
enum class Variant { Classic, Hybrid };

std::string to_string(Scenario s);
std::string to_string(Variant v);
Scenario scenario_from_string(const std::string& token);
Variant variant_from_string(const std::string& token);

// Model grid identity. Scenario A matches an FC layer of 2^n_q neurons
// against an n_q-qubit quantum layer (equal encoded information); Scenario
// B matches an n_q-unit LSTM against an n_q-qubit circuit with n_q
// re-uploads (equal recursions).
struct ModelLabel {
    Scenario scenario = Scenario::A;
    Variant variant = Variant::Classic;
    int n_q = 2;

    std::string display() const; // "Q<n_q>"
    std::string id() const;      // "A-classic-Q4"
};

inline constexpr int kMinQubits = 2;
inline constexpr int kMaxModelQubits = 14;

// The even grid Q2..Q14 used by the experiments.
std::vector<int> default_qubit_grid();

// Structural facts asserted by the equivalence framings.
struct ModelInfo {
    int latent_dim = 0;      // input features (= n_q)
    int hidden_width = 0;    // A-classic: 2^n_q neurons; else 0
    int recursion_count = 0; // B-classic: LSTM timesteps; else 0
    int reupload_blocks = 0; // hybrids: quantum blocks (A: 1, B: n_q)
    int n_qubits = 0;        // hybrids: circuit width; else 0
    std::size_t parameter_count = 0;
};

// Next-step regressor over a frozen-encoder latent. forward() caches for
// the following backward(); predict() is the cache-free const path.
class Regressor {
public:
    virtual ~Regressor() = default;

    virtual const ModelLabel& label() const = 0;
    virtual ModelInfo info() const = 0;

    virtual double predict(const nn::VectorXd& latent) const = 0;
    virtual double forward(const nn::VectorXd& latent) = 0;
    virtual void backward(double upstream) = 0;
    virtual nn::ParameterBundle parameters() = 0;

    // Circuit evaluations spent on gradients so far (hybrids only).
    virtual std::int64_t circuit_evals() const { return 0; }
};

std::unique_ptr<Regressor> build_model(const ModelLabel& label, std::uint64_t seed,
                                       double angle_scale = 3.14159265358979323846);

struct TrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 0.0005;
    double clip_norm = 5.0;
    std::uint64_t seed = 1;
};

struct TrainResult {
    std::vector<double> train_loss; // per-epoch mean MSE over training samples
    std::vector<double> val_loss;   // per-epoch validation MSE (empty without a validation set)
};

// Precomputed (latent, target) pairs; the encoder stays frozen, so each
// window is encoded exactly once.
struct LatentDataset {
    nn::MatrixXd latents; // n x n_q
    nn::VectorXd targets; // n
};

LatentDataset encode_windows(const ae::AutoencoderWeights& encoder, const data::WindowSet& windows);

TrainResult train_regressor(Regressor& model, const LatentDataset& train, const LatentDataset* validation,
                            const TrainConfig& config);

nn::VectorXd predict_all(const Regressor& model, const nn::MatrixXd& latents);

double mean_mse(const Regressor& model, const LatentDataset& dataset);

} // namespace qforecast::models
