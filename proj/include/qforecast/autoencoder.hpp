#pragma once

#include <cstdint>
#include <vector>

#include "qforecast/data.hpp"
#include "qforecast/nn.hpp"

namespace qforecast::ae {

inline constexpr int kHiddenUnits = 32;

// LSTM(1 -> 32) over the window's scalar timesteps, then a tanh projection
// of the final hidden state down to the n_latent features.
struct EncoderSpec {
    nn::LstmCell lstm;
    nn::DenseLayer projection;
};

// Mirror: expand the latent to 32, feed it repeated w times through an
// LSTM(32 -> 32), read one value per timestep.
struct DecoderSpec {
    nn::DenseLayer expansion;
    nn::LstmCell lstm;
    nn::DenseLayer readout;
};

struct TrainingInfo {
    int epochs_run = 0;
    double final_loss = 0.0; // last epoch's mean training reconstruction MSE
};

struct AutoencoderWeights {
    int n_latent = 0;
    int window_size = 0;
    EncoderSpec encoder;
    DecoderSpec decoder;
    TrainingInfo training;
};

AutoencoderWeights make_autoencoder(int n_latent, int window_size, std::uint64_t seed);

// Latent features of one normalized window; entries lie strictly in (-1, 1).
nn::VectorXd encode(const AutoencoderWeights& weights, const nn::VectorXd& window);

// Reconstruction of a window from its latent.
nn::VectorXd decode(const AutoencoderWeights& weights, const nn::VectorXd& latent);

// Mean reconstruction MSE over a window set, no training.
double reconstruction_mse(const AutoencoderWeights& weights, const data::WindowSet& windows);

struct AeTrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 0.0005;
    double clip_norm = 5.0;
    std::uint64_t seed = 1;
};

struct AeTrainResult {
    std::vector<double> loss_history; // per-epoch mean reconstruction MSE
};

AeTrainResult train_autoencoder(AutoencoderWeights& weights, const data::WindowSet& windows,
                                const AeTrainConfig& config);

// Every trainable block, for Adam and for checkpointing.
nn::ParameterBundle parameter_bundle(AutoencoderWeights& weights);

} // namespace qforecast::ae
