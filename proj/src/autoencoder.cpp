#include "qforecast/autoencoder.hpp"

#include <numeric>

namespace qforecast::ae {

namespace {

using nn::VectorXd;

std::vector<VectorXd> window_as_sequence(const VectorXd& window) {
    std::vector<VectorXd> seq(static_cast<std::size_t>(window.size()));
    for (Eigen::Index t = 0; t < window.size(); ++t) {
        seq[static_cast<std::size_t>(t)] = VectorXd::Constant(1, window(t));
    }
    return seq;
}

void check_window(const AutoencoderWeights& weights, const VectorXd& window) {
    if (window.size() != weights.window_size) {
        throw UsageError("window length " + std::to_string(window.size()) + " does not match w = " +
                         std::to_string(weights.window_size));
    }
}

struct ForwardCaches {
    nn::LstmSequenceCache enc_lstm;
    nn::DenseCache projection;
    nn::DenseCache expansion;
    nn::LstmSequenceCache dec_lstm;
    std::vector<nn::DenseCache> readout;
    VectorXd reconstruction;
};

VectorXd forward_cached(AutoencoderWeights& w, const VectorXd& window, ForwardCaches& caches) {
    const auto enc = nn::lstm_forward(w.encoder.lstm, window_as_sequence(window), &caches.enc_lstm);
    const VectorXd latent = nn::dense_forward(w.encoder.projection, enc.final_hidden, caches.projection);
    const VectorXd expanded = nn::dense_forward(w.decoder.expansion, latent, caches.expansion);
    const std::vector<VectorXd> dec_inputs(static_cast<std::size_t>(w.window_size), expanded);
    const auto dec = nn::lstm_forward(w.decoder.lstm, dec_inputs, &caches.dec_lstm);
    caches.readout.resize(static_cast<std::size_t>(w.window_size));
    caches.reconstruction.resize(w.window_size);
    for (int t = 0; t < w.window_size; ++t) {
        const VectorXd y = nn::dense_forward(w.decoder.readout, dec.hidden_states[static_cast<std::size_t>(t)],
                                             caches.readout[static_cast<std::size_t>(t)]);
        caches.reconstruction(t) = y(0);
    }
    return caches.reconstruction;
}

// Backward through readout, decoder BPTT, expansion, projection, and
// encoder BPTT (upstream only at the final hidden state). The decoder's
// repeated input accumulates its per-step gradients into one vector.
void backward_cached(AutoencoderWeights& w, ForwardCaches& caches, const VectorXd& d_reconstruction) {
    const std::size_t T = static_cast<std::size_t>(w.window_size);
    std::vector<VectorXd> d_dec_hidden(T);
    for (std::size_t t = 0; t < T; ++t) {
        d_dec_hidden[t] = nn::dense_backward(w.decoder.readout, caches.readout[t],
                                             VectorXd::Constant(1, d_reconstruction(static_cast<Eigen::Index>(t))));
    }
    const std::vector<VectorXd> d_dec_inputs =
        nn::lstm_backward_through_time(w.decoder.lstm, caches.dec_lstm, d_dec_hidden);
    VectorXd d_expanded = VectorXd::Zero(kHiddenUnits);
    for (const VectorXd& dx : d_dec_inputs) {
        d_expanded += dx;
    }
    const VectorXd d_latent = nn::dense_backward(w.decoder.expansion, caches.expansion, d_expanded);
    const VectorXd d_final_hidden = nn::dense_backward(w.encoder.projection, caches.projection, d_latent);
    std::vector<VectorXd> d_enc_hidden(T, VectorXd::Zero(kHiddenUnits));
    d_enc_hidden[T - 1] = d_final_hidden;
    nn::lstm_backward_through_time(w.encoder.lstm, caches.enc_lstm, d_enc_hidden);
}

} // namespace

AutoencoderWeights make_autoencoder(int n_latent, int window_size, std::uint64_t seed) {
    if (n_latent < 1) {
        throw ConfigError("latent size must be positive, got " + std::to_string(n_latent));
    }
    if (window_size < 1) {
        throw ConfigError("window size must be positive, got " + std::to_string(window_size));
    }
    Rng rng(seed);
    AutoencoderWeights w;
    w.n_latent = n_latent;
    w.window_size = window_size;
    w.encoder.lstm = nn::LstmCell::create(1, kHiddenUnits, rng);
    w.encoder.projection = nn::DenseLayer::create(kHiddenUnits, n_latent, nn::Activation::Tanh, rng);
    w.decoder.expansion = nn::DenseLayer::create(n_latent, kHiddenUnits, nn::Activation::Tanh, rng);
    w.decoder.lstm = nn::LstmCell::create(kHiddenUnits, kHiddenUnits, rng);
    w.decoder.readout = nn::DenseLayer::create(kHiddenUnits, 1, nn::Activation::Linear, rng);
    return w;
}

nn::VectorXd encode(const AutoencoderWeights& weights, const nn::VectorXd& window) {
    check_window(weights, window);
    const auto enc = nn::lstm_forward(weights.encoder.lstm, window_as_sequence(window));
    return nn::dense_forward(weights.encoder.projection, enc.final_hidden);
}

nn::VectorXd decode(const AutoencoderWeights& weights, const nn::VectorXd& latent) {
    if (latent.size() != weights.n_latent) {
        throw UsageError("latent length " + std::to_string(latent.size()) + " does not match N_q = " +
                         std::to_string(weights.n_latent));
    }
    const VectorXd expanded = nn::dense_forward(weights.decoder.expansion, latent);
    const std::vector<VectorXd> dec_inputs(static_cast<std::size_t>(weights.window_size), expanded);
    const auto dec = nn::lstm_forward(weights.decoder.lstm, dec_inputs);
    VectorXd reconstruction(weights.window_size);
    for (int t = 0; t < weights.window_size; ++t) {
        reconstruction(t) =
            nn::dense_forward(weights.decoder.readout, dec.hidden_states[static_cast<std::size_t>(t)])(0);
    }
    return reconstruction;
}

double reconstruction_mse(const AutoencoderWeights& weights, const data::WindowSet& windows) {
    if (windows.count() == 0) {
        throw UsageError("cannot score reconstruction on an empty window set");
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < windows.count(); ++j) {
        const VectorXd window = windows.inputs.row(j).transpose();
        const VectorXd rec = decode(weights, encode(weights, window));
        acc += (rec - window).squaredNorm() / static_cast<double>(window.size());
    }
    return acc / static_cast<double>(windows.count());
}

AeTrainResult train_autoencoder(AutoencoderWeights& weights, const data::WindowSet& windows,
                                const AeTrainConfig& config) {
    if (windows.count() == 0) {
        throw UsageError("cannot train the autoencoder on an empty window set");
    }
    if (windows.window() != weights.window_size) {
        throw UsageError("window set has w = " + std::to_string(windows.window()) +
                         ", autoencoder expects " + std::to_string(weights.window_size));
    }
    if (config.epochs < 1 || config.batch_size < 1) {
        throw ConfigError("epochs and batch size must be positive");
    }

    nn::ParameterBundle params = parameter_bundle(weights);
    nn::AdamState adam;
    adam.learning_rate = config.learning_rate;
    adam.init_for(params);

    Rng shuffle_rng(seed_mix(config.seed, 0x7ae5));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(windows.count()));
    std::iota(order.begin(), order.end(), 0);

    AeTrainResult result;
    ForwardCaches caches;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_in_place(order, shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
            params.zero_grads();
            for (std::size_t s = begin; s < end; ++s) {
                const VectorXd window = windows.inputs.row(order[s]).transpose();
                const VectorXd rec = forward_cached(weights, window, caches);
                const nn::MseResult mse = nn::mse_loss_and_grad(rec, window);
                epoch_loss += mse.loss;
                backward_cached(weights, caches, mse.grad);
            }
            // Mini-batch gradients are averaged, not summed.
            params.scale_grads(1.0 / static_cast<double>(end - begin));
            params.clip_grad_norm(config.clip_norm);
            nn::adam_update(adam, params);
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(windows.count()));
    }
    weights.training.epochs_run = config.epochs;
    weights.training.final_loss = result.loss_history.back();
    return result;
}

nn::ParameterBundle parameter_bundle(AutoencoderWeights& weights) {
    return nn::concat({
        nn::lstm_params(weights.encoder.lstm, "encoder.lstm"),
        nn::dense_params(weights.encoder.projection, "encoder.projection"),
        nn::dense_params(weights.decoder.expansion, "decoder.expansion"),
        nn::lstm_params(weights.decoder.lstm, "decoder.lstm"),
        nn::dense_params(weights.decoder.readout, "decoder.readout"),
    });
}

} // namespace qforecast::ae
