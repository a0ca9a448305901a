#include <doctest.h>

#include <cmath>

#include "qforecast/autoencoder.hpp"
#include "support/gradcheck.hpp"

using namespace qforecast;
using nn::VectorXd;

namespace {

// Small sine-plus-trend windows in [0, 1], enough signal to learn from.
data::WindowSet toy_windows(int count, int w, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> series;
    const int length = count + w;
    for (int i = 0; i < length; ++i) {
        series.push_back(0.5 + 0.35 * std::sin(0.3 * i) + 0.05 * uniform01(rng));
    }
    return data::make_windows(series, w);
}

} // namespace

TEST_SUITE("autoencoder") {

TEST_CASE("zeroed projection yields a zero latent for any window") {
    ae::AutoencoderWeights weights = ae::make_autoencoder(4, 20, 1);
    weights.encoder.projection.weights.setZero();
    weights.encoder.projection.biases.setZero();
    Rng rng(2);
    VectorXd window(20);
    for (int i = 0; i < 20; ++i) {
        window(i) = uniform01(rng);
    }
    CHECK(ae::encode(weights, window).norm() == doctest::Approx(0.0));
}

TEST_CASE("latent length tracks N_q and stays strictly inside (-1, 1)") {
    Rng rng(3);
    VectorXd window(20);
    for (int i = 0; i < 20; ++i) {
        window(i) = uniform01(rng);
    }
    for (int n_q = 2; n_q <= 14; n_q += 2) {
        const ae::AutoencoderWeights weights = ae::make_autoencoder(n_q, 20, 7);
        const VectorXd latent = ae::encode(weights, window);
        CHECK(latent.size() == n_q);
        for (int i = 0; i < latent.size(); ++i) {
            CHECK(std::abs(latent(i)) < 1.0);
        }
    }
}

TEST_CASE("encoding is pure: identical windows give identical latents") {
    const ae::AutoencoderWeights weights = ae::make_autoencoder(3, 20, 11);
    Rng rng(5);
    VectorXd window(20);
    for (int i = 0; i < 20; ++i) {
        window(i) = uniform01(rng);
    }
    const VectorXd a = ae::encode(weights, window);
    const VectorXd b = ae::encode(weights, window);
    CHECK((a.array() == b.array()).all());
}

TEST_CASE("encode rejects the wrong window length") {
    const ae::AutoencoderWeights weights = ae::make_autoencoder(3, 20, 1);
    CHECK_THROWS_AS(ae::encode(weights, VectorXd::Zero(19)), UsageError);
    CHECK_THROWS_AS(ae::decode(weights, VectorXd::Zero(4)), UsageError);
}

TEST_CASE("decode with zero weights reconstructs the zero vector") {
    ae::AutoencoderWeights weights = ae::make_autoencoder(3, 20, 1);
    weights.decoder.expansion = nn::DenseLayer::zeros(3, ae::kHiddenUnits, nn::Activation::Tanh);
    weights.decoder.lstm = nn::LstmCell::zeros(ae::kHiddenUnits, ae::kHiddenUnits);
    weights.decoder.readout = nn::DenseLayer::zeros(ae::kHiddenUnits, 1, nn::Activation::Linear);
    const VectorXd rec = ae::decode(weights, VectorXd::Constant(3, 0.4));
    CHECK(rec.size() == 20);
    CHECK(rec.norm() == doctest::Approx(0.0));
}

TEST_CASE("reconstruction has the window length") {
    const ae::AutoencoderWeights weights = ae::make_autoencoder(4, 20, 13);
    const VectorXd rec = ae::decode(weights, VectorXd::Constant(4, 0.1));
    CHECK(rec.size() == 20);
}

TEST_CASE("training reduces the reconstruction loss and is deterministic") {
    const data::WindowSet windows = toy_windows(48, 12, 17);
    ae::AutoencoderWeights weights = ae::make_autoencoder(3, 12, 19);
    ae::AeTrainConfig config;
    config.epochs = 8;
    config.batch_size = 16;
    config.learning_rate = 0.01;
    config.seed = 23;
    const ae::AeTrainResult result = ae::train_autoencoder(weights, windows, config);
    REQUIRE(result.loss_history.size() == 8);
    CHECK(result.loss_history.back() < result.loss_history.front());
    CHECK(weights.training.epochs_run == 8);
    CHECK(weights.training.final_loss == doctest::Approx(result.loss_history.back()));

    ae::AutoencoderWeights weights2 = ae::make_autoencoder(3, 12, 19);
    const ae::AeTrainResult result2 = ae::train_autoencoder(weights2, windows, config);
    CHECK(result.loss_history == result2.loss_history);
    CHECK((weights.encoder.projection.weights.array() ==
           weights2.encoder.projection.weights.array())
              .all());
}

TEST_CASE("training rejects empty window sets") {
    ae::AutoencoderWeights weights = ae::make_autoencoder(3, 12, 19);
    data::WindowSet empty;
    CHECK_THROWS_AS(ae::train_autoencoder(weights, empty, {}), UsageError);
}

TEST_CASE("autoencoder gradients match finite differences") {
    const data::WindowSet windows = toy_windows(3, 6, 29);
    ae::AutoencoderWeights weights = ae::make_autoencoder(2, 6, 31);
    nn::ParameterBundle params = ae::parameter_bundle(weights);

    const VectorXd window = windows.inputs.row(0).transpose();
    const auto loss = [&] {
        const VectorXd rec = ae::decode(weights, ae::encode(weights, window));
        return nn::mse_loss_and_grad(rec, window).loss;
    };
    // One manual forward/backward through the training path.
    const auto backprop = [&] {
        params.zero_grads();
        ae::AeTrainConfig config;
        config.epochs = 1;
        config.batch_size = 1;
        config.learning_rate = 0.0; // keep parameters fixed; we only want the gradients
        config.clip_norm = 1e18;    // no clipping during the check
        ae::AutoencoderWeights probe = weights;
        data::WindowSet one;
        one.inputs = window.transpose();
        one.targets = VectorXd::Constant(1, 0.0);
        one.source_start = {0};
        ae::train_autoencoder(probe, one, config);
        // copy the gradients accumulated inside the probe
        nn::ParameterBundle probe_params = ae::parameter_bundle(probe);
        for (std::size_t b = 0; b < params.blocks.size(); ++b) {
            params.blocks[b].grad = probe_params.blocks[b].grad;
        }
    };
    const auto report = gradcheck::check(params, loss, backprop, 1e-6, /*stride=*/37);
    CHECK(report.checked > 100);
    CHECK(report.max_rel_err < 1e-4);
}

} // TEST_SUITE
