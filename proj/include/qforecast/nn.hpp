#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "qforecast/errors.hpp"
#include "qforecast/rng.hpp"

namespace qforecast::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { Linear, Tanh, Sigmoid, Relu };

VectorXd apply_activation(Activation act, const VectorXd& pre);
// Derivative expressed via pre-activation and activated output.
VectorXd activation_grad(Activation act, const VectorXd& pre, const VectorXd& out);

struct DenseLayer {
    MatrixXd weights; // out_dim x in_dim
    VectorXd biases;  // out_dim
    Activation activation = Activation::Linear;

    MatrixXd grad_weights;
    VectorXd grad_biases;

    int in_dim() const { return static_cast<int>(weights.cols()); }
    int out_dim() const { return static_cast<int>(weights.rows()); }

    static DenseLayer create(int in_dim, int out_dim, Activation act, Rng& rng);
    static DenseLayer zeros(int in_dim, int out_dim, Activation act);
};

struct DenseCache {
    VectorXd input;
    VectorXd pre;
    VectorXd output;
};

VectorXd dense_forward(const DenseLayer& layer, const VectorXd& input);
VectorXd dense_forward(const DenseLayer& layer, const VectorXd& input, DenseCache& cache);
// Accumulates parameter gradients into the layer, returns dLoss/dInput.
VectorXd dense_backward(DenseLayer& layer, const DenseCache& cache, const VectorXd& upstream);

// Standard LSTM cell:
//   i = sigmoid(W_i x + U_i h + b_i)    f = sigmoid(W_f x + U_f h + b_f)
//   g = tanh   (W_g x + U_g h + b_g)    o = sigmoid(W_o x + U_o h + b_o)
//   c' = f .* c + i .* g                h' = o .* tanh(c')
struct LstmCell {
    int input_dim = 0;
    int hidden_dim = 0;
    MatrixXd W_i, W_f, W_g, W_o; // hidden x input
    MatrixXd U_i, U_f, U_g, U_o; // hidden x hidden
    VectorXd b_i, b_f, b_g, b_o;

    MatrixXd gW_i, gW_f, gW_g, gW_o;
    MatrixXd gU_i, gU_f, gU_g, gU_o;
    VectorXd gb_i, gb_f, gb_g, gb_o;

    // Glorot-uniform weights, zero biases except forget-gate bias at 1.
    static LstmCell create(int input_dim, int hidden_dim, Rng& rng);
    static LstmCell zeros(int input_dim, int hidden_dim);
};

struct LstmStepCache {
    VectorXd x, h_prev, c_prev;
    VectorXd i, f, g, o;
    VectorXd c, h, tanh_c;
};

void lstm_step(const LstmCell& cell, const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
               VectorXd& h_out, VectorXd& c_out);
void lstm_step(const LstmCell& cell, const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
               LstmStepCache& cache);

struct LstmSequenceCache {
    std::vector<LstmStepCache> steps;
};

struct LstmForwardResult {
    std::vector<VectorXd> hidden_states;
    VectorXd final_hidden;
    VectorXd final_cell;
};

// Runs the cell over a sequence starting from zero states.
LstmForwardResult lstm_forward(const LstmCell& cell, const std::vector<VectorXd>& sequence,
                               LstmSequenceCache* cache = nullptr);

// Backpropagation through time. `upstream_h[t]` is dLoss/dh_t (zero vectors
// allowed); accumulates parameter gradients, returns dLoss/dx_t per step.
std::vector<VectorXd> lstm_backward_through_time(LstmCell& cell, const LstmSequenceCache& cache,
                                                 const std::vector<VectorXd>& upstream_h);

struct MseResult {
    double loss = 0.0;
    VectorXd grad; // dLoss/dPred
};

MseResult mse_loss_and_grad(const VectorXd& pred, const VectorXd& target);

// Flattened named views over a model's parameters and gradient slots.
struct ParamBlock {
    std::string name;
    Eigen::Map<VectorXd> value;
    Eigen::Map<VectorXd> grad;
    int rows = 0;
    int cols = 0;

    ParamBlock(std::string name_, double* value_data, double* grad_data, int rows_, int cols_)
        : name(std::move(name_)),
          value(value_data, static_cast<Eigen::Index>(rows_) * cols_),
          grad(grad_data, static_cast<Eigen::Index>(rows_) * cols_),
          rows(rows_),
          cols(cols_) {}

    static ParamBlock of(std::string name, MatrixXd& value, MatrixXd& grad);
    static ParamBlock of(std::string name, VectorXd& value, VectorXd& grad);
};

struct ParameterBundle {
    std::vector<ParamBlock> blocks;

    std::size_t total_size() const;
    void zero_grads();
    double grad_norm() const;
    // Global-norm clipping; no-op when the norm is under max_norm.
    void clip_grad_norm(double max_norm);
    void scale_grads(double factor);
};

ParameterBundle dense_params(DenseLayer& layer, const std::string& prefix);
ParameterBundle lstm_params(LstmCell& cell, const std::string& prefix);
ParameterBundle concat(std::vector<ParameterBundle> bundles);

struct AdamState {
    double learning_rate = 0.0005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t t = 0;
    std::vector<VectorXd> m;
    std::vector<VectorXd> v;

    void init_for(const ParameterBundle& params);
};

// One bias-corrected Adam step over every block; increments t once.
void adam_update(AdamState& state, ParameterBundle& params);

double glorot_bound(int fan_in, int fan_out);
MatrixXd glorot_uniform(int rows, int cols, Rng& rng);

} // namespace qforecast::nn
