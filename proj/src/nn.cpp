#include "qforecast/nn.hpp"

#include <cmath>

namespace qforecast::nn {

namespace {

void check_dims(const char* what, Eigen::Index got, Eigen::Index want) {
    if (got != want) {
        throw UsageError(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                         std::to_string(got));
    }
}

VectorXd sigmoid(const VectorXd& x) {
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

} // namespace

VectorXd apply_activation(Activation act, const VectorXd& pre) {
    switch (act) {
    case Activation::Linear:
        return pre;
    case Activation::Tanh:
        return pre.array().tanh();
    case Activation::Sigmoid:
        return sigmoid(pre);
    case Activation::Relu:
        return pre.cwiseMax(0.0);
    }
    throw InternalError("unknown activation");
}

VectorXd activation_grad(Activation act, const VectorXd& pre, const VectorXd& out) {
    switch (act) {
    case Activation::Linear:
        return VectorXd::Ones(pre.size());
    case Activation::Tanh:
        return 1.0 - out.array().square();
    case Activation::Sigmoid:
        return out.array() * (1.0 - out.array());
    case Activation::Relu:
        return (pre.array() > 0.0).cast<double>();
    }
    throw InternalError("unknown activation");
}

DenseLayer DenseLayer::create(int in_dim, int out_dim, Activation act, Rng& rng) {
    DenseLayer layer;
    layer.weights = glorot_uniform(out_dim, in_dim, rng);
    layer.biases = VectorXd::Zero(out_dim);
    layer.activation = act;
    layer.grad_weights = MatrixXd::Zero(out_dim, in_dim);
    layer.grad_biases = VectorXd::Zero(out_dim);
    return layer;
}

DenseLayer DenseLayer::zeros(int in_dim, int out_dim, Activation act) {
    DenseLayer layer;
    layer.weights = MatrixXd::Zero(out_dim, in_dim);
    layer.biases = VectorXd::Zero(out_dim);
    layer.activation = act;
    layer.grad_weights = MatrixXd::Zero(out_dim, in_dim);
    layer.grad_biases = VectorXd::Zero(out_dim);
    return layer;
}

VectorXd dense_forward(const DenseLayer& layer, const VectorXd& input) {
    check_dims("dense input", input.size(), layer.weights.cols());
    return apply_activation(layer.activation, layer.weights * input + layer.biases);
}

VectorXd dense_forward(const DenseLayer& layer, const VectorXd& input, DenseCache& cache) {
    check_dims("dense input", input.size(), layer.weights.cols());
    cache.input = input;
    cache.pre = layer.weights * input + layer.biases;
    cache.output = apply_activation(layer.activation, cache.pre);
    return cache.output;
}

VectorXd dense_backward(DenseLayer& layer, const DenseCache& cache, const VectorXd& upstream) {
    if (cache.input.size() == 0) {
        throw InternalError("dense_backward called without a forward cache");
    }
    check_dims("dense upstream", upstream.size(), layer.weights.rows());
    const VectorXd dpre =
        upstream.array() * activation_grad(layer.activation, cache.pre, cache.output).array();
    layer.grad_weights.noalias() += dpre * cache.input.transpose();
    layer.grad_biases += dpre;
    return layer.weights.transpose() * dpre;
}

LstmCell LstmCell::create(int input_dim, int hidden_dim, Rng& rng) {
    LstmCell cell = LstmCell::zeros(input_dim, hidden_dim);
    cell.W_i = glorot_uniform(hidden_dim, input_dim, rng);
    cell.W_f = glorot_uniform(hidden_dim, input_dim, rng);
    cell.W_g = glorot_uniform(hidden_dim, input_dim, rng);
    cell.W_o = glorot_uniform(hidden_dim, input_dim, rng);
    cell.U_i = glorot_uniform(hidden_dim, hidden_dim, rng);
    cell.U_f = glorot_uniform(hidden_dim, hidden_dim, rng);
    cell.U_g = glorot_uniform(hidden_dim, hidden_dim, rng);
    cell.U_o = glorot_uniform(hidden_dim, hidden_dim, rng);
    cell.b_f.setOnes();
    return cell;
}

LstmCell LstmCell::zeros(int input_dim, int hidden_dim) {
    LstmCell cell;
    cell.input_dim = input_dim;
    cell.hidden_dim = hidden_dim;
    auto zero_w = [&] { return MatrixXd::Zero(hidden_dim, input_dim); };
    auto zero_u = [&] { return MatrixXd::Zero(hidden_dim, hidden_dim); };
    auto zero_b = [&] { return VectorXd::Zero(hidden_dim); };
    cell.W_i = zero_w(); cell.W_f = zero_w(); cell.W_g = zero_w(); cell.W_o = zero_w();
    cell.U_i = zero_u(); cell.U_f = zero_u(); cell.U_g = zero_u(); cell.U_o = zero_u();
    cell.b_i = zero_b(); cell.b_f = zero_b(); cell.b_g = zero_b(); cell.b_o = zero_b();
    cell.gW_i = zero_w(); cell.gW_f = zero_w(); cell.gW_g = zero_w(); cell.gW_o = zero_w();
    cell.gU_i = zero_u(); cell.gU_f = zero_u(); cell.gU_g = zero_u(); cell.gU_o = zero_u();
    cell.gb_i = zero_b(); cell.gb_f = zero_b(); cell.gb_g = zero_b(); cell.gb_o = zero_b();
    return cell;
}

void lstm_step(const LstmCell& cell, const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
               LstmStepCache& cache) {
    check_dims("lstm input", x.size(), cell.input_dim);
    check_dims("lstm hidden state", h_prev.size(), cell.hidden_dim);
    check_dims("lstm cell state", c_prev.size(), cell.hidden_dim);
    cache.x = x;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;
    cache.i = sigmoid(cell.W_i * x + cell.U_i * h_prev + cell.b_i);
    cache.f = sigmoid(cell.W_f * x + cell.U_f * h_prev + cell.b_f);
    cache.g = (cell.W_g * x + cell.U_g * h_prev + cell.b_g).array().tanh();
    cache.o = sigmoid(cell.W_o * x + cell.U_o * h_prev + cell.b_o);
    cache.c = cache.f.array() * c_prev.array() + cache.i.array() * cache.g.array();
    cache.tanh_c = cache.c.array().tanh();
    cache.h = cache.o.array() * cache.tanh_c.array();
}

void lstm_step(const LstmCell& cell, const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
               VectorXd& h_out, VectorXd& c_out) {
    LstmStepCache cache;
    lstm_step(cell, x, h_prev, c_prev, cache);
    h_out = cache.h;
    c_out = cache.c;
}

LstmForwardResult lstm_forward(const LstmCell& cell, const std::vector<VectorXd>& sequence,
                               LstmSequenceCache* cache) {
    if (sequence.empty()) {
        throw UsageError("lstm_forward requires a non-empty sequence");
    }
    LstmForwardResult result;
    result.hidden_states.reserve(sequence.size());
    if (cache != nullptr) {
        cache->steps.clear();
        cache->steps.reserve(sequence.size());
    }
    VectorXd h = VectorXd::Zero(cell.hidden_dim);
    VectorXd c = VectorXd::Zero(cell.hidden_dim);
    for (const VectorXd& x : sequence) {
        LstmStepCache step;
        lstm_step(cell, x, h, c, step);
        h = step.h;
        c = step.c;
        result.hidden_states.push_back(h);
        if (cache != nullptr) {
            cache->steps.push_back(std::move(step));
        }
    }
    result.final_hidden = h;
    result.final_cell = c;
    return result;
}

std::vector<VectorXd> lstm_backward_through_time(LstmCell& cell, const LstmSequenceCache& cache,
                                                 const std::vector<VectorXd>& upstream_h) {
    const std::size_t T = cache.steps.size();
    if (T == 0) {
        throw InternalError("lstm_backward_through_time called without a forward cache");
    }
    if (upstream_h.size() != T) {
        throw UsageError("one upstream hidden gradient required per timestep");
    }
    std::vector<VectorXd> dx(T);
    VectorXd dh_next = VectorXd::Zero(cell.hidden_dim);
    VectorXd dc_next = VectorXd::Zero(cell.hidden_dim);
    for (std::size_t t = T; t-- > 0;) {
        const LstmStepCache& s = cache.steps[t];
        const VectorXd dh = upstream_h[t] + dh_next;
        const VectorXd do_ = dh.array() * s.tanh_c.array();
        const VectorXd dc =
            (dh.array() * s.o.array() * (1.0 - s.tanh_c.array().square())).matrix() + dc_next;
        const VectorXd di = dc.array() * s.g.array();
        const VectorXd dg = dc.array() * s.i.array();
        const VectorXd df = dc.array() * s.c_prev.array();

        const VectorXd di_pre = di.array() * s.i.array() * (1.0 - s.i.array());
        const VectorXd df_pre = df.array() * s.f.array() * (1.0 - s.f.array());
        const VectorXd dg_pre = dg.array() * (1.0 - s.g.array().square());
        const VectorXd do_pre = do_.array() * s.o.array() * (1.0 - s.o.array());

        cell.gW_i.noalias() += di_pre * s.x.transpose();
        cell.gW_f.noalias() += df_pre * s.x.transpose();
        cell.gW_g.noalias() += dg_pre * s.x.transpose();
        cell.gW_o.noalias() += do_pre * s.x.transpose();
        cell.gU_i.noalias() += di_pre * s.h_prev.transpose();
        cell.gU_f.noalias() += df_pre * s.h_prev.transpose();
        cell.gU_g.noalias() += dg_pre * s.h_prev.transpose();
        cell.gU_o.noalias() += do_pre * s.h_prev.transpose();
        cell.gb_i += di_pre;
        cell.gb_f += df_pre;
        cell.gb_g += dg_pre;
        cell.gb_o += do_pre;

        dx[t] = cell.W_i.transpose() * di_pre + cell.W_f.transpose() * df_pre +
                cell.W_g.transpose() * dg_pre + cell.W_o.transpose() * do_pre;
        dh_next = cell.U_i.transpose() * di_pre + cell.U_f.transpose() * df_pre +
                  cell.U_g.transpose() * dg_pre + cell.U_o.transpose() * do_pre;
        dc_next = dc.array() * s.f.array();
    }
    return dx;
}

MseResult mse_loss_and_grad(const VectorXd& pred, const VectorXd& target) {
    if (pred.size() == 0 || pred.size() != target.size()) {
        throw UsageError("mse requires equal, nonzero prediction/target lengths");
    }
    const double n = static_cast<double>(pred.size());
    const VectorXd residual = pred - target;
    MseResult result;
    result.loss = residual.squaredNorm() / n;
    result.grad = (2.0 / n) * residual;
    return result;
}

ParamBlock ParamBlock::of(std::string name, MatrixXd& value, MatrixXd& grad) {
    return ParamBlock(std::move(name), value.data(), grad.data(), static_cast<int>(value.rows()),
                      static_cast<int>(value.cols()));
}

ParamBlock ParamBlock::of(std::string name, VectorXd& value, VectorXd& grad) {
    return ParamBlock(std::move(name), value.data(), grad.data(), static_cast<int>(value.size()), 1);
}

std::size_t ParameterBundle::total_size() const {
    std::size_t total = 0;
    for (const ParamBlock& block : blocks) {
        total += static_cast<std::size_t>(block.value.size());
    }
    return total;
}

void ParameterBundle::zero_grads() {
    for (ParamBlock& block : blocks) {
        block.grad.setZero();
    }
}

double ParameterBundle::grad_norm() const {
    double acc = 0.0;
    for (const ParamBlock& block : blocks) {
        acc += block.grad.squaredNorm();
    }
    return std::sqrt(acc);
}

void ParameterBundle::clip_grad_norm(double max_norm) {
    const double norm = grad_norm();
    if (norm > max_norm && norm > 0.0) {
        scale_grads(max_norm / norm);
    }
}

void ParameterBundle::scale_grads(double factor) {
    for (ParamBlock& block : blocks) {
        block.grad *= factor;
    }
}

ParameterBundle dense_params(DenseLayer& layer, const std::string& prefix) {
    ParameterBundle bundle;
    bundle.blocks.push_back(ParamBlock::of(prefix + ".weights", layer.weights, layer.grad_weights));
    bundle.blocks.push_back(ParamBlock::of(prefix + ".biases", layer.biases, layer.grad_biases));
    return bundle;
}

ParameterBundle lstm_params(LstmCell& cell, const std::string& prefix) {
    ParameterBundle bundle;
    auto add_m = [&](const char* name, MatrixXd& v, MatrixXd& g) {
        bundle.blocks.push_back(ParamBlock::of(prefix + "." + name, v, g));
    };
    auto add_v = [&](const char* name, VectorXd& v, VectorXd& g) {
        bundle.blocks.push_back(ParamBlock::of(prefix + "." + name, v, g));
    };
    add_m("W_i", cell.W_i, cell.gW_i);
    add_m("W_f", cell.W_f, cell.gW_f);
    add_m("W_g", cell.W_g, cell.gW_g);
    add_m("W_o", cell.W_o, cell.gW_o);
    add_m("U_i", cell.U_i, cell.gU_i);
    add_m("U_f", cell.U_f, cell.gU_f);
    add_m("U_g", cell.U_g, cell.gU_g);
    add_m("U_o", cell.U_o, cell.gU_o);
    add_v("b_i", cell.b_i, cell.gb_i);
    add_v("b_f", cell.b_f, cell.gb_f);
    add_v("b_g", cell.b_g, cell.gb_g);
    add_v("b_o", cell.b_o, cell.gb_o);
    return bundle;
}

ParameterBundle concat(std::vector<ParameterBundle> bundles) {
    ParameterBundle out;
    for (ParameterBundle& bundle : bundles) {
        for (ParamBlock& block : bundle.blocks) {
            out.blocks.push_back(std::move(block));
        }
    }
    return out;
}

void AdamState::init_for(const ParameterBundle& params) {
    t = 0;
    m.clear();
    v.clear();
    for (const ParamBlock& block : params.blocks) {
        m.push_back(VectorXd::Zero(block.value.size()));
        v.push_back(VectorXd::Zero(block.value.size()));
    }
}

void adam_update(AdamState& state, ParameterBundle& params) {
    if (state.m.size() != params.blocks.size()) {
        throw InternalError("adam state not initialized for this parameter bundle");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        ParamBlock& block = params.blocks[b];
        VectorXd& mb = state.m[b];
        VectorXd& vb = state.v[b];
        mb = state.beta1 * mb + (1.0 - state.beta1) * block.grad;
        vb = state.beta2 * vb.array() + (1.0 - state.beta2) * block.grad.array().square();
        const auto m_hat = mb.array() / bc1;
        const auto v_hat = vb.array() / bc2;
        block.value.array() -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
}

double glorot_bound(int fan_in, int fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

MatrixXd glorot_uniform(int rows, int cols, Rng& rng) {
    // rows = fan_out, cols = fan_in for a (out x in) weight matrix.
    const double a = glorot_bound(cols, rows);
    MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = uniform(rng, -a, a);
        }
    }
    return m;
}

} // namespace qforecast::nn
