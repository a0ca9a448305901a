#include "qforecast/qsim.hpp"

#include <cmath>
#include <string>

namespace qforecast::qsim {

namespace {

// Column-major-free tiny 2x2 complex matrix: m[row][col].
using Mat2 = std::array<std::array<Complex, 2>, 2>;

Mat2 matmul(const Mat2& a, const Mat2& b) {
    Mat2 out{};
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    return out;
}

Mat2 rx_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    return {{{Complex(c, 0), Complex(0, -s)}, {Complex(0, -s), Complex(c, 0)}}};
}

Mat2 ry_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    return {{{Complex(c, 0), Complex(-s, 0)}, {Complex(s, 0), Complex(c, 0)}}};
}

Mat2 rz_matrix(double theta) {
    return {{{std::polar(1.0, -theta / 2.0), Complex(0, 0)},
             {Complex(0, 0), std::polar(1.0, theta / 2.0)}}};
}

Mat2 rot_matrix(double alpha, double beta, double gamma) {
    return matmul(rz_matrix(gamma), matmul(ry_matrix(beta), rz_matrix(alpha)));
}

void check_qubit_index(const StateVector& state, int q, const char* what) {
    if (q < 0 || q >= state.n_qubits()) {
        throw UsageError(std::string(what) + " qubit index " + std::to_string(q) +
                         " out of range for " + std::to_string(state.n_qubits()) + " qubits");
    }
}

void apply_single_qubit(StateVector& state, int target, const Mat2& u) {
    const std::size_t mask = std::size_t{1} << target;
    const std::size_t n = state.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((i & mask) == 0) {
            const Complex a = state.amp(i);
            const Complex b = state.amp(i | mask);
            state.amp(i) = u[0][0] * a + u[0][1] * b;
            state.amp(i | mask) = u[1][0] * a + u[1][1] * b;
        }
    }
}

void apply_cnot(StateVector& state, int control, int target) {
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t n = state.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((i & cmask) != 0 && (i & tmask) == 0) {
            std::swap(state.amp(i), state.amp(i | tmask));
        }
    }
}

void check_features(const ReuploadCircuitSpec& spec, std::span<const double> features) {
    if (static_cast<int>(features.size()) != spec.n_qubits) {
        throw UsageError("feature vector length " + std::to_string(features.size()) +
                         " does not match qubit count " + std::to_string(spec.n_qubits));
    }
}

// Identifies one shifted angle inside the circuit for parameter-shift
// evaluations: either entry `angle_idx` of the rotation on `qubit` in
// entangling layer `layer_index` (global, block-major), or the embedding
// rotation of `qubit` in re-upload `block_index`.
struct AngleShift {
    enum class Kind { None, Entangling, Embedding } kind = Kind::None;
    int layer_index = 0;
    int block_index = 0;
    int qubit = 0;
    int angle_idx = 0;
    double delta = 0.0;
};

ExpectationVector eval_shifted(const ReuploadCircuitSpec& spec, std::span<const double> features,
                               const AngleShift& shift) {
    StateVector state(spec.n_qubits);
    const int n = spec.n_qubits;
    for (int r = 0; r < spec.n_blocks; ++r) {
        for (int q = 0; q < n; ++q) {
            double angle = spec.angle_scale * features[q];
            if (shift.kind == AngleShift::Kind::Embedding && shift.block_index == r && shift.qubit == q) {
                angle += shift.delta;
            }
            apply_single_qubit(state, q, ry_matrix(angle));
        }
        for (int l = 0; l < spec.layers_per_block; ++l) {
            const int layer_index = r * spec.layers_per_block + l;
            const EntanglingBlockParams& params = spec.blocks[layer_index];
            for (int q = 0; q < n; ++q) {
                std::array<double, 3> a = params.angles[q];
                if (shift.kind == AngleShift::Kind::Entangling && shift.layer_index == layer_index &&
                    shift.qubit == q) {
                    a[shift.angle_idx] += shift.delta;
                }
                apply_single_qubit(state, q, rot_matrix(a[0], a[1], a[2]));
            }
            if (n > 1) {
                for (int q = 0; q < n; ++q) {
                    apply_cnot(state, q, (q + 1) % n);
                }
            }
        }
    }
    return expect_z_all(state);
}

double chain_loss_grad(std::span<const double> upstream, const ExpectationVector& plus,
                       const ExpectationVector& minus) {
    double g = 0.0;
    for (std::size_t q = 0; q < upstream.size(); ++q) {
        g += upstream[q] * (plus[q] - minus[q]) * 0.5;
    }
    return g;
}

constexpr double kHalfPi = 1.57079632679489661923132169164;

} // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("qubit count must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                          std::to_string(n_qubits));
    }
    amps_.assign(std::size_t{1} << n_qubits, Complex(0.0, 0.0));
    amps_[0] = Complex(1.0, 0.0);
}

double StateVector::norm_sq() const {
    double acc = 0.0;
    for (const Complex& a : amps_) {
        acc += std::norm(a);
    }
    return acc;
}

EntanglingBlockParams EntanglingBlockParams::zeros(int n_qubits) {
    EntanglingBlockParams p;
    p.angles.assign(static_cast<std::size_t>(n_qubits), {0.0, 0.0, 0.0});
    return p;
}

void ReuploadCircuitSpec::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("re-upload circuit qubit count must be in [1, " +
                          std::to_string(kMaxQubits) + "], got " + std::to_string(n_qubits));
    }
    if (n_blocks < 1) {
        throw ConfigError("re-upload circuit needs at least one block, got " + std::to_string(n_blocks));
    }
    if (layers_per_block < 1) {
        throw ConfigError("layers_per_block must be at least 1, got " + std::to_string(layers_per_block));
    }
    const std::size_t expected = static_cast<std::size_t>(n_blocks) * layers_per_block;
    if (blocks.size() != expected) {
        throw ConfigError("expected " + std::to_string(expected) + " entangling layers, got " +
                          std::to_string(blocks.size()));
    }
    for (const EntanglingBlockParams& block : blocks) {
        if (block.n_qubits() != n_qubits) {
            throw ConfigError("entangling layer is shaped for " + std::to_string(block.n_qubits()) +
                              " qubits, circuit has " + std::to_string(n_qubits));
        }
        for (const auto& triple : block.angles) {
            for (double a : triple) {
                if (!std::isfinite(a)) {
                    throw ConfigError("entangling angles must be finite");
                }
            }
        }
    }
}

ReuploadCircuitSpec ReuploadCircuitSpec::zeros(int n_qubits, int n_blocks, double angle_scale,
                                               int layers_per_block) {
    ReuploadCircuitSpec spec;
    spec.n_qubits = n_qubits;
    spec.n_blocks = n_blocks;
    spec.layers_per_block = layers_per_block;
    spec.angle_scale = angle_scale;
    spec.blocks.assign(static_cast<std::size_t>(n_blocks) * layers_per_block,
                       EntanglingBlockParams::zeros(n_qubits));
    spec.validate();
    return spec;
}

StateVector init_zero_state(int n_qubits) {
    return StateVector(n_qubits);
}

void apply_gate_in_place(StateVector& state, const GateOp& gate) {
    check_qubit_index(state, gate.target, "target");
    switch (gate.kind) {
    case GateKind::RX:
        apply_single_qubit(state, gate.target, rx_matrix(gate.angles[0]));
        break;
    case GateKind::RY:
        apply_single_qubit(state, gate.target, ry_matrix(gate.angles[0]));
        break;
    case GateKind::RZ:
        apply_single_qubit(state, gate.target, rz_matrix(gate.angles[0]));
        break;
    case GateKind::Rot:
        apply_single_qubit(state, gate.target, rot_matrix(gate.angles[0], gate.angles[1], gate.angles[2]));
        break;
    case GateKind::CNOT:
        check_qubit_index(state, gate.control, "control");
        if (gate.control == gate.target) {
            throw UsageError("CNOT control and target must differ");
        }
        apply_cnot(state, gate.control, gate.target);
        break;
    }
}

StateVector apply_gate(const StateVector& state, const GateOp& gate) {
    StateVector out = state;
    apply_gate_in_place(out, gate);
    return out;
}

void angle_embed_in_place(StateVector& state, std::span<const double> features, double angle_scale) {
    if (static_cast<int>(features.size()) != state.n_qubits()) {
        throw UsageError("feature vector length " + std::to_string(features.size()) +
                         " does not match qubit count " + std::to_string(state.n_qubits()));
    }
    for (int q = 0; q < state.n_qubits(); ++q) {
        apply_single_qubit(state, q, ry_matrix(angle_scale * features[q]));
    }
}

StateVector angle_embed(const StateVector& state, std::span<const double> features, double angle_scale) {
    StateVector out = state;
    angle_embed_in_place(out, features, angle_scale);
    return out;
}

void entangling_layer_in_place(StateVector& state, const EntanglingBlockParams& params) {
    const int n = state.n_qubits();
    if (params.n_qubits() != n) {
        throw UsageError("entangling layer shaped for " + std::to_string(params.n_qubits()) +
                         " qubits applied to " + std::to_string(n) + "-qubit state");
    }
    for (int q = 0; q < n; ++q) {
        const auto& a = params.angles[q];
        apply_single_qubit(state, q, rot_matrix(a[0], a[1], a[2]));
    }
    if (n > 1) {
        for (int q = 0; q < n; ++q) {
            apply_cnot(state, q, (q + 1) % n);
        }
    }
}

StateVector entangling_layer(const StateVector& state, const EntanglingBlockParams& params) {
    StateVector out = state;
    entangling_layer_in_place(out, params);
    return out;
}

ExpectationVector expect_z_all(const StateVector& state) {
    const int n = state.n_qubits();
    ExpectationVector values(static_cast<std::size_t>(n), 0.0);
    const std::size_t size = state.size();
    for (std::size_t i = 0; i < size; ++i) {
        const double p = std::norm(state.amp(i));
        if (p == 0.0) {
            continue;
        }
        for (int q = 0; q < n; ++q) {
            values[static_cast<std::size_t>(q)] += ((i >> q) & 1U) ? -p : p;
        }
    }
    return values;
}

ExpectationVector run_reupload_circuit(const ReuploadCircuitSpec& spec, std::span<const double> features) {
    spec.validate();
    check_features(spec, features);
    return eval_shifted(spec, features, AngleShift{});
}

CircuitGradient circuit_gradient(const ReuploadCircuitSpec& spec, std::span<const double> features,
                                 std::span<const double> upstream) {
    spec.validate();
    check_features(spec, features);
    if (upstream.size() != features.size()) {
        throw UsageError("upstream gradient length " + std::to_string(upstream.size()) +
                         " does not match qubit count " + std::to_string(spec.n_qubits));
    }

    CircuitGradient grad;
    grad.block_grads.assign(spec.blocks.size(), EntanglingBlockParams::zeros(spec.n_qubits));
    grad.feature_grad.assign(features.size(), 0.0);

    AngleShift shift;
    shift.kind = AngleShift::Kind::Entangling;
    const int n_layers = static_cast<int>(spec.blocks.size());
    for (int layer = 0; layer < n_layers; ++layer) {
        shift.layer_index = layer;
        for (int q = 0; q < spec.n_qubits; ++q) {
            shift.qubit = q;
            for (int j = 0; j < 3; ++j) {
                shift.angle_idx = j;
                shift.delta = kHalfPi;
                const ExpectationVector plus = eval_shifted(spec, features, shift);
                shift.delta = -kHalfPi;
                const ExpectationVector minus = eval_shifted(spec, features, shift);
                grad.n_circuit_evals += 2;
                grad.block_grads[layer].angles[q][j] = chain_loss_grad(upstream, plus, minus);
            }
        }
    }

    // Each feature appears once per re-upload; the shifts of its embedding
    // occurrences sum, and the chain rule through angle = scale * x
    // multiplies by angle_scale.
    shift = AngleShift{};
    shift.kind = AngleShift::Kind::Embedding;
    for (int r = 0; r < spec.n_blocks; ++r) {
        shift.block_index = r;
        for (int q = 0; q < spec.n_qubits; ++q) {
            shift.qubit = q;
            shift.delta = kHalfPi;
            const ExpectationVector plus = eval_shifted(spec, features, shift);
            shift.delta = -kHalfPi;
            const ExpectationVector minus = eval_shifted(spec, features, shift);
            grad.n_circuit_evals += 2;
            grad.feature_grad[q] += spec.angle_scale * chain_loss_grad(upstream, plus, minus);
        }
    }
    return grad;
}

} // namespace qforecast::qsim
