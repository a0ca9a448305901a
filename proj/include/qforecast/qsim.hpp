#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "qforecast/errors.hpp"

namespace qforecast::qsim {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 14;

// Dense statevector over 2^n basis states. Bit q of a basis index holds
// qubit q, so qubit 0 is the least significant bit. A ket written
// |q0 q1 ... q_{n-1}> therefore maps to index q0 + 2*q1 + 4*q2 + ...
class StateVector {
public:
    explicit StateVector(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t size() const { return amps_.size(); }

    std::span<const Complex> amplitudes() const { return amps_; }
    Complex& amp(std::size_t index) { return amps_[index]; }
    const Complex& amp(std::size_t index) const { return amps_[index]; }

    double norm_sq() const;

private:
    int n_qubits_;
    std::vector<Complex> amps_;
};

enum class GateKind { RX, RY, RZ, Rot, CNOT };

// One gate application. RX/RY/RZ use angles[0]; Rot uses all three as
// (alpha, beta, gamma) with Rot(a,b,g) = RZ(g) * RY(b) * RZ(a); CNOT uses
// none and reads the control index.
struct GateOp {
    GateKind kind = GateKind::RY;
    int target = 0;
    int control = -1;
    std::array<double, 3> angles{0.0, 0.0, 0.0};

    static GateOp rx(int target, double theta) { return {GateKind::RX, target, -1, {theta, 0, 0}}; }
    static GateOp ry(int target, double theta) { return {GateKind::RY, target, -1, {theta, 0, 0}}; }
    static GateOp rz(int target, double theta) { return {GateKind::RZ, target, -1, {theta, 0, 0}}; }
    static GateOp rot(int target, double alpha, double beta, double gamma) {
        return {GateKind::Rot, target, -1, {alpha, beta, gamma}};
    }
    static GateOp cnot(int control, int target) { return {GateKind::CNOT, target, control, {0, 0, 0}}; }
};

// Per-qubit (alpha, beta, gamma) rotation angles of one entangling layer.
struct EntanglingBlockParams {
    std::vector<std::array<double, 3>> angles; // one triple per qubit

    static EntanglingBlockParams zeros(int n_qubits);
    int n_qubits() const { return static_cast<int>(angles.size()); }
};

// Variational circuit executed as: for each of n_blocks re-uploads, embed
// the features (RY per qubit, angle_scale applied) and run the block's
// entangling layer(s). `blocks` is block-major: entry r*layers_per_block+l
// is layer l of re-upload r. With the default layers_per_block == 1 the
// list has exactly n_blocks entries.
struct ReuploadCircuitSpec {
    int n_qubits = 0;
    int n_blocks = 0;
    int layers_per_block = 1;
    double angle_scale = 3.14159265358979323846;
    std::vector<EntanglingBlockParams> blocks;

    void validate() const; // throws ConfigError on bad shapes

    static ReuploadCircuitSpec zeros(int n_qubits, int n_blocks, double angle_scale,
                                     int layers_per_block = 1);
};

// Pauli-Z expectation per qubit; every entry lies in [-1, 1].
using ExpectationVector = std::vector<double>;

// Gradients of a scalar loss with respect to the circuit's entangling
// angles and input features, plus the number of circuit evaluations spent
// (two per shifted parameter by the parameter-shift rule).
struct CircuitGradient {
    std::vector<EntanglingBlockParams> block_grads;
    std::vector<double> feature_grad;
    std::int64_t n_circuit_evals = 0;
};

StateVector init_zero_state(int n_qubits);

void apply_gate_in_place(StateVector& state, const GateOp& gate);
StateVector apply_gate(const StateVector& state, const GateOp& gate);

// RY(angle_scale * features[q]) on every qubit q.
void angle_embed_in_place(StateVector& state, std::span<const double> features, double angle_scale);
StateVector angle_embed(const StateVector& state, std::span<const double> features, double angle_scale);

// Rot on every qubit, then the CNOT ring q -> (q+1) mod n. The ring is
// skipped for single-qubit states.
void entangling_layer_in_place(StateVector& state, const EntanglingBlockParams& params);
StateVector entangling_layer(const StateVector& state, const EntanglingBlockParams& params);

ExpectationVector expect_z_all(const StateVector& state);

ExpectationVector run_reupload_circuit(const ReuploadCircuitSpec& spec, std::span<const double> features);

// Parameter-shift gradients. `upstream` holds dLoss/d<Z_q> for each qubit.
// The feature gradient sums the shifted embedding occurrences over all
// blocks and scales by angle_scale.
CircuitGradient circuit_gradient(const ReuploadCircuitSpec& spec, std::span<const double> features,
                                 std::span<const double> upstream);

} // namespace qforecast::qsim
