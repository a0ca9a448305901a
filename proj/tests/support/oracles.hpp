#pragma once

// Test-only oracles, kept independent of the implementation paths they
// check: the circuit oracle builds explicit 2^n x 2^n unitaries and
// multiplies them onto the state, instead of the simulator's bit-mask
// kernels; gradients are checked against central finite differences of the
// public forward functions.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qforecast/qsim.hpp"
#include "qforecast/rng.hpp"

namespace oracles {

using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using qforecast::qsim::ReuploadCircuitSpec;

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Matrix2cd rx_mat(double theta) {
    Matrix2cd m;
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    m << std::complex<double>(c, 0), std::complex<double>(0, -s), std::complex<double>(0, -s),
        std::complex<double>(c, 0);
    return m;
}

inline Matrix2cd ry_mat(double theta) {
    Matrix2cd m;
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    m << c, -s, s, c;
    return m;
}

inline Matrix2cd rz_mat(double theta) {
    Matrix2cd m;
    m << std::polar(1.0, -theta / 2), 0, 0, std::polar(1.0, theta / 2);
    return m;
}

inline Matrix2cd rot_mat(double alpha, double beta, double gamma) {
    return rz_mat(gamma) * ry_mat(beta) * rz_mat(alpha);
}

// Basis index bit q holds qubit q, so a gate on qubit q sits in the middle
// of kron(I_high, U, I_low) with 2^q low bits.
inline MatrixXcd embed_single(int n_qubits, int target, const Matrix2cd& u) {
    const auto dim = [](int bits) { return Eigen::Index{1} << bits; };
    MatrixXcd out = MatrixXcd::Identity(dim(n_qubits - 1 - target), dim(n_qubits - 1 - target));
    out = kron(out, u);
    return kron(out, MatrixXcd::Identity(dim(target), dim(target)));
}

inline MatrixXcd cnot_matrix(int n_qubits, int control, int target) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    MatrixXcd out = MatrixXcd::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const bool control_set = (j >> control) & 1;
        const Eigen::Index i = control_set ? (j ^ (Eigen::Index{1} << target)) : j;
        out(i, j) = 1.0;
    }
    return out;
}

inline MatrixXcd z_matrix(int n_qubits, int qubit) {
    Matrix2cd z;
    z << 1, 0, 0, -1;
    return embed_single(n_qubits, qubit, z);
}

// Full-matrix evaluation of the re-uploading circuit.
inline std::vector<double> run_circuit_dense(const ReuploadCircuitSpec& spec,
                                             const std::vector<double>& features) {
    const Eigen::Index dim = Eigen::Index{1} << spec.n_qubits;
    VectorXcd psi = VectorXcd::Zero(dim);
    psi(0) = 1.0;
    for (int r = 0; r < spec.n_blocks; ++r) {
        for (int q = 0; q < spec.n_qubits; ++q) {
            psi = embed_single(spec.n_qubits, q,
                               ry_mat(spec.angle_scale * features[static_cast<std::size_t>(q)])) *
                  psi;
        }
        for (int l = 0; l < spec.layers_per_block; ++l) {
            const auto& block = spec.blocks[static_cast<std::size_t>(r * spec.layers_per_block + l)];
            for (int q = 0; q < spec.n_qubits; ++q) {
                const auto& a = block.angles[static_cast<std::size_t>(q)];
                psi = embed_single(spec.n_qubits, q, rot_mat(a[0], a[1], a[2])) * psi;
            }
            if (spec.n_qubits > 1) {
                for (int q = 0; q < spec.n_qubits; ++q) {
                    psi = cnot_matrix(spec.n_qubits, q, (q + 1) % spec.n_qubits) * psi;
                }
            }
        }
    }
    std::vector<double> expectations;
    for (int q = 0; q < spec.n_qubits; ++q) {
        expectations.push_back((psi.adjoint() * z_matrix(spec.n_qubits, q) * psi)(0).real());
    }
    return expectations;
}

inline ReuploadCircuitSpec random_spec(int n_qubits, int n_blocks, qforecast::Rng& rng,
                                       double angle_scale = 1.0) {
    ReuploadCircuitSpec spec = ReuploadCircuitSpec::zeros(n_qubits, n_blocks, angle_scale);
    for (auto& block : spec.blocks) {
        for (auto& triple : block.angles) {
            for (double& a : triple) {
                a = qforecast::uniform(rng, -3.141592653589793, 3.141592653589793);
            }
        }
    }
    return spec;
}

inline std::vector<double> random_features(int n, qforecast::Rng& rng) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (double& x : out) {
        x = qforecast::uniform(rng, -1.0, 1.0);
    }
    return out;
}

// Robust relative error: exact relative error for healthy magnitudes, a
// tight absolute bound when both values are tiny.
inline double rel_err(double a, double b, double floor = 1e-3) {
    return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

} // namespace oracles
