#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>
#include <pybind11/eigen.h>

#include <sstream>

#include "qforecast/autoencoder.hpp"
#include "qforecast/cli.hpp"
#include "qforecast/data.hpp"
#include "qforecast/eval.hpp"
#include "qforecast/models.hpp"
#include "qforecast/qsim.hpp"

namespace py = pybind11;
using namespace qforecast;

namespace {

std::vector<std::complex<double>> amplitudes_of(const qsim::StateVector& state) {
    return {state.amplitudes().begin(), state.amplitudes().end()};
}

qsim::ReuploadCircuitSpec make_spec(int n_qubits, int n_blocks, double angle_scale,
                                    const std::vector<std::vector<std::vector<double>>>& blocks) {
    qsim::ReuploadCircuitSpec spec = qsim::ReuploadCircuitSpec::zeros(n_qubits, n_blocks, angle_scale);
    if (!blocks.empty()) {
        if (blocks.size() != spec.blocks.size()) {
            throw UsageError("expected " + std::to_string(spec.blocks.size()) + " blocks");
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (blocks[b].size() != static_cast<std::size_t>(n_qubits)) {
                throw UsageError("each block needs one angle triple per qubit");
            }
            for (std::size_t q = 0; q < blocks[b].size(); ++q) {
                if (blocks[b][q].size() != 3) {
                    throw UsageError("each qubit takes exactly 3 angles");
                }
                for (int j = 0; j < 3; ++j) {
                    spec.blocks[b].angles[q][static_cast<std::size_t>(j)] = blocks[b][q][static_cast<std::size_t>(j)];
                }
            }
        }
    }
    spec.validate();
    return spec;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "statevector simulation, gap cross-validation, and the hybrid "
              "quantum-classical forecasting pipeline";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IngestError>(m, "IngestError", PyExc_IOError);

    // qsim
    m.def("run_reupload_circuit",
          [](int n_qubits, int n_blocks, double angle_scale,
             const std::vector<std::vector<std::vector<double>>>& blocks,
             const std::vector<double>& features) {
              return qsim::run_reupload_circuit(make_spec(n_qubits, n_blocks, angle_scale, blocks),
                                                features);
          },
          py::arg("n_qubits"), py::arg("n_blocks"), py::arg("angle_scale"), py::arg("blocks"),
          py::arg("features"),
          "Pauli-Z expectations of the data re-uploading circuit; pass blocks=[] for all-zero "
          "entangling angles.");

    m.def("circuit_gradient",
          [](int n_qubits, int n_blocks, double angle_scale,
             const std::vector<std::vector<std::vector<double>>>& blocks,
             const std::vector<double>& features, const std::vector<double>& upstream) {
              const auto grad = qsim::circuit_gradient(
                  make_spec(n_qubits, n_blocks, angle_scale, blocks), features, upstream);
              std::vector<std::vector<std::vector<double>>> block_grads;
              for (const auto& bg : grad.block_grads) {
                  std::vector<std::vector<double>> rows;
                  for (const auto& t : bg.angles) {
                      rows.push_back({t[0], t[1], t[2]});
                  }
                  block_grads.push_back(std::move(rows));
              }
              return py::make_tuple(block_grads, grad.feature_grad, grad.n_circuit_evals);
          },
          py::arg("n_qubits"), py::arg("n_blocks"), py::arg("angle_scale"), py::arg("blocks"),
          py::arg("features"), py::arg("upstream"),
          "Parameter-shift gradients: (block_grads, feature_grad, n_circuit_evals).");

    py::class_<qsim::StateVector>(m, "StateVector")
        .def(py::init<int>(), py::arg("n_qubits"))
        .def_property_readonly("n_qubits", &qsim::StateVector::n_qubits)
        .def_property_readonly("amplitudes", &amplitudes_of)
        .def("norm_sq", &qsim::StateVector::norm_sq)
        .def("rx", [](qsim::StateVector& s, int t, double a) { qsim::apply_gate_in_place(s, qsim::GateOp::rx(t, a)); })
        .def("ry", [](qsim::StateVector& s, int t, double a) { qsim::apply_gate_in_place(s, qsim::GateOp::ry(t, a)); })
        .def("rz", [](qsim::StateVector& s, int t, double a) { qsim::apply_gate_in_place(s, qsim::GateOp::rz(t, a)); })
        .def("rot", [](qsim::StateVector& s, int t, double a, double b, double g) {
            qsim::apply_gate_in_place(s, qsim::GateOp::rot(t, a, b, g));
        })
        .def("cnot", [](qsim::StateVector& s, int c, int t) { qsim::apply_gate_in_place(s, qsim::GateOp::cnot(c, t)); })
        .def("expect_z", [](const qsim::StateVector& s) { return qsim::expect_z_all(s); });

    // data
    py::class_<data::TimeSeries>(m, "TimeSeries")
        .def_readonly("values", &data::TimeSeries::values)
        .def_readonly("origin_epoch_s", &data::TimeSeries::origin_epoch_s)
        .def("__len__", [](const data::TimeSeries& s) { return s.size(); });

    m.def("generate_synthetic",
          [](int n_days, double base_flow, double peak_flow, double noise_std, double weekend_factor,
             std::uint64_t seed) {
              data::SyntheticConfig config;
              config.n_days = n_days;
              config.base_flow = base_flow;
              config.peak_flow = peak_flow;
              config.noise_std = noise_std;
              config.weekend_factor = weekend_factor;
              config.seed = seed;
              return data::generate_synthetic(config);
          },
          py::arg("n_days"), py::arg("base_flow") = 250.0, py::arg("peak_flow") = 2000.0,
          py::arg("noise_std") = 60.0, py::arg("weekend_factor") = 0.7, py::arg("seed") = 1);

    m.def("load_csv",
          [](const std::filesystem::path& path, bool sort, bool fill_gaps) {
              return data::load_csv(path, {sort, fill_gaps});
          },
          py::arg("path"), py::arg("sort") = false, py::arg("fill_gaps") = false);
    m.def("save_csv", &data::save_csv, py::arg("series"), py::arg("path"));

    m.def("make_windows",
          [](const std::vector<double>& segment, int w) {
              const data::WindowSet set = data::make_windows(segment, w);
              return py::make_tuple(set.inputs, set.targets);
          },
          py::arg("segment"), py::arg("w") = 20, "Returns (inputs, targets).");

    // eval
    py::class_<eval::IndexRange>(m, "IndexRange")
        .def_readonly("begin", &eval::IndexRange::begin)
        .def_readonly("end", &eval::IndexRange::end)
        .def("__repr__", [](const eval::IndexRange& r) {
            std::ostringstream out;
            out << "IndexRange(" << r.begin << ", " << r.end << ")";
            return out.str();
        });
    py::class_<eval::Fold>(m, "Fold")
        .def_readonly("test", &eval::Fold::test)
        .def_readonly("gap_before", &eval::Fold::gap_before)
        .def_readonly("gap_after", &eval::Fold::gap_after)
        .def_readonly("validation", &eval::Fold::validation)
        .def_readonly("train", &eval::Fold::train);
    py::class_<eval::FoldPlan>(m, "FoldPlan")
        .def_readonly("n", &eval::FoldPlan::n)
        .def_readonly("k", &eval::FoldPlan::k)
        .def_readonly("gap_size", &eval::FoldPlan::gap_size)
        .def_readonly("folds", &eval::FoldPlan::folds);

    m.def("gap_kfold_split", &eval::gap_kfold_split, py::arg("n"), py::arg("k") = 5,
          py::arg("gap_size") = 0, py::arg("val_fraction") = 0.1);

    m.def("compute_metrics",
          [](const nn::VectorXd& pred, const nn::VectorXd& target) {
              const eval::Metrics metrics = eval::compute_metrics(pred, target);
              return py::make_tuple(metrics.mse, metrics.mae,
                                    metrics.r2.has_value() ? py::cast(*metrics.r2) : py::none());
          },
          py::arg("predictions"), py::arg("targets"), "Returns (mse, mae, r2-or-None).");

    // autoencoder + models, kept coarse: build/train/score through the
    // same pipeline the CLI uses.
    py::class_<ae::AutoencoderWeights>(m, "Autoencoder")
        .def(py::init([](int n_latent, int window, std::uint64_t seed) {
                 return ae::make_autoencoder(n_latent, window, seed);
             }),
             py::arg("n_latent"), py::arg("window") = 20, py::arg("seed") = 1)
        .def_readonly("n_latent", &ae::AutoencoderWeights::n_latent)
        .def_readonly("window_size", &ae::AutoencoderWeights::window_size)
        .def("encode", &ae::encode, py::arg("window"))
        .def("decode", &ae::decode, py::arg("latent"))
        .def("train",
             [](ae::AutoencoderWeights& w, const nn::MatrixXd& inputs, const nn::VectorXd& targets,
                int epochs, int batch_size, double learning_rate, std::uint64_t seed) {
                 data::WindowSet windows;
                 windows.inputs = inputs;
                 windows.targets = targets;
                 windows.source_start.assign(static_cast<std::size_t>(inputs.rows()), 0);
                 ae::AeTrainConfig config;
                 config.epochs = epochs;
                 config.batch_size = batch_size;
                 config.learning_rate = learning_rate;
                 config.seed = seed;
                 return ae::train_autoencoder(w, windows, config).loss_history;
             },
             py::arg("inputs"), py::arg("targets"), py::arg("epochs") = 20, py::arg("batch_size") = 32,
             py::arg("learning_rate") = 0.0005, py::arg("seed") = 1);

    py::class_<models::Regressor>(m, "Regressor")
        .def_property_readonly("id", [](const models::Regressor& r) { return r.label().id(); })
        .def("predict", &models::Regressor::predict, py::arg("latent"))
        .def("parameter_count",
             [](models::Regressor& r) { return r.parameters().total_size(); });

    m.def("build_model",
          [](const std::string& scenario, const std::string& variant, int n_q, std::uint64_t seed,
             double angle_scale) {
              models::ModelLabel label;
              label.scenario = models::scenario_from_string(scenario);
              label.variant = models::variant_from_string(variant);
              label.n_q = n_q;
              return models::build_model(label, seed, angle_scale);
          },
          py::arg("scenario"), py::arg("variant"), py::arg("n_q"), py::arg("seed") = 1,
          py::arg("angle_scale") = 3.14159265358979323846);

    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              std::ostringstream out, err;
              const int code = cli::run_cli(args, out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Invoke the command line in-process: (exit_code, stdout, stderr).");

#ifdef VERSION_INFO
#define QF_STR2(x) #x
#define QF_STR(x) QF_STR2(x)
    m.attr("__version__") = QF_STR(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
