#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tabsol/benchmark.hpp"
#include "tabsol/commands.hpp"
#include "tabsol/errors.hpp"
#include "tabsol/io.hpp"

namespace py = pybind11;
using namespace tabsol;

namespace {

Vector as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "TAB random-projection networks with sign-based online learning";

  static py::exception<Error> base_error(m, "TabsolError");
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());
  py::register_exception<InputError>(m, "InputError", base_error.ptr());
  py::register_exception<NumericError>(m, "NumericError", base_error.ptr());
  py::register_exception<IoError>(m, "IoError", base_error.ptr());

  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_readwrite("input_dim", &NetworkConfig::input_dim)
      .def_readwrite("hidden_count", &NetworkConfig::hidden_count)
      .def_readwrite("output_dim", &NetworkConfig::output_dim)
      .def_readwrite("weight_range", &NetworkConfig::weight_range)
      .def_readwrite("weight_floor", &NetworkConfig::weight_floor)
      .def_readwrite("bias_range", &NetworkConfig::bias_range)
      .def_readwrite("offset_span", &NetworkConfig::offset_span)
      .def_readwrite("activation_gain", &NetworkConfig::activation_gain)
      .def_readwrite("seed", &NetworkConfig::seed)
      .def("validate", &NetworkConfig::validate);

  py::class_<TabNetwork>(m, "TabNetwork")
      .def(py::init<const NetworkConfig&>())
      .def(py::init<const NetworkConfig&, Matrix, Vector, Vector>(), py::arg("config"),
           py::arg("input_weights"), py::arg("biases"), py::arg("offsets"))
      .def_property_readonly("config", &TabNetwork::config)
      .def_property_readonly("input_weights", &TabNetwork::input_weights)
      .def_property_readonly("biases", &TabNetwork::biases)
      .def_property_readonly("offsets", &TabNetwork::offsets)
      .def_property_readonly("hidden_count", &TabNetwork::hidden_count)
      .def("hidden_activations", &TabNetwork::hidden_activations)
      .def("hidden_matrix", [](const TabNetwork& net, const std::vector<double>& x) {
        return net.hidden_matrix(x);
      });

  m.def("init_network", &init_network);
  m.def("benchmark_network", &benchmark_network, py::arg("hidden_count"), py::arg("seed"));
  m.def("systematic_offsets", &systematic_offsets);

  py::class_<OutputWeights>(m, "OutputWeights")
      .def(py::init([](Matrix m) { return OutputWeights{std::move(m)}; }))
      .def_readwrite("matrix", &OutputWeights::matrix)
      .def_static("zeros", &OutputWeights::zeros);

  m.def("predict", &predict);

  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("h", &StepRecord::h)
      .def_readonly("y_target", &StepRecord::y_target)
      .def_readonly("y_pred", &StepRecord::y_pred)
      .def_readonly("error", &StepRecord::error)
      .def_readonly("phi", &StepRecord::phi)
      .def_readonly("normalizer", &StepRecord::normalizer);

  py::class_<OpiumState>(m, "OpiumState")
      .def_readwrite("theta", &OpiumState::theta)
      .def_readwrite("init_scale", &OpiumState::init_scale)
      .def_static("initial", &OpiumState::initial);

  // Step functions return (new state..., record) instead of mutating in place.
  m.def("opium_step", [](OpiumState state, OutputWeights w, const Vector& h, const Vector& y) {
    StepRecord rec = opium_step(state, w, h, y);
    return py::make_tuple(state, w, rec);
  });
  m.def("opium_normalized_step",
        [](OutputWeights w, const Vector& h, const Vector& y, double init_scale) {
          StepRecord rec = opium_normalized_step(w, h, y, init_scale);
          return py::make_tuple(w, rec);
        });
  m.def("lms_step", [](OutputWeights w, const Vector& h, const Vector& y, double gain) {
    StepRecord rec = lms_step(w, h, y, gain);
    return py::make_tuple(w, rec);
  });
  m.def("sol_step", [](OutputWeights w, const Vector& h, const Vector& y, double gain) {
    StepRecord rec = sol_step(w, h, y, gain);
    return py::make_tuple(w, rec);
  });
  m.def("svd_batch_solve", &svd_batch_solve, py::arg("H"), py::arg("Y"),
        py::arg("rcond") = 1e-12);

  py::enum_<TrainerTag>(m, "TrainerTag")
      .value("OpiumFull", TrainerTag::OpiumFull)
      .value("OpiumNormalized", TrainerTag::OpiumNormalized)
      .value("LmsConstantGain", TrainerTag::LmsConstantGain)
      .value("SolSign", TrainerTag::SolSign);

  py::class_<TrainerKind>(m, "TrainerKind")
      .def(py::init<>())
      .def_readwrite("tag", &TrainerKind::tag)
      .def_readwrite("gain", &TrainerKind::gain)
      .def_readwrite("init_scale", &TrainerKind::init_scale)
      .def_static("defaults", &TrainerKind::defaults);

  py::enum_<ShuffleMode>(m, "ShuffleMode")
      .value("Random", ShuffleMode::Random)
      .value("Ordered", ShuffleMode::Ordered);

  py::class_<Schedule>(m, "Schedule")
      .def(py::init([](std::size_t epochs, ShuffleMode mode, std::uint64_t seed) {
             return Schedule{epochs, mode, seed};
           }),
           py::arg("epochs"), py::arg("mode") = ShuffleMode::Random, py::arg("seed") = 0)
      .def_readwrite("epochs", &Schedule::epochs)
      .def_readwrite("mode", &Schedule::mode)
      .def_readwrite("seed", &Schedule::seed);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](std::vector<double> x, std::vector<double> y) {
        return Dataset{std::move(x), std::move(y)};
      }))
      .def_readwrite("inputs", &Dataset::inputs)
      .def_readwrite("targets", &Dataset::targets);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iteration", &TraceRecord::iteration)
      .def_readonly("epoch", &TraceRecord::epoch)
      .def_readonly("error", &TraceRecord::error)
      .def_readonly("rms_error", &TraceRecord::rms_error)
      .def_readonly("percent_error", &TraceRecord::percent_error);

  m.def("train_online", &train_online);
  m.def("rms", [](const std::vector<double>& v) { return rms(v); });
  m.def("percent_rms_error", [](const std::vector<double>& p, const std::vector<double>& t) {
    return percent_rms_error(p, t);
  });

  py::class_<DlbState>(m, "DlbState")
      .def(py::init([](std::uint32_t mag, Bit sign, std::uint8_t add_no, unsigned bits) {
             return DlbState{mag, sign, add_no, bits};
           }),
           py::arg("mag_w") = 0, py::arg("sign_w") = 0, py::arg("add_no") = 0,
           py::arg("bits") = 13)
      .def_readwrite("mag_w", &DlbState::mag_w)
      .def_readwrite("sign_w", &DlbState::sign_w)
      .def_readwrite("add_no", &DlbState::add_no)
      .def_readwrite("bits", &DlbState::bits)
      .def(py::self == py::self)
      .def("__repr__", [](const DlbState& s) {
        std::ostringstream out;
        out << "DlbState(mag_w=" << s.mag_w << ", sign_w=" << int(s.sign_w)
            << ", add_no=" << int(s.add_no) << ", bits=" << s.bits << ")";
        return out.str();
      });

  m.def("dlb_update", &dlb_update);
  m.def("dlb_weight_value", &dlb_weight_value);

  py::class_<DlbArray>(m, "DlbArray")
      .def(py::init<std::size_t, unsigned, std::uint8_t>(), py::arg("count"),
           py::arg("bits") = 13, py::arg("add_no") = 0)
      .def_property_readonly("states", &DlbArray::states)
      .def_property_readonly("bits", &DlbArray::bits)
      .def_property_readonly("add_no", &DlbArray::add_no)
      .def("set_add_no", &DlbArray::set_add_no)
      .def("weights", &DlbArray::weights)
      .def("__len__", &DlbArray::size);

  m.def("sol_hw_step", [](const TabNetwork& net, DlbArray& dlbs, const Vector& x, double y) {
    return sol_hw_step(net, dlbs, x, y);
  });

  py::class_<DlbVector>(m, "DlbVector")
      .def_readonly("state_in", &DlbVector::in)
      .def_readonly("sign_e", &DlbVector::sign_e)
      .def_readonly("sign_h", &DlbVector::sign_h)
      .def_readonly("state_out", &DlbVector::out);
  m.def("random_vectors", &random_vectors);
  m.def("format_vector", &format_vector);
  m.def("parse_vector", &parse_vector);

  py::enum_<TargetKind>(m, "TargetKind")
      .value("Sine", TargetKind::Sine)
      .value("Cube", TargetKind::Cube)
      .value("Sinc", TargetKind::Sinc)
      .value("Complex", TargetKind::Complex);

  py::class_<TargetFunction>(m, "TargetFunction")
      .def(py::init<>())
      .def_readwrite("kind", &TargetFunction::kind)
      .def_readwrite("amplitude", &TargetFunction::amplitude)
      .def_readwrite("arg_scale", &TargetFunction::arg_scale)
      .def_static("defaults", &TargetFunction::defaults)
      .def("__call__", &TargetFunction::operator());

  m.def("gen_target", &gen_target, py::arg("fn"), py::arg("n_points") = 200);

  py::class_<HwRunOptions>(m, "HwRunOptions")
      .def(py::init<>())
      .def_readwrite("bits", &HwRunOptions::bits)
      .def_property(
          "add_no",
          [](const HwRunOptions& o) {
            std::vector<std::pair<std::size_t, unsigned>> out;
            for (const auto& s : o.add_no) out.emplace_back(s.iteration, s.add_no);
            return out;
          },
          [](HwRunOptions& o, const std::vector<std::pair<std::size_t, unsigned>>& v) {
            o.add_no.clear();
            for (const auto& [it, a] : v) o.add_no.push_back({it, a});
          })
      .def_readwrite("epochs", &HwRunOptions::epochs)
      .def_readwrite("iterations", &HwRunOptions::iterations)
      .def_readwrite("mode", &HwRunOptions::mode)
      .def_readwrite("shuffle_seed", &HwRunOptions::shuffle_seed)
      .def_readwrite("stop_at_percent", &HwRunOptions::stop_at_percent);

  py::class_<HwRunResult>(m, "HwRunResult")
      .def_readonly("dlbs", &HwRunResult::dlbs)
      .def_readonly("trace", &HwRunResult::trace)
      .def_readonly("epoch_percent", &HwRunResult::epoch_percent)
      .def_readonly("final_rms", &HwRunResult::final_rms)
      .def_readonly("final_percent", &HwRunResult::final_percent)
      .def_readonly("epochs_to_threshold", &HwRunResult::epochs_to_threshold);

  m.def("train_hardware", &train_hardware, py::arg("net"), py::arg("data"),
        py::arg("readout_current"), py::arg("options"),
        py::call_guard<py::gil_scoped_release>());

  m.def("predict_grid", [](const TabNetwork& net, const OutputWeights& w,
                           const std::vector<double>& x, double current) {
    return predict_grid(net, w, x, current);
  });

  m.def("run_cli",
        [](const std::string& command, const std::filesystem::path& config,
           const std::filesystem::path& out_dir, std::size_t jobs) {
          CommandOptions options;
          options.out_dir = out_dir;
          options.jobs = jobs;
          std::ostringstream out, err;
          const int code = run_cli(command, config, options, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("command"), py::arg("config"), py::arg("out_dir") = ".",
        py::arg("jobs") = 1);
}
