#include "tabsol/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tabsol/errors.hpp"

namespace tabsol {

using json = nlohmann::json;

namespace {

json network_to_json(const TabNetwork& net) {
  const NetworkConfig& c = net.config();
  json w = json::array();
  for (Eigen::Index i = 0; i < net.input_weights().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < net.input_weights().cols(); ++j)
      row.push_back(net.input_weights()(i, j));
    w.push_back(std::move(row));
  }
  return {
      {"input_dim", c.input_dim},
      {"hidden_count", c.hidden_count},
      {"output_dim", c.output_dim},
      {"weight_range", c.weight_range},
      {"weight_floor", c.weight_floor},
      {"bias_range", c.bias_range},
      {"offset_span", c.offset_span},
      {"activation_gain", c.activation_gain},
      {"seed", c.seed},
      {"input_weights", std::move(w)},
      {"biases", std::vector<double>(net.biases().begin(), net.biases().end())},
      {"offsets", std::vector<double>(net.offsets().begin(), net.offsets().end())},
  };
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix to_matrix(const json& rows, std::size_t n_rows, std::size_t n_cols,
                 const char* what) {
  if (!rows.is_array() || rows.size() != n_rows)
    throw IoError(std::string("model ") + what + " has the wrong row count");
  Matrix m(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (row.size() != n_cols)
      throw IoError(std::string("model ") + what + " has the wrong column count");
    for (std::size_t j = 0; j < n_cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

TabNetwork network_from_json(const json& j) {
  NetworkConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.hidden_count = j.at("hidden_count").get<std::size_t>();
  c.output_dim = j.at("output_dim").get<std::size_t>();
  c.weight_range = j.at("weight_range").get<double>();
  c.weight_floor = j.at("weight_floor").get<double>();
  c.bias_range = j.at("bias_range").get<double>();
  c.offset_span = j.at("offset_span").get<double>();
  c.activation_gain = j.at("activation_gain").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  Matrix w = to_matrix(j.at("input_weights"), c.hidden_count, c.input_dim, "input_weights");
  return TabNetwork(c, std::move(w), to_vector(j.at("biases").get<std::vector<double>>()),
                    to_vector(j.at("offsets").get<std::vector<double>>()));
}

json readout_to_json(const std::variant<OutputWeights, DlbArray>& readout) {
  if (const auto* dlbs = std::get_if<DlbArray>(&readout)) {
    std::vector<std::uint32_t> mags;
    std::vector<unsigned> signs;
    for (const auto& s : dlbs->states()) {
      mags.push_back(s.mag_w);
      signs.push_back(s.sign_w);
    }
    return {{"kind", "dlb"},
            {"bits", dlbs->bits()},
            {"add_no", dlbs->add_no()},
            {"mag_w", mags},
            {"sign_w", signs}};
  }
  const Matrix& m = std::get<OutputWeights>(readout).matrix;
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"kind", "real"}, {"weights", std::move(rows)}};
}

std::variant<OutputWeights, DlbArray> readout_from_json(const json& j,
                                                        const TabNetwork& net) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "real")
    return OutputWeights{to_matrix(j.at("weights"), net.output_dim(),
                                   net.hidden_count(), "readout weights")};
  if (kind != "dlb") throw IoError("unknown readout kind '" + kind + "'");
  const auto bits = j.at("bits").get<unsigned>();
  const auto add_no = j.at("add_no").get<unsigned>();
  const auto mags = j.at("mag_w").get<std::vector<std::uint32_t>>();
  const auto signs = j.at("sign_w").get<std::vector<unsigned>>();
  if (mags.size() != signs.size() || mags.size() != net.hidden_count())
    throw IoError("model counter arrays do not match hidden_count");
  if (net.output_dim() != 1) throw IoError("counter readout requires one output");
  if (add_no > kMaxAddNo) throw IoError("model add_no out of range");
  std::vector<DlbState> states(mags.size());
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (signs[i] > 1) throw IoError("model sign_w entry is not a bit");
    states[i] = DlbState{mags[i], static_cast<Bit>(signs[i]),
                         static_cast<std::uint8_t>(add_no), bits};
  }
  return DlbArray(std::move(states));
}

}  // namespace

OutputWeights Model::weights() const {
  if (const auto* dlbs = std::get_if<DlbArray>(&readout)) return dlbs->weights();
  return std::get<OutputWeights>(readout);
}

std::string model_to_json(const Model& model) {
  const json j = {
      {"format", kModelFormat},
      {"version", kModelVersion},
      {"network", network_to_json(model.network)},
      {"readout_current", model.readout_current},
      {"readout", readout_to_json(model.readout)},
  };
  return j.dump(1) + "\n";
}

Model model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat)
      throw IoError("not a tabsol model file");
    if (j.at("version").get<int>() != kModelVersion)
      throw IoError("unsupported model version " + j.at("version").dump());
    TabNetwork net = network_from_json(j.at("network"));
    const double current = j.at("readout_current").get<double>();
    if (!std::isfinite(current) || !(current > 0.0))
      throw IoError("model readout_current must be > 0");
    auto readout = readout_from_json(j.at("readout"), net);
    return Model{std::move(net), current, std::move(readout)};
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid model parameters: ") + e.what());
  } catch (const InputError& e) {
    throw IoError(std::string("invalid model parameters: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const Model& model) {
  write_file_atomic(path, model_to_json(model));
}

Model load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

std::string trace_csv(const TrainingTrace& trace) {
  std::string out = "iteration,epoch,rms_error,percent_error\n";
  for (const auto& r : trace) {
    out += std::to_string(r.iteration);
    out += ',';
    out += std::to_string(r.epoch);
    out += ',';
    out += format_double(r.rms_error);
    out += ',';
    out += format_double(r.percent_error);
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "swept_value,seed,final_rms,final_percent,epochs_to_threshold\n";
  for (const auto& r : result.records) {
    out += r.swept_value;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += format_double(r.final_rms);
    out += ',';
    out += format_double(r.final_percent);
    out += ',';
    if (r.tracks_threshold)
      out += r.converged ? std::to_string(r.epochs_to_threshold) : "-1";
    out += '\n';
  }
  return out;
}

std::string eval_csv(const Dataset& data, std::span<const double> predicted) {
  if (predicted.size() != data.size())
    throw InputError("prediction count does not match the dataset");
  std::string out = "input,target,predicted,error\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    out += format_double(data.inputs[k]);
    out += ',';
    out += format_double(data.targets[k]);
    out += ',';
    out += format_double(predicted[k]);
    out += ',';
    out += format_double(data.targets[k] - predicted[k]);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() +
                          ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                  ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return text.str();
}

}  // namespace tabsol
