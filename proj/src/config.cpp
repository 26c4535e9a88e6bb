#include "tabsol/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tabsol/errors.hpp"

namespace tabsol {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError("invalid value for " + std::string(key) + ": '" +
                      std::string(text) + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (item.empty()) throw ConfigError("empty list item in " + std::string(key));
    out.push_back(parse_number<T>(key, item));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError(std::string(key) + " must not be empty");
  return out;
}

ShuffleMode parse_shuffle(std::string_view text) {
  if (text == "random") return ShuffleMode::Random;
  if (text == "ordered") return ShuffleMode::Ordered;
  throw ConfigError("schedule.shuffle must be 'random' or 'ordered'");
}

const std::set<std::string, std::less<>> kKnownKeys = {
    "network.hidden_count", "network.weight_range", "network.weight_floor",
    "network.bias_range", "network.offset_span", "network.activation_gain",
    "network.seed", "target.kind", "target.amplitude", "target.arg_scale",
    "target.points", "readout.current", "trainer.kind", "trainer.gain",
    "trainer.init_scale", "schedule.epochs", "schedule.shuffle",
    "schedule.seed", "emulator.bits", "emulator.add_no", "sweep.kind",
    "sweep.bits", "sweep.hidden_counts", "sweep.seeds", "sweep.base_seed",
    "sweep.epochs", "sweep.threshold", "sweep.max_epochs", "sweep.iterations",
    "sweep.schedule", "vectors.count", "vectors.seed", "eval.model",
    "output.trace", "output.model", "output.eval", "output.sweep",
    "output.schedule_variable", "output.schedule_fixed", "output.vectors"};

}  // namespace

AddNoSchedule parse_add_no_schedule(std::string_view text) {
  text = trim(text);
  if (text.find(':') == std::string_view::npos)
    return {{0, parse_number<unsigned>("add_no", text)}};
  AddNoSchedule out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ConfigError("add_no schedule entries are 'iteration:add_no'");
    out.push_back({parse_number<std::size_t>("add_no", trim(item.substr(0, colon))),
                   parse_number<unsigned>("add_no", trim(item.substr(colon + 1)))});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  validate_schedule(out);
  if (out.front().iteration != 0)
    throw ConfigError("add_no schedule must start at iteration 0");
  return out;
}

RunConfig parse_run_config(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!kKnownKeys.contains(key))
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (value.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty value for " + key);
    if (!kv.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }

  auto get = [&](std::string_view key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  RunConfig c;
  NetworkConfig& net = c.setup.network;
  if (auto v = get("network.hidden_count")) net.hidden_count = parse_number<std::size_t>("network.hidden_count", *v);
  if (auto v = get("network.weight_range")) net.weight_range = parse_number<double>("network.weight_range", *v);
  if (auto v = get("network.weight_floor")) net.weight_floor = parse_number<double>("network.weight_floor", *v);
  if (auto v = get("network.bias_range")) net.bias_range = parse_number<double>("network.bias_range", *v);
  if (auto v = get("network.offset_span")) net.offset_span = parse_number<double>("network.offset_span", *v);
  if (auto v = get("network.activation_gain")) net.activation_gain = parse_number<double>("network.activation_gain", *v);
  if (auto v = get("network.seed")) net.seed = parse_number<std::uint64_t>("network.seed", *v);

  if (auto v = get("target.kind")) c.setup.target = TargetFunction::defaults(target_kind_from_string(*v));
  if (auto v = get("target.amplitude")) c.setup.target.amplitude = parse_number<double>("target.amplitude", *v);
  if (auto v = get("target.arg_scale")) c.setup.target.arg_scale = parse_number<double>("target.arg_scale", *v);
  if (auto v = get("target.points")) c.setup.points = parse_number<std::size_t>("target.points", *v);
  if (auto v = get("readout.current")) c.setup.readout_current = parse_number<double>("readout.current", *v);

  if (auto v = get("trainer.kind")) {
    c.trainer = *v;
    if (c.trainer != "sol_hw")
      c.trainer_kind = TrainerKind::defaults(trainer_tag_from_string(c.trainer));
  }
  if (auto v = get("trainer.gain")) c.trainer_kind.gain = parse_number<double>("trainer.gain", *v);
  if (auto v = get("trainer.init_scale")) c.trainer_kind.init_scale = parse_number<double>("trainer.init_scale", *v);

  if (auto v = get("schedule.epochs")) c.schedule.epochs = parse_number<std::size_t>("schedule.epochs", *v);
  if (auto v = get("schedule.shuffle")) c.schedule.mode = parse_shuffle(*v);
  if (auto v = get("schedule.seed")) c.schedule.seed = parse_number<std::uint64_t>("schedule.seed", *v);

  if (auto v = get("emulator.bits")) c.bits = parse_number<unsigned>("emulator.bits", *v);
  if (auto v = get("emulator.add_no")) c.add_no = parse_add_no_schedule(*v);

  if (auto v = get("sweep.kind")) c.sweep_kind = *v;
  if (auto v = get("sweep.bits")) c.sweep_bits = parse_list<unsigned>("sweep.bits", *v);
  if (auto v = get("sweep.hidden_counts")) c.sweep_hidden_counts = parse_list<std::size_t>("sweep.hidden_counts", *v);
  if (auto v = get("sweep.seeds")) c.sweep_seeds = parse_number<std::size_t>("sweep.seeds", *v);
  if (auto v = get("sweep.base_seed")) c.sweep_base_seed = parse_number<std::uint64_t>("sweep.base_seed", *v);
  if (auto v = get("sweep.epochs")) c.sweep_epochs = parse_number<std::size_t>("sweep.epochs", *v);
  if (auto v = get("sweep.threshold")) c.sweep_threshold = parse_number<double>("sweep.threshold", *v);
  if (auto v = get("sweep.max_epochs")) c.sweep_max_epochs = parse_number<std::size_t>("sweep.max_epochs", *v);
  if (auto v = get("sweep.iterations")) c.sweep_iterations = parse_number<std::size_t>("sweep.iterations", *v);
  if (auto v = get("sweep.schedule")) c.sweep_schedule = parse_add_no_schedule(*v);

  if (auto v = get("vectors.count")) c.vector_count = parse_number<std::size_t>("vectors.count", *v);
  if (auto v = get("vectors.seed")) c.vector_seed = parse_number<std::uint64_t>("vectors.seed", *v);
  if (auto v = get("eval.model")) c.eval_model = *v;

  if (auto v = get("output.trace")) c.trace_file = *v;
  if (auto v = get("output.model")) c.model_file = *v;
  if (auto v = get("output.eval")) c.eval_file = *v;
  if (auto v = get("output.sweep")) c.sweep_file = *v;
  if (auto v = get("output.schedule_variable")) c.schedule_variable_file = *v;
  if (auto v = get("output.schedule_fixed")) c.schedule_fixed_file = *v;
  if (auto v = get("output.vectors")) c.vectors_file = *v;

  c.setup.validate();
  c.trainer_kind.validate();
  // Constructing an array checks the counter width against add_no.
  for (const auto& step : c.add_no) DlbArray(1, c.bits, static_cast<std::uint8_t>(step.add_no));
  if (c.sweep_seeds && *c.sweep_seeds == 0) throw ConfigError("sweep.seeds must be >= 1");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

void override_seeds(RunConfig& config, std::uint64_t seed) {
  config.setup.network.seed = seed;
  config.schedule.seed = seed;
  config.sweep_base_seed = seed;
  config.vector_seed = seed;
}

std::vector<std::size_t> RunConfig::hidden_counts_for(std::string_view kind) const {
  if (sweep_hidden_counts) return *sweep_hidden_counts;
  if (kind == "capacity") return {10, 15, 20, 25, 30, 35, 40, 50, 100};
  return {20, 40, 60, 80, 100};
}

std::size_t RunConfig::seeds_for(std::string_view kind) const {
  if (sweep_seeds) return *sweep_seeds;
  return kind == "bits" ? 10 : 5;
}

}  // namespace tabsol
