#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "tabsol/benchmark.hpp"
#include "tabsol/dlb.hpp"
#include "tabsol/network.hpp"

namespace tabsol {

inline constexpr std::string_view kModelFormat = "tabsol-model";
inline constexpr int kModelVersion = 1;

/// A trained network: frozen encoder plus either real weights or counters.
struct Model {
  TabNetwork network;
  double readout_current = 1.0;
  std::variant<OutputWeights, DlbArray> readout;

  bool has_counters() const { return std::holds_alternative<DlbArray>(readout); }
  OutputWeights weights() const;
};

std::string model_to_json(const Model& model);

/// Throws IoError on malformed text, a wrong format tag or version, or
/// parameters that fail validation.
Model model_from_json(std::string_view text);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

/// Shortest round-trip decimal, independent of the global locale.
std::string format_double(double value);

std::string trace_csv(const TrainingTrace& trace);
std::string sweep_csv(const SweepResult& result);
std::string eval_csv(const Dataset& data, std::span<const double> predicted);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace tabsol
