#pragma once

// TOML run configuration: parsing, validation and canonical re-emission.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <twa/ensemble.hpp>
#include <twa/models.hpp>
#include <twa/oracle.hpp>

namespace twa::cli {

/// Validation failure anchored to a line of the configuration source.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using ModelParams = std::variant<DrivenSpinParams, TavisCummingsParams, CentralSpinParams,
                                 RydbergChainParams, AtomArrayParams>;

enum class Engine { Twa, Oracle, Both };

std::string to_string(Engine engine);
Engine parse_engine(const std::string& name);

struct SamplerConfig {
  SpinScheme scheme = SpinScheme::Discrete;
  std::optional<Eigen::Vector3d> direction;  // absent: model preset
  std::complex<double> boson_amplitude = 0.0;
};

struct OracleSettings {
  std::size_t cutoff = 12;
  double dt = 0.0;
};

struct RunConfig {
  std::string source = "<config>";
  std::string model;
  ModelParams params;
  SamplerConfig sampler;
  IntegratorConfig integrator;
  EnsembleConfig ensemble;
  OracleSettings oracle;
  Engine engine = Engine::Twa;
  std::string prefix = "twa_run";
  std::vector<std::string> observables;

  /// Line of each key path ("model.omega") in the source, when known.
  std::map<std::string, std::size_t> lines;
  std::size_t line_of(const std::string& key) const;
};

/// Parses and validates; throws ConfigError.
RunConfig parse_config(const std::string& text, const std::string& source);
RunConfig load_config(const std::string& path);

/// Canonical TOML with every default made explicit. Parsing it yields an
/// equivalent configuration.
std::string to_toml(const RunConfig& config);

/// Model names accepted in [model].name.
const std::vector<std::string>& model_names();

ModelSpec build_model(const RunConfig& config);
SamplerSpec build_sampler(const RunConfig& config, const ModelSpec& spec);
ObservableSpec parse_observable(const std::string& text);
std::vector<ObservableSpec> build_observables(const RunConfig& config);
/// Observables used when the configuration lists none.
std::vector<std::string> default_observables(const std::string& model);

}  // namespace twa::cli
