#include "twa/config.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <twa/errors.hpp>

namespace twa::cli {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::Twa:
      return "twa";
    case Engine::Oracle:
      return "oracle";
    default:
      return "both";
  }
}

Engine parse_engine(const std::string& name) {
  if (name == "twa") return Engine::Twa;
  if (name == "oracle") return Engine::Oracle;
  if (name == "both") return Engine::Both;
  throw InvalidParameter("unknown engine '" + name + "' (expected twa, oracle or both)");
}

std::size_t RunConfig::line_of(const std::string& key) const {
  const auto it = lines.find(key);
  return it == lines.end() ? 0 : it->second;
}

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"driven_spin", "tavis_cummings", "central_spin",
                                                 "rydberg_chain", "atom_array"};
  return names;
}

namespace {

std::size_t line_of(const toml::node& node) { return node.source().begin.line; }

// Reads one TOML table, remembering which keys were consumed so leftovers
// can be reported.
class Section {
 public:
  Section(const toml::table* table, std::string name, RunConfig& config, std::size_t fallback_line)
      : table_(table), name_(std::move(name)), config_(config), line_(fallback_line) {
    if (table_ && table_->source().begin.line > 0) line_ = table_->source().begin.line;
  }

  [[noreturn]] void fail(std::size_t line, const std::string& message) const {
    throw ConfigError(config_.source, line, message);
  }

  // Line of an already read key, else of the table header.
  std::size_t key_line(const std::string& key) const {
    const std::size_t line = config_.line_of(name_ + "." + key);
    return line ? line : line_;
  }

  const toml::node* find(const std::string& key) {
    used_.insert(key);
    if (!table_) return nullptr;
    const toml::node* node = table_->get(key);
    if (node) config_.lines[name_ + "." + key] = line_of(*node);
    return node;
  }

  const toml::node& require(const std::string& key) {
    const toml::node* node = find(key);
    if (!node) fail(line_, name_ + "." + key + ": missing required parameter");
    return *node;
  }

  double number(const toml::node& node, const std::string& key) const {
    if (const auto* f = node.as_floating_point()) return f->get();
    if (const auto* i = node.as_integer()) return static_cast<double>(i->get());
    fail(line_of(node), name_ + "." + key + ": expected a number");
  }

  void real(const std::string& key, double& out, bool required = false) {
    const toml::node* node = required ? &require(key) : find(key);
    if (!node) return;
    out = number(*node, key);
    if (!std::isfinite(out)) fail(line_of(*node), name_ + "." + key + ": must be finite");
  }

  template <typename Int>
  void integer(const std::string& key, Int& out, bool required = false, std::int64_t min = 0) {
    const toml::node* node = required ? &require(key) : find(key);
    if (!node) return;
    const auto* i = node->as_integer();
    if (!i) fail(line_of(*node), name_ + "." + key + ": expected an integer");
    if (i->get() < min) {
      fail(line_of(*node), name_ + "." + key + ": must be at least " + std::to_string(min));
    }
    if constexpr (std::numeric_limits<Int>::max() < std::numeric_limits<std::int64_t>::max()) {
      if (i->get() > static_cast<std::int64_t>(std::numeric_limits<Int>::max())) {
        fail(line_of(*node), name_ + "." + key + ": too large");
      }
    }
    out = static_cast<Int>(i->get());
  }

  void boolean(const std::string& key, bool& out) {
    const toml::node* node = find(key);
    if (!node) return;
    const auto* b = node->as_boolean();
    if (!b) fail(line_of(*node), name_ + "." + key + ": expected true or false");
    out = b->get();
  }

  void string(const std::string& key, std::string& out, bool required = false) {
    const toml::node* node = required ? &require(key) : find(key);
    if (!node) return;
    const auto* s = node->as_string();
    if (!s) fail(line_of(*node), name_ + "." + key + ": expected a string");
    out = s->get();
  }

  std::vector<double> reals(const toml::node& node, const std::string& key) const {
    const auto* arr = node.as_array();
    if (!arr) fail(line_of(node), name_ + "." + key + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& item : *arr) out.push_back(number(item, key));
    return out;
  }

  void real_list(const std::string& key, std::vector<double>& out) {
    if (const toml::node* node = find(key)) out = reals(*node, key);
  }

  void vector3(const std::string& key, std::optional<Eigen::Vector3d>& out) {
    const toml::node* node = find(key);
    if (!node) return;
    const auto v = reals(*node, key);
    if (v.size() != 3) fail(line_of(*node), name_ + "." + key + ": expected three components");
    out = Eigen::Vector3d(v[0], v[1], v[2]);
  }

  void complex(const std::string& key, std::complex<double>& out) {
    const toml::node* node = find(key);
    if (!node) return;
    if (node->is_array()) {
      const auto v = reals(*node, key);
      if (v.size() != 2) fail(line_of(*node), name_ + "." + key + ": expected [re, im]");
      out = {v[0], v[1]};
    } else {
      out = number(*node, key);
    }
  }

  // Unknown keys are an error: a typo must not silently fall back to a default.
  void finish() const {
    if (!table_) return;
    for (const auto& [key, node] : *table_) {
      if (!used_.count(std::string(key.str()))) {
        fail(line_of(node), name_ + "." + std::string(key.str()) + ": unknown parameter");
      }
    }
  }

  std::size_t line() const noexcept { return line_; }
  const std::string& name() const noexcept { return name_; }

 private:
  const toml::table* table_;
  std::string name_;
  RunConfig& config_;
  std::size_t line_;
  std::set<std::string> used_;
};

ModelParams read_model(Section& m, const std::string& name) {
  if (name == "driven_spin") {
    DrivenSpinParams p;
    m.real("omega", p.omega, true);
    m.real("gamma_down", p.gamma_down);
    m.real("gamma_up", p.gamma_up);
    m.real("spin_size", p.spin_size);
    m.boolean("rescale_decay", p.rescale_decay);
    return p;
  }
  if (name == "tavis_cummings") {
    TavisCummingsParams p;
    m.integer("n", p.n, true, 1);
    m.real("omega", p.omega, true);
    m.real("epsilon", p.epsilon, true);
    m.real("g", p.g, true);
    m.real("kappa", p.kappa);
    m.real("gamma_down", p.gamma_down);
    m.real("gamma_up", p.gamma_up);
    return p;
  }
  if (name == "central_spin") {
    CentralSpinParams p;
    m.integer("n", p.n, true, 1);
    m.real("omega", p.omega, true);
    m.real("epsilon", p.epsilon, true);
    m.real("g", p.g, true);
    m.real("kappa", p.kappa);
    m.real("gamma_down", p.gamma_down);
    m.real("gamma_up", p.gamma_up);
    m.real_list("epsilons", p.epsilons);
    m.real_list("couplings", p.couplings);
    m.real_list("losses", p.losses);
    return p;
  }
  if (name == "rydberg_chain") {
    RydbergChainParams p;
    m.integer("n", p.n, true, 2);
    m.real("omega", p.omega, true);
    m.real("j", p.j, true);
    m.real("kappa", p.kappa);
    m.real("gamma_down", p.gamma_down);
    return p;
  }
  if (name == "atom_array") {
    AtomArrayParams p;
    m.integer("n", p.n, true, 1);
    m.real("spacing", p.spacing, true);
    m.real("wavelength", p.wavelength);
    std::optional<Eigen::Vector3d> dipole;
    m.vector3("dipole", dipole);
    if (dipole) p.dipole = dipole->cast<Complex>();
    m.real("omega_z", p.omega_z);
    m.real("omega", p.omega);
    m.real("gamma0", p.gamma0);
    return p;
  }
  std::string known;
  for (const auto& n : model_names()) known += (known.empty() ? "" : ", ") + n;
  m.fail(m.key_line("name"), "model.name: unknown model '" + name + "' (known: " + known + ")");
}

const toml::table* sub_table(const toml::table& root, const std::string& name, const RunConfig& cfg) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError(cfg.source, line_of(*node), name + ": expected a table");
  return node->as_table();
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  cfg.source = source;
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError(source, e.source().begin.line, std::string(e.description()));
  }

  static const std::set<std::string> sections = {"model",    "sampler", "integrator",
                                                 "ensemble", "oracle",  "output"};
  for (const auto& [key, node] : root) {
    if (!sections.count(std::string(key.str()))) {
      throw ConfigError(source, line_of(node), std::string(key.str()) + ": unknown section");
    }
  }

  const toml::table* model_table = sub_table(root, "model", cfg);
  if (!model_table) throw ConfigError(source, 1, "model: missing required section");
  Section model(model_table, "model", cfg, 1);
  model.string("name", cfg.model, true);
  cfg.params = read_model(model, cfg.model);
  model.finish();

  try {
    // Building validates ranges that only the model knows about.
    build_model(cfg);
  } catch (const Error& e) {
    throw ConfigError(source, model.line(), std::string("model: ") + e.what());
  }

  Section sampler(sub_table(root, "sampler", cfg), "sampler", cfg, 1);
  std::string scheme = to_string(cfg.sampler.scheme);
  sampler.string("scheme", scheme);
  try {
    cfg.sampler.scheme = parse_spin_scheme(scheme);
  } catch (const Error& e) {
    throw ConfigError(source, cfg.line_of("sampler.scheme"), std::string("sampler.scheme: ") + e.what());
  }
  sampler.vector3("direction", cfg.sampler.direction);
  if (cfg.sampler.direction) {
    const double norm = cfg.sampler.direction->norm();
    if (!(norm > 0.0)) {
      throw ConfigError(source, cfg.line_of("sampler.direction"),
                        "sampler.direction: must be a nonzero vector");
    }
    *cfg.sampler.direction /= norm;
  }
  sampler.complex("boson_amplitude", cfg.sampler.boson_amplitude);
  sampler.finish();

  Section integ(sub_table(root, "integrator", cfg), "integrator", cfg, 1);
  double dt = 0.0;
  integ.real("dt", dt);
  integ.real("t_final", cfg.integrator.t_final);
  integ.integer("fixed_point_iters", cfg.integrator.fixed_point_iters, false, 2);
  integ.real("fixed_point_tol", cfg.integrator.fixed_point_tol);
  integ.integer("output_stride", cfg.integrator.output_stride, false, 1);
  integ.finish();
  cfg.integrator.dt = cfg.lines.count("integrator.dt") ? dt : default_time_step(build_model(cfg));
  try {
    cfg.integrator.validate();
  } catch (const Error& e) {
    throw ConfigError(source, integ.line(), std::string("integrator: ") + e.what());
  }

  Section ens(sub_table(root, "ensemble", cfg), "ensemble", cfg, 1);
  ens.integer("n_total", cfg.ensemble.n_total, false, 1);
  ens.integer("n_initial", cfg.ensemble.n_initial);
  ens.integer("seed", cfg.ensemble.seed);
  ens.integer("threads", cfg.ensemble.threads);
  ens.integer("block_size", cfg.ensemble.block_size, false, 1);
  ens.real("max_failure_fraction", cfg.ensemble.max_failure_fraction);
  ens.finish();
  try {
    cfg.ensemble.validate();
  } catch (const Error& e) {
    throw ConfigError(source, ens.line(), std::string("ensemble: ") + e.what());
  }

  Section orc(sub_table(root, "oracle", cfg), "oracle", cfg, 1);
  orc.integer("cutoff", cfg.oracle.cutoff, false, 1);
  orc.real("dt", cfg.oracle.dt);
  orc.finish();
  if (cfg.oracle.dt < 0.0) throw ConfigError(source, cfg.line_of("oracle.dt"), "oracle.dt: must be non-negative");

  Section out(sub_table(root, "output", cfg), "output", cfg, 1);
  out.string("prefix", cfg.prefix);
  std::string engine = to_string(cfg.engine);
  out.string("engine", engine);
  try {
    cfg.engine = parse_engine(engine);
  } catch (const Error& e) {
    throw ConfigError(source, cfg.line_of("output.engine"), std::string("output.engine: ") + e.what());
  }
  if (const toml::node* node = out.find("observables")) {
    const auto* arr = node->as_array();
    if (!arr) throw ConfigError(source, line_of(*node), "output.observables: expected an array of strings");
    for (const auto& item : *arr) {
      const auto* s = item.as_string();
      if (!s) throw ConfigError(source, line_of(item), "output.observables: expected an array of strings");
      cfg.observables.push_back(s->get());
    }
  }
  out.finish();
  if (cfg.prefix.empty()) throw ConfigError(source, out.line(), "output.prefix: must not be empty");
  if (cfg.observables.empty()) cfg.observables = default_observables(cfg.model);

  const ModelSpec spec = build_model(cfg);
  const std::size_t obs_line = cfg.lines.count("output.observables") ? cfg.line_of("output.observables")
                                                                     : out.line();
  try {
    for (const auto& o : build_observables(cfg)) o.validate(spec);
  } catch (const Error& e) {
    throw ConfigError(source, obs_line, std::string("output.observables: ") + e.what());
  }
  try {
    build_sampler(cfg, spec).validate(spec.layout);
  } catch (const Error& e) {
    throw ConfigError(source, 1, std::string("sampler: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

toml::array to_array(const std::vector<double>& v) {
  toml::array arr;
  for (double x : v) arr.push_back(x);
  return arr;
}

toml::table model_table(const RunConfig& cfg) {
  toml::table t;
  t.insert("name", cfg.model);
  std::visit(
      [&t](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DrivenSpinParams>) {
          t.insert("omega", p.omega);
          t.insert("gamma_down", p.gamma_down);
          t.insert("gamma_up", p.gamma_up);
          t.insert("spin_size", p.spin_size);
          t.insert("rescale_decay", p.rescale_decay);
        } else if constexpr (std::is_same_v<P, TavisCummingsParams>) {
          t.insert("n", static_cast<std::int64_t>(p.n));
          t.insert("omega", p.omega);
          t.insert("epsilon", p.epsilon);
          t.insert("g", p.g);
          t.insert("kappa", p.kappa);
          t.insert("gamma_down", p.gamma_down);
          t.insert("gamma_up", p.gamma_up);
        } else if constexpr (std::is_same_v<P, CentralSpinParams>) {
          t.insert("n", static_cast<std::int64_t>(p.n));
          t.insert("omega", p.omega);
          t.insert("epsilon", p.epsilon);
          t.insert("g", p.g);
          t.insert("kappa", p.kappa);
          t.insert("gamma_down", p.gamma_down);
          t.insert("gamma_up", p.gamma_up);
          if (!p.epsilons.empty()) t.insert("epsilons", to_array(p.epsilons));
          if (!p.couplings.empty()) t.insert("couplings", to_array(p.couplings));
          if (!p.losses.empty()) t.insert("losses", to_array(p.losses));
        } else if constexpr (std::is_same_v<P, RydbergChainParams>) {
          t.insert("n", static_cast<std::int64_t>(p.n));
          t.insert("omega", p.omega);
          t.insert("j", p.j);
          t.insert("kappa", p.kappa);
          t.insert("gamma_down", p.gamma_down);
        } else {
          t.insert("n", static_cast<std::int64_t>(p.n));
          t.insert("spacing", p.spacing);
          t.insert("wavelength", p.wavelength);
          const Eigen::Vector3d d = p.dipole.real();
          t.insert("dipole", to_array({d(0), d(1), d(2)}));
          t.insert("omega_z", p.omega_z);
          t.insert("omega", p.omega);
          t.insert("gamma0", p.gamma0);
        }
      },
      cfg.params);
  return t;
}

}  // namespace

std::string to_toml(const RunConfig& cfg) {
  toml::table root;
  root.insert("model", model_table(cfg));

  toml::table sampler;
  sampler.insert("scheme", to_string(cfg.sampler.scheme));
  if (cfg.sampler.direction) {
    const auto& d = *cfg.sampler.direction;
    sampler.insert("direction", to_array({d(0), d(1), d(2)}));
  }
  sampler.insert("boson_amplitude",
                 to_array({cfg.sampler.boson_amplitude.real(), cfg.sampler.boson_amplitude.imag()}));
  root.insert("sampler", sampler);

  toml::table integ;
  integ.insert("dt", cfg.integrator.dt);
  integ.insert("t_final", cfg.integrator.t_final);
  integ.insert("fixed_point_iters", static_cast<std::int64_t>(cfg.integrator.fixed_point_iters));
  integ.insert("fixed_point_tol", cfg.integrator.fixed_point_tol);
  integ.insert("output_stride", static_cast<std::int64_t>(cfg.integrator.output_stride));
  root.insert("integrator", integ);

  toml::table ens;
  ens.insert("n_total", static_cast<std::int64_t>(cfg.ensemble.n_total));
  ens.insert("n_initial", static_cast<std::int64_t>(cfg.ensemble.n_initial));
  ens.insert("seed", static_cast<std::int64_t>(cfg.ensemble.seed));
  ens.insert("threads", static_cast<std::int64_t>(cfg.ensemble.threads));
  ens.insert("block_size", static_cast<std::int64_t>(cfg.ensemble.block_size));
  ens.insert("max_failure_fraction", cfg.ensemble.max_failure_fraction);
  root.insert("ensemble", ens);

  toml::table orc;
  orc.insert("cutoff", static_cast<std::int64_t>(cfg.oracle.cutoff));
  orc.insert("dt", cfg.oracle.dt);
  root.insert("oracle", orc);

  toml::table out;
  out.insert("prefix", cfg.prefix);
  out.insert("engine", to_string(cfg.engine));
  toml::array obs;
  for (const auto& o : cfg.observables) obs.push_back(o);
  out.insert("observables", obs);
  root.insert("output", out);

  std::ostringstream ss;
  ss << root << '\n';
  return ss.str();
}

ModelSpec build_model(const RunConfig& cfg) {
  return std::visit(
      [](const auto& p) -> ModelSpec {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DrivenSpinParams>) return build_driven_spin(p);
        else if constexpr (std::is_same_v<P, TavisCummingsParams>) return build_tavis_cummings(p);
        else if constexpr (std::is_same_v<P, CentralSpinParams>) return build_central_spin(p);
        else if constexpr (std::is_same_v<P, RydbergChainParams>) return build_rydberg_chain(p);
        else return build_atom_array(p);
      },
      cfg.params);
}

SamplerSpec build_sampler(const RunConfig& cfg, const ModelSpec& spec) {
  const auto scheme = cfg.sampler.scheme;
  std::vector<Complex> bosons(spec.layout.n_bosons, cfg.sampler.boson_amplitude);
  if (cfg.sampler.direction) return SamplerSpec::uniform(spec.layout, scheme, *cfg.sampler.direction, bosons);
  if (const auto* p = std::get_if<CentralSpinParams>(&cfg.params)) {
    auto s = central_spin_initial(*p, scheme);
    s.bosons = bosons;
    return s;
  }
  const bool up = std::holds_alternative<TavisCummingsParams>(cfg.params) ||
                  std::holds_alternative<AtomArrayParams>(cfg.params);
  const Eigen::Vector3d dir = up ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d(-Eigen::Vector3d::UnitZ());
  return SamplerSpec::uniform(spec.layout, scheme, dir, bosons);
}

std::vector<std::string> default_observables(const std::string& model) {
  if (model == "driven_spin") return {"sz[0]"};
  if (model == "tavis_cummings") return {"n_photon[0]", "mean_sz"};
  if (model == "central_spin") return {"central_population"};
  if (model == "rydberg_chain") return {"mean_sz"};
  return {"emission_rate", "mean_excitation"};
}

namespace {

// "s<axis>[<site>]"
bool parse_spin_ref(const std::string& text, std::size_t& site, Axis& axis) {
  if (text.size() < 5 || text[0] != 's' || text[2] != '[' || text.back() != ']') return false;
  const char a = text[1];
  if (a != 'x' && a != 'y' && a != 'z') return false;
  const std::string digits = text.substr(3, text.size() - 4);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return false;
  }
  axis = parse_axis(a);
  site = std::stoul(digits);
  return true;
}

}  // namespace

ObservableSpec parse_observable(const std::string& text) {
  if (text == "central_population") return ObservableSpec::central_population();
  if (text == "emission_rate") return ObservableSpec::emission_rate();
  if (text == "mean_excitation") return ObservableSpec::mean_excitation();
  if (text == "mean_sx") return ObservableSpec::mean_spin(Axis::X);
  if (text == "mean_sy") return ObservableSpec::mean_spin(Axis::Y);
  if (text == "mean_sz") return ObservableSpec::mean_spin(Axis::Z);
  if (text.rfind("n_photon[", 0) == 0 && text.back() == ']') {
    const std::string digits = text.substr(9, text.size() - 10);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return ObservableSpec::photon_number(std::stoul(digits));
    }
  }
  std::size_t site = 0, site2 = 0;
  Axis axis{}, axis2{};
  const auto star = text.find('*');
  if (star == std::string::npos) {
    if (parse_spin_ref(text, site, axis)) return ObservableSpec::spin(site, axis);
  } else if (parse_spin_ref(text.substr(0, star), site, axis) &&
             parse_spin_ref(text.substr(star + 1), site2, axis2)) {
    return ObservableSpec::two_point(site, axis, site2, axis2);
  }
  throw InvalidParameter("unknown observable '" + text + "'");
}

std::vector<ObservableSpec> build_observables(const RunConfig& cfg) {
  std::vector<ObservableSpec> out;
  for (const auto& o : cfg.observables) out.push_back(parse_observable(o));
  return out;
}

}  // namespace twa::cli
