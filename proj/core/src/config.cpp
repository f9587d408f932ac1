#include "incaapa/config.hpp"

#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "incaapa/errors.hpp"
#include "incaapa/random.hpp"

namespace incaapa {

using nlohmann::json;

namespace {

json complex_vector_to_json(const CVector& v) {
  json out = json::array();
  for (const cplx& z : v) {
    if (z.imag() == 0.0) {
      out.push_back(z.real());
    } else {
      out.push_back(json::array({z.real(), z.imag()}));
    }
  }
  return out;
}

CVector complex_vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
  CVector out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    if (e.is_number()) {
      out[static_cast<Eigen::Index>(i)] = {e.get<double>(), 0.0};
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() &&
               e[1].is_number()) {
      out[static_cast<Eigen::Index>(i)] = {e[0].get<double>(), e[1].get<double>()};
    } else {
      throw ConfigError(std::string(what) +
                        " entries must be numbers or [re, im] pairs");
    }
  }
  return out;
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    try {
      target = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  auto it = j.find(key);
  if (it == j.end()) return empty;
  if (!it->is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return *it;
}

}  // namespace

ExperimentConfig ExperimentConfig::reference_baseline() { return {}; }

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  ExperimentConfig c = reference_baseline();
  if (!j.contains("schema_version")) {
    throw ConfigError("config is missing 'schema_version'");
  }
  read(j, "schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " +
                      std::to_string(c.schema_version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }

  const json& net = section(j, "network");
  read(net, "nodes", c.nodes);
  read(net, "filter_length", c.filter_length);
  read(net, "projection_order", c.projection_order);
  read(net, "regularization", c.regularization);
  if (auto it = net.find("ring_order"); it != net.end()) {
    std::vector<std::size_t> one_based;
    read(net, "ring_order", one_based);
    c.ring_order.clear();
    for (std::size_t k : one_based) {
      if (k == 0) throw ConfigError("ring_order uses 1-based node labels");
      c.ring_order.push_back(k - 1);
    }
  }
  if (net.contains("step_size") && net.contains("step_sizes")) {
    throw ConfigError("give either 'step_size' or 'step_sizes', not both");
  }
  if (net.contains("step_size")) {
    double mu = 0.0;
    read(net, "step_size", mu);
    c.step_sizes = {mu};
  }
  read(net, "step_sizes", c.step_sizes);
  if (auto it = net.find("h_true"); it != net.end()) {
    c.h_true = complex_vector_from_json(*it, "h_true");
  }
  if (auto it = net.find("g_true"); it != net.end()) {
    c.g_true = complex_vector_from_json(*it, "g_true");
  }
  const json& noise = section(net, "noise");
  if (noise.contains("variances")) {
    std::vector<double> v;
    read(noise, "variances", v);
    c.noise.variances = std::move(v);
  }
  read(noise, "min", c.noise.min);
  read(noise, "max", c.noise.max);
  if (noise.contains("seed")) {
    std::uint64_t s = 0;
    read(noise, "seed", s);
    c.noise.seed = s;
  }

  const json& sig = section(j, "signals");
  if (auto it = sig.find("models"); it != sig.end()) {
    if (!it->is_array()) throw ConfigError("signals.models must be an array");
    c.models.clear();
    for (const auto& m : *it) {
      if (!m.is_string()) throw ConfigError("signals.models entries must be strings");
      c.models.push_back(parse_signal_kind(m.get<std::string>()));
    }
  }
  const json& ar1 = section(sig, "circular_ar1");
  read(ar1, "coefficient", c.ar1.coefficient);
  read(ar1, "burn_in", c.burn_in_ar1);
  const json& arma = section(sig, "noncircular_arma");
  read(arma, "ar", c.arma.ar);
  read(arma, "q0", c.arma.q0);
  read(arma, "q0_conj", c.arma.q0_conj);
  read(arma, "q1", c.arma.q1);
  read(arma, "q1_conj", c.arma.q1_conj);
  read(arma, "burn_in", c.burn_in_arma);
  const json& ik = section(sig, "ikeda");
  read(ik, "gain", c.ikeda.gain);
  read(ik, "offset", c.ikeda.offset);
  read(ik, "scale", c.ikeda.scale);
  read(ik, "burn_in", c.burn_in_ikeda);

  const json& ex = section(j, "experiment");
  read(ex, "horizon", c.horizon);
  read(ex, "trials", c.trials);
  read(ex, "seed", c.seed);
  if (ex.contains("warmup")) {
    std::size_t w = 0;
    read(ex, "warmup", w);
    c.warmup = w;
  }
  read(ex, "noncooperative", c.run_noncooperative);
  read(ex, "threads", c.threads);
  read(ex, "t_values", c.t_values);
  read(ex, "mu_values", c.mu_values);
  if (ex.contains("output_dir")) {
    std::string dir;
    read(ex, "output_dir", dir);
    c.output_dir = dir;
  }
  const json& conv = section(ex, "convergence");
  read(conv, "average_window", c.convergence.average_window);
  read(conv, "lag", c.convergence.lag);
  read(conv, "tolerance_db", c.convergence.tolerance_db);
  read(conv, "steady_window", c.convergence.steady_window);
  read(conv, "speed_margin_db", c.convergence.speed_margin_db);

  const json& th = section(j, "theory");
  read(th, "enabled", c.run_theory);
  read(th, "moment_samples", c.moment_samples);
  read(th, "moment_burn_in", c.moment_burn_in);
  if (th.contains("coupling")) {
    std::string s;
    read(th, "coupling", s);
    if (s == "full") {
      c.theory.coupling = Coupling::Full;
    } else if (s == "decoupled") {
      c.theory.coupling = Coupling::Decoupled;
    } else {
      throw ConfigError("theory.coupling must be 'full' or 'decoupled'");
    }
  }
  if (th.contains("noise_term")) {
    std::string s;
    read(th, "noise_term", s);
    if (s == "consistent") {
      c.theory.noise_term = NoiseTermForm::Consistent;
    } else if (s == "projection_squared") {
      c.theory.noise_term = NoiseTermForm::ProjectionSquared;
    } else {
      throw ConfigError("theory.noise_term must be 'consistent' or 'projection_squared'");
    }
  }

  const json& st = section(j, "stability");
  read(st, "factors", c.stability.factors);
  read(st, "seeds", c.stability.seeds);
  read(st, "horizon", c.stability.horizon);
  read(st, "divergence_ratio", c.stability.divergence_ratio);

  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json net;
  net["nodes"] = nodes;
  net["filter_length"] = filter_length;
  net["projection_order"] = projection_order;
  net["regularization"] = regularization;
  std::vector<std::size_t> one_based;
  for (std::size_t k : ring_order) one_based.push_back(k + 1);
  if (!one_based.empty()) net["ring_order"] = one_based;
  net["step_sizes"] = step_sizes;
  if (h_true.size() > 0) net["h_true"] = complex_vector_to_json(h_true);
  if (g_true.size() > 0) net["g_true"] = complex_vector_to_json(g_true);
  json noise;
  if (this->noise.variances) noise["variances"] = *this->noise.variances;
  noise["min"] = this->noise.min;
  noise["max"] = this->noise.max;
  if (this->noise.seed) noise["seed"] = *this->noise.seed;
  net["noise"] = noise;

  json sig;
  std::vector<std::string> names;
  for (SignalKind k : models) names.emplace_back(to_string(k));
  sig["models"] = names;
  sig["circular_ar1"] = {{"coefficient", ar1.coefficient}, {"burn_in", burn_in_ar1}};
  sig["noncircular_arma"] = {{"ar", arma.ar},           {"q0", arma.q0},
                             {"q0_conj", arma.q0_conj}, {"q1", arma.q1},
                             {"q1_conj", arma.q1_conj}, {"burn_in", burn_in_arma}};
  sig["ikeda"] = {{"gain", ikeda.gain},
                  {"offset", ikeda.offset},
                  {"scale", ikeda.scale},
                  {"burn_in", burn_in_ikeda}};

  json ex;
  ex["horizon"] = horizon;
  ex["trials"] = trials;
  ex["seed"] = seed;
  if (warmup) ex["warmup"] = *warmup;
  ex["noncooperative"] = run_noncooperative;
  ex["t_values"] = t_values;
  ex["mu_values"] = mu_values;
  ex["convergence"] = {{"average_window", convergence.average_window},
                       {"lag", convergence.lag},
                       {"tolerance_db", convergence.tolerance_db},
                       {"steady_window", convergence.steady_window},
                       {"speed_margin_db", convergence.speed_margin_db}};

  json th;
  th["enabled"] = run_theory;
  th["moment_samples"] = moment_samples;
  th["moment_burn_in"] = moment_burn_in;
  th["coupling"] = theory.coupling == Coupling::Full ? "full" : "decoupled";
  th["noise_term"] =
      theory.noise_term == NoiseTermForm::Consistent ? "consistent" : "projection_squared";

  json st;
  st["factors"] = stability.factors;
  st["seeds"] = stability.seeds;
  st["horizon"] = stability.horizon;
  st["divergence_ratio"] = stability.divergence_ratio;

  // output_dir and threads do not change results and stay out of the hash.
  return json{{"schema_version", schema_version},
              {"network", net},
              {"signals", sig},
              {"experiment", ex},
              {"theory", th},
              {"stability", st}};
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ExperimentConfig::hash() const {
  return fnv1a64(to_json().dump());
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (models.empty()) throw ConfigError("at least one signal model is required");
  if (step_sizes.size() != 1 && step_sizes.size() != nodes) {
    throw ConfigError("step_sizes must hold one value or one per node");
  }
  if (noise.variances && noise.variances->size() != nodes) {
    throw ConfigError("noise.variances must hold one value per node");
  }
  if (!noise.variances && !(noise.min > 0.0 && noise.max >= noise.min)) {
    throw ConfigError("noise bounds must satisfy 0 < min <= max");
  }
  for (std::size_t t : t_values) {
    if (t < 1) throw ConfigError("t_values must all be >= 1");
  }
  if (run_theory && moment_samples == 0) {
    throw ConfigError("theory.moment_samples must be > 0");
  }
  if (convergence.steady_window < 1 || convergence.average_window < 1) {
    throw ConfigError("convergence windows must be >= 1");
  }
  network_for(models.front()).validate();
}

std::size_t ExperimentConfig::warmup_cycles() const {
  return warmup.value_or(filter_length + projection_order);
}

std::vector<double> ExperimentConfig::noise_variances() const {
  if (noise.variances) return *noise.variances;
  const std::uint64_t s = noise.seed.value_or(derive_seed(seed, streams::kProfile));
  return NoiseProfile::log_uniform(nodes, noise.min, noise.max, s).variances;
}

NetworkConfig ExperimentConfig::network_for(SignalKind kind) const {
  NetworkConfig net;
  net.nodes = nodes;
  net.filter_length = filter_length;
  net.projection_order = projection_order;
  net.ring_order = ring_order;
  if (net.ring_order.empty()) {
    net.ring_order.resize(nodes);
    std::iota(net.ring_order.begin(), net.ring_order.end(), 0);
  }
  SignalModel model = SignalModel::with_defaults(kind);
  model.ar1 = ar1;
  model.arma = arma;
  model.ikeda = ikeda;
  switch (kind) {
    case SignalKind::CircularAR1:
      model.burn_in = burn_in_ar1;
      break;
    case SignalKind::NoncircularARMA:
      model.burn_in = burn_in_arma;
      break;
    case SignalKind::IkedaMap:
      model.burn_in = burn_in_ikeda;
      break;
  }
  net.signals.assign(nodes, model);
  net.noise.variances = noise_variances();
  net.noise.seed = noise.seed.value_or(derive_seed(seed, streams::kProfile));
  const auto L = static_cast<Eigen::Index>(filter_length);
  net.h_true = h_true.size() > 0 ? h_true : CVector::Ones(L);
  net.g_true = g_true.size() > 0 ? g_true : CVector::Ones(L);
  if (step_sizes.size() == 1) {
    net.step_sizes.assign(nodes, step_sizes.front());
  } else {
    net.step_sizes = step_sizes;
  }
  net.regularization = regularization;
  return net;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

}  // namespace incaapa
