#include "rmlr/bench/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>
#include <thread>

#include <nlohmann/json.hpp>

#include "rmlr/errors.hpp"
#include "rmlr/robust_pca.hpp"

namespace rmlr::bench {

using nlohmann::json;

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::subspace: return "subspace";
    case Experiment::pipeline: return "pipeline";
    case Experiment::moments: return "moments";
  }
  return "unknown";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::double_filter: return "double_filter";
    case Method::hrpca: return "hrpca";
    case Method::oracle: return "oracle";
  }
  return "unknown";
}

MetaParameter ModelSpec::build() const {
  const Vector s = noise.empty() ? Vector::Ones(k) : Eigen::Map<const Vector>(noise.data(), static_cast<Eigen::Index>(noise.size())).eval();
  const Vector p = weights.empty() ? Vector::Constant(k, 1.0 / k)
                                   : Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size())).eval();
  // k = 1 has no pairwise distance; there `separation` is |w_1|.
  const double sep = k == 1 ? separation * std::sqrt(2.0) : separation;
  return orthogonal_preset(d, k, sep, s, p, frame_seed);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

int get_int(const json& obj, const std::string& path, const char* key, int fallback, int min_value) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  const auto value = v.get<long long>();
  if (value < min_value || value > 2147483647LL) fail(join(path, key), "must be at least " + std::to_string(min_value));
  return static_cast<int>(value);
}

double get_double(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  const double value = v.get<double>();
  if (!std::isfinite(value)) fail(join(path, key), "must be finite");
  return value;
}

std::optional<double> get_optional_double(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_double(obj, path, key, 0.0);
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) fail(join(path, key), "expected a boolean");
  return obj.at(key).get<bool>();
}

std::vector<double> get_doubles(const json& obj, const std::string& path, const char* key,
                                const std::vector<double>& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(join(path, key), "expected an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) fail(join(path, key), "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ModelSpec parse_model(const json& obj, const std::string& path, ModelSpec m) {
  check_keys(obj, path, {"d", "k", "separation", "noise", "weights", "frame_seed"});
  m.d = get_int(obj, path, "d", m.d, 1);
  m.k = get_int(obj, path, "k", m.k, 1);
  if (m.k > m.d) fail(join(path, "k"), "must not exceed d");
  m.separation = get_double(obj, path, "separation", m.separation);
  if (!(m.separation > 0.0)) fail(join(path, "separation"), "must be positive");
  m.noise = get_doubles(obj, path, "noise", m.noise);
  m.weights = get_doubles(obj, path, "weights", m.weights);
  if (obj.contains("frame_seed")) {
    if (!obj.at("frame_seed").is_number_unsigned()) fail(join(path, "frame_seed"), "expected a non-negative integer");
    m.frame_seed = obj.at("frame_seed").get<std::uint64_t>();
  }
  if (!m.noise.empty() && static_cast<int>(m.noise.size()) != m.k) fail(join(path, "noise"), "needs k entries");
  if (!m.weights.empty() && static_cast<int>(m.weights.size()) != m.k) fail(join(path, "weights"), "needs k entries");
  for (double s : m.noise) {
    if (!(s > 0.0)) fail(join(path, "noise"), "entries must be positive");
  }
  double total = 0.0;
  for (double p : m.weights) {
    if (!(p > 0.0)) fail(join(path, "weights"), "entries must be positive");
    total += p;
  }
  if (!m.weights.empty() && std::abs(total - 1.0) > 1e-12) fail(join(path, "weights"), "must sum to 1");
  return m;
}

SplitAdversarySpec parse_adversary(const json& obj, const std::string& path) {
  check_keys(obj, path, {"strategy", "alpha"});
  SplitAdversarySpec out;
  if (obj.contains("strategy")) {
    if (!obj.at("strategy").is_string()) fail(join(path, "strategy"), "expected a string");
    try {
      out.strategy = strategy_from_string(obj.at("strategy").get<std::string>());
    } catch (const std::invalid_argument&) {
      fail(join(path, "strategy"), "unknown strategy '" + obj.at("strategy").get<std::string>() + "'");
    }
  }
  out.alpha = get_optional_double(obj, path, "alpha");
  if (out.alpha && (*out.alpha < 0.0 || *out.alpha >= 0.25)) fail(join(path, "alpha"), "must be in [0, 1/4)");
  return out;
}

void parse_subspace(const json& obj, SubspaceSpec& s) {
  const std::string path = "subspace";
  check_keys(obj, path, {"d", "k", "n", "delta", "nu"});
  s.d = get_int(obj, path, "d", s.d, 3);
  s.k = get_int(obj, path, "k", s.k, 1);
  if (s.k > s.d) fail("subspace.k", "must not exceed d");
  s.n = get_int(obj, path, "n", s.n, 2);
  s.delta = get_double(obj, path, "delta", s.delta);
  if (!(s.delta > 0.0 && s.delta < 0.5)) fail("subspace.delta", "must be in (0, 1/2)");
  s.nu = get_optional_double(obj, path, "nu");
  if (s.nu && !(*s.nu > 0.0)) fail("subspace.nu", "must be positive");
}

void parse_pipeline(const json& obj, PipelineSpec& p) {
  const std::string path = "pipeline";
  check_keys(obj, path, {"model", "sizes", "light1", "heavy", "light2", "delta", "boosts", "nu", "prediction_tau",
                         "prediction_trials"});
  if (obj.contains("model")) p.model = parse_model(obj.at("model"), "pipeline.model", p.model);
  if (obj.contains("sizes")) {
    const json& s = obj.at("sizes");
    const std::string sp = "pipeline.sizes";
    check_keys(s, sp, {"n_light1", "t_light1", "n_heavy", "t_heavy", "n_light2", "t_light2"});
    p.sizes.n_light1 = get_int(s, sp, "n_light1", p.sizes.n_light1, 0);
    p.sizes.t_light1 = get_int(s, sp, "t_light1", p.sizes.t_light1, 1);
    p.sizes.n_heavy = get_int(s, sp, "n_heavy", p.sizes.n_heavy, 0);
    p.sizes.t_heavy = get_int(s, sp, "t_heavy", p.sizes.t_heavy, 1);
    p.sizes.n_light2 = get_int(s, sp, "n_light2", p.sizes.n_light2, 0);
    p.sizes.t_light2 = get_int(s, sp, "t_light2", p.sizes.t_light2, 1);
  }
  if (obj.contains("light1")) p.light1 = parse_adversary(obj.at("light1"), "pipeline.light1");
  if (obj.contains("heavy")) p.heavy = parse_adversary(obj.at("heavy"), "pipeline.heavy");
  if (obj.contains("light2")) p.light2 = parse_adversary(obj.at("light2"), "pipeline.light2");
  p.delta = get_double(obj, path, "delta", p.delta);
  if (!(p.delta > 0.0 && p.delta < 0.5)) fail("pipeline.delta", "must be in (0, 1/2)");
  p.boosts = get_int(obj, path, "boosts", p.boosts, 1);
  p.nu = get_optional_double(obj, path, "nu");
  if (p.nu && !(*p.nu > 0.0)) fail("pipeline.nu", "must be positive");
  p.prediction_tau = get_int(obj, path, "prediction_tau", p.prediction_tau, 0);
  p.prediction_trials = get_int(obj, path, "prediction_trials", p.prediction_trials, 1);
}

void parse_moments(const json& obj, MomentsSpec& m) {
  const std::string path = "moments";
  check_keys(obj, path, {"model", "t", "n", "m_max", "directions", "bound_m_t", "bound_m_d", "replicates"});
  if (obj.contains("model")) m.model = parse_model(obj.at("model"), "moments.model", m.model);
  m.t = get_int(obj, path, "t", m.t, 1);
  m.n = get_int(obj, path, "n", m.n, 1);
  m.m_max = get_int(obj, path, "m_max", m.m_max, 1);
  if (m.t < 2 * m.m_max) fail("moments.t", "must be at least 2 * m_max");
  m.directions = get_int(obj, path, "directions", m.directions, 1);
  m.bound_m_t = get_int(obj, path, "bound_m_t", m.bound_m_t, 1);
  m.bound_m_d = get_int(obj, path, "bound_m_d", m.bound_m_d, 1);
  m.replicates = get_int(obj, path, "replicates", m.replicates, 2);
}

json model_json(const ModelSpec& m) {
  return json{{"d", m.d}, {"k", m.k}, {"separation", m.separation}, {"noise", m.noise}, {"weights", m.weights},
              {"frame_seed", m.frame_seed}};
}

json adversary_json(const SplitAdversarySpec& a) {
  json out{{"strategy", to_string(a.strategy)}};
  out["alpha"] = a.alpha ? json(*a.alpha) : json(nullptr);
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, "", {"experiment", "alphas", "methods", "seeds", "master_seed", "threads", "plots", "timing",
                       "output", "subspace", "pipeline", "moments"});
  ExperimentConfig cfg;
  if (!doc.contains("experiment") || !doc.at("experiment").is_string()) fail("experiment", "required string");
  const auto experiment = doc.at("experiment").get<std::string>();
  if (experiment == "subspace") {
    cfg.experiment = Experiment::subspace;
  } else if (experiment == "pipeline") {
    cfg.experiment = Experiment::pipeline;
  } else if (experiment == "moments") {
    cfg.experiment = Experiment::moments;
  } else {
    fail("experiment", "unknown experiment '" + experiment + "'");
  }

  cfg.alphas = get_doubles(doc, "", "alphas", cfg.alphas);
  if (cfg.alphas.empty()) fail("alphas", "must not be empty");
  for (double& a : cfg.alphas) {
    if (!(a >= 0.0)) fail("alphas", "values must be non-negative");
    if (a > kMaxFilterAlpha) {
      cfg.warnings.push_back("alpha " + std::to_string(a) + " clamped to 1/36");
      a = kMaxFilterAlpha;
    }
  }
  if (doc.contains("methods")) {
    const json& m = doc.at("methods");
    if (!m.is_array() || m.empty()) fail("methods", "expected a non-empty array of method names");
    cfg.methods.clear();
    for (const json& e : m) {
      const std::string name = e.is_string() ? e.get<std::string>() : std::string();
      if (name == "double_filter") {
        cfg.methods.push_back(Method::double_filter);
      } else if (name == "hrpca") {
        cfg.methods.push_back(Method::hrpca);
      } else if (name == "oracle") {
        cfg.methods.push_back(Method::oracle);
      } else {
        fail("methods", "unknown method '" + name + "'");
      }
    }
  }
  cfg.seeds = get_int(doc, "", "seeds", cfg.seeds, 1);
  if (doc.contains("master_seed")) {
    if (!doc.at("master_seed").is_number_unsigned()) fail("master_seed", "expected a non-negative integer");
    cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
  }
  cfg.threads = get_int(doc, "", "threads", default_thread_count(), 0);
  cfg.plots = get_bool(doc, "", "plots", cfg.plots);
  cfg.timing = get_bool(doc, "", "timing", cfg.timing);
  if (doc.contains("output")) {
    if (!doc.at("output").is_string()) fail("output", "expected a string");
    cfg.output = doc.at("output").get<std::string>();
  }
  if (doc.contains("subspace")) parse_subspace(doc.at("subspace"), cfg.subspace);
  if (doc.contains("pipeline")) parse_pipeline(doc.at("pipeline"), cfg.pipeline);
  if (doc.contains("moments")) parse_moments(doc.at("moments"), cfg.moments);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  json doc{{"experiment", to_string(cfg.experiment)},
           {"alphas", cfg.alphas},
           {"methods", methods},
           {"seeds", cfg.seeds},
           {"master_seed", cfg.master_seed},
           {"threads", cfg.threads},
           {"plots", cfg.plots},
           {"timing", cfg.timing},
           {"output", cfg.output.string()}};
  json sub{{"d", cfg.subspace.d}, {"k", cfg.subspace.k}, {"n", cfg.subspace.n}, {"delta", cfg.subspace.delta}};
  sub["nu"] = cfg.subspace.nu ? json(*cfg.subspace.nu) : json(nullptr);
  doc["subspace"] = sub;
  const PipelineSpec& p = cfg.pipeline;
  json pipe{{"model", model_json(p.model)},
            {"sizes",
             {{"n_light1", p.sizes.n_light1},
              {"t_light1", p.sizes.t_light1},
              {"n_heavy", p.sizes.n_heavy},
              {"t_heavy", p.sizes.t_heavy},
              {"n_light2", p.sizes.n_light2},
              {"t_light2", p.sizes.t_light2}}},
            {"light1", adversary_json(p.light1)},
            {"heavy", adversary_json(p.heavy)},
            {"light2", adversary_json(p.light2)},
            {"delta", p.delta},
            {"boosts", p.boosts},
            {"prediction_tau", p.prediction_tau},
            {"prediction_trials", p.prediction_trials}};
  pipe["nu"] = p.nu ? json(*p.nu) : json(nullptr);
  doc["pipeline"] = pipe;
  const MomentsSpec& m = cfg.moments;
  doc["moments"] = json{{"model", model_json(m.model)}, {"t", m.t},
                        {"n", m.n},                     {"m_max", m.m_max},
                        {"directions", m.directions},   {"bound_m_t", m.bound_m_t},
                        {"bound_m_d", m.bound_m_d},     {"replicates", m.replicates}};
  return doc.dump(2);
}

int default_thread_count() {
  const char* env = std::getenv("RMLR_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (*end != '\0' || value < 0 || value > 4096) throw ConfigError("RMLR_THREADS must be a non-negative integer");
  return static_cast<int>(value);
}

int resolve_threads(int requested) {
  if (requested < 0) throw ConfigError("threads must be non-negative");
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

}  // namespace rmlr::bench
