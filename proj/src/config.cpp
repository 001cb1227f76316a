#include "sdwave/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sdwave {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// Tracks consumed keys of one JSON object so finish() can reject strays with
// their full path.
class Cursor {
 public:
  Cursor(const json& node, std::string path)
      : node_(&node), path_(std::move(path)) {
    if (!node.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string sub(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  bool has(const std::string& key) const { return node_->contains(key); }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_->at(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(sub(key), "expected a number");
    return v.get<double>();
  }
  int integer(const std::string& key, int def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(sub(key), "expected an integer");
    return v.get<int>();
  }
  std::uint64_t unsigned64(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
      throw ConfigError(sub(key), "expected a non-negative integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
      throw ConfigError(sub(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(sub(key), "expected a boolean");
    return v.get<bool>();
  }
  std::string text(const std::string& key, std::string def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(sub(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> number_list(const std::string& key,
                                  std::vector<double> def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(sub(key), "expected an array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number())
        throw ConfigError(sub(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<std::string> text_list(const std::string& key,
                                     std::vector<std::string> def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(sub(key), "expected an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string())
        throw ConfigError(sub(key), "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (const auto& item : node_->items())
      if (!seen_.count(item.key()))
        throw ConfigError(sub(item.key()), "unknown key");
  }

 private:
  const json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

Cx parse_complex(const json& v, const std::string& path) {
  if (v.is_number()) return Cx(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Cx(v[0].get<double>(), v[1].get<double>());
  throw ConfigError(path, "expected a number or a [re, im] pair");
}

Eigen::MatrixXd parse_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw ConfigError(path, "expected a non-empty 2d array");
  const auto rows = v.size();
  std::size_t cols = 0;
  Eigen::MatrixXd m;
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = v[i];
    if (!row.is_array() || row.empty())
      throw ConfigError(path, "expected a non-empty 2d array");
    if (i == 0) {
      cols = row.size();
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      throw ConfigError(path, "rows must have equal length");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!row[j].is_number()) throw ConfigError(path, "expected numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          row[j].get<double>();
    }
  }
  return m;
}

void parse_scenario(const json& node, const std::string& path,
                    WaveScenario& sc) {
  Cursor c(node, path);
  const std::string preset = c.text("preset", "wave");
  if (preset != "wave")
    throw ConfigError(c.sub("preset"), "unknown preset '" + preset + "'");
  sc.modes = c.integer("modes", sc.modes);
  sc.alpha = c.number("alpha", sc.alpha);
  sc.c1 = c.number("c1", sc.c1);
  sc.c2 = c.number("c2", sc.c2);
  sc.beta = c.number("beta", sc.beta);
  c.finish();
  if (sc.modes < 1) throw ConfigError(path + ".modes", "must be positive");
  if (!(sc.alpha > 0)) throw ConfigError(path + ".alpha", "must be positive");
}

void parse_operator(const json& node, const std::string& path,
                    OperatorConfig& op) {
  Cursor c(node, path);
  op.eigenvalues = c.text("eigenvalues", op.eigenvalues);
  if (op.eigenvalues != "dirichlet" && op.eigenvalues != "explicit")
    throw ConfigError(c.sub("eigenvalues"),
                      "expected 'dirichlet' or 'explicit'");
  op.modes = c.integer("modes", op.modes);
  if (op.modes < 1) throw ConfigError(c.sub("modes"), "must be positive");
  if (c.has("explicit_eigenvalues")) {
    op.explicit_lambdas = c.number_list("explicit_eigenvalues", {});
    for (double l : op.explicit_lambdas)
      if (!(l > 0))
        throw ConfigError(c.sub("explicit_eigenvalues"),
                          "eigenvalues must be positive");
  }
  if (op.eigenvalues == "explicit" && op.explicit_lambdas.empty())
    throw ConfigError(c.sub("explicit_eigenvalues"),
                      "required for the explicit rule");
  if (c.has("damping")) {
    Cursor d(c.raw("damping"), c.sub("damping"));
    op.damping_kind = d.text("kind", op.damping_kind);
    if (op.damping_kind == "scalar") {
      if (d.has("beta")) op.beta = parse_complex(d.raw("beta"), d.sub("beta"));
    } else if (op.damping_kind == "diagonal") {
      if (!d.has("diagonal"))
        throw ConfigError(d.sub("diagonal"), "required for diagonal damping");
      const json& arr = d.raw("diagonal");
      if (!arr.is_array())
        throw ConfigError(d.sub("diagonal"), "expected an array");
      op.diagonal.clear();
      for (const auto& e : arr)
        op.diagonal.push_back(parse_complex(e, d.sub("diagonal")));
    } else if (op.damping_kind == "dense") {
      if (!d.has("dense"))
        throw ConfigError(d.sub("dense"), "required for dense damping");
      op.dense = parse_matrix(d.raw("dense"), d.sub("dense"));
    } else {
      throw ConfigError(d.sub("kind"),
                        "expected 'scalar', 'diagonal', or 'dense'");
    }
    d.finish();
  }
  c.finish();
}

void parse_delay(const json& node, const std::string& path, DelayConfig& dl) {
  Cursor c(node, path);
  dl.horizon = c.number("horizon", dl.horizon);
  auto parse_atoms = [&](const std::string& key,
                         std::vector<AtomConfig>& out) {
    if (!c.has(key)) return;
    const json& arr = c.raw(key);
    if (!arr.is_array()) throw ConfigError(c.sub(key), "expected an array");
    int idx = 0;
    for (const auto& e : arr) {
      const std::string epath = c.sub(key) + "[" + std::to_string(idx++) + "]";
      Cursor a(e, epath);
      AtomConfig atom;
      atom.lag = a.number("lag", 0.0);
      if (!a.has("weight")) throw ConfigError(epath + ".weight", "required");
      atom.weight = parse_matrix(a.raw("weight"), epath + ".weight");
      a.finish();
      out.push_back(std::move(atom));
    }
  };
  parse_atoms("position_atoms", dl.position_atoms);
  parse_atoms("velocity_atoms", dl.velocity_atoms);
  c.finish();
}

void parse_noise(const json& node, const std::string& path, NoiseConfig& ns) {
  Cursor c(node, path);
  ns.wiener_variances = c.number_list("wiener_variances", ns.wiener_variances);
  ns.jump_rate = c.number("jump_rate", ns.jump_rate);
  ns.jump_law = c.text("jump_law", ns.jump_law);
  if (ns.jump_law != "fixed" && ns.jump_law != "sphere" &&
      ns.jump_law != "gaussian" && ns.jump_law != "pareto")
    throw ConfigError(c.sub("jump_law"),
                      "expected 'fixed', 'sphere', 'gaussian', or 'pareto'");
  ns.jump_vector = c.number_list("jump_vector", ns.jump_vector);
  ns.jump_scale = c.number("jump_scale", ns.jump_scale);
  ns.pareto_alpha = c.number("pareto_alpha", ns.pareto_alpha);
  ns.compensate = c.boolean("compensate", ns.compensate);
  c.finish();
}

void parse_diffusion(const json& node, const std::string& path,
                     DiffusionConfig& df) {
  Cursor c(node, path);
  df.type = c.text("type", df.type);
  if (df.type != "additive" && df.type != "saturated_field")
    throw ConfigError(c.sub("type"),
                      "expected 'additive' or 'saturated_field'");
  if (c.has("bottom")) df.bottom = parse_matrix(c.raw("bottom"), c.sub("bottom"));
  df.beta = c.number("beta", df.beta);
  df.alpha1 = c.number("alpha1", df.alpha1);
  df.alpha2 = c.number("alpha2", df.alpha2);
  if (c.has("kappa")) {
    const json& arr = c.raw("kappa");
    if (!arr.is_array()) throw ConfigError(c.sub("kappa"), "expected an array");
    df.kappa.clear();
    int idx = 0;
    for (const auto& e : arr) {
      const std::string epath =
          c.sub("kappa") + "[" + std::to_string(idx++) + "]";
      Cursor a(e, epath);
      KappaAtom ka;
      ka.lag = a.number("lag", 0.0);
      ka.weight = a.number("weight", 0.0);
      a.finish();
      df.kappa.push_back(ka);
    }
  }
  df.lipschitz = c.number("lipschitz", df.lipschitz);
  c.finish();
}

void parse_simulation(const json& node, const std::string& path,
                      SimulationConfig& sim) {
  Cursor c(node, path);
  sim.t_max = c.number("t_max", sim.t_max);
  sim.step = c.number("step", sim.step);
  sim.paths = c.integer("paths", sim.paths);
  sim.master_seed = c.unsigned64("master_seed", sim.master_seed);
  sim.initial_scale = c.number("initial_scale", sim.initial_scale);
  sim.initial_mode = c.integer("initial_mode", sim.initial_mode);
  sim.divergence_norm = c.number("divergence_norm", sim.divergence_norm);
  sim.richardson = c.boolean("richardson", sim.richardson);
  c.finish();
  if (!(sim.t_max > 0)) throw ConfigError(path + ".t_max", "must be positive");
  if (!(sim.step > 0)) throw ConfigError(path + ".step", "must be positive");
  if (sim.paths < 1) throw ConfigError(path + ".paths", "must be positive");
  if (sim.initial_mode < 1)
    throw ConfigError(path + ".initial_mode", "must be positive");
  if (!(sim.divergence_norm > 0))
    throw ConfigError(path + ".divergence_norm", "must be positive");
}

void parse_analysis(const json& node, const std::string& path,
                    AnalysisConfig& an) {
  Cursor c(node, path);
  an.c = c.number("c", an.c);
  an.b_max = c.number("b_max", an.b_max);
  an.grid_points = c.integer("grid_points", an.grid_points);
  an.dictionary_size = c.integer("dictionary_size", an.dictionary_size);
  an.checkpoints = c.number_list("checkpoints", an.checkpoints);
  an.offset = c.number("offset", an.offset);
  an.a_grid = c.number_list("a_grid", an.a_grid);
  c.finish();
  if (!(an.c > 0) || !(an.c < 1))
    throw ConfigError(path + ".c", "must lie in (0, 1)");
  if (!(an.b_max > 0)) throw ConfigError(path + ".b_max", "must be positive");
  if (an.grid_points < 2)
    throw ConfigError(path + ".grid_points", "need at least 2");
  if (an.dictionary_size < 1)
    throw ConfigError(path + ".dictionary_size", "must be positive");
  if (an.checkpoints.empty())
    throw ConfigError(path + ".checkpoints", "must be non-empty");
  for (std::size_t i = 0; i < an.checkpoints.size(); ++i) {
    if (!(an.checkpoints[i] > 0))
      throw ConfigError(path + ".checkpoints", "must be positive");
    if (i > 0 && !(an.checkpoints[i] > an.checkpoints[i - 1]))
      throw ConfigError(path + ".checkpoints", "must ascend");
  }
  if (!(an.offset > 0)) throw ConfigError(path + ".offset", "must be positive");
  if (an.a_grid.empty())
    throw ConfigError(path + ".a_grid", "must be non-empty");
  for (double a : an.a_grid)
    if (!(a < 0))
      throw ConfigError(path + ".a_grid", "entries must be negative");
  std::sort(an.a_grid.begin(), an.a_grid.end());
}

void parse_output(const json& node, const std::string& path,
                  OutputConfig& out) {
  Cursor c(node, path);
  out.directory = c.text("directory", out.directory);
  out.formats = c.text_list("formats", out.formats);
  c.finish();
  if (out.directory.empty())
    throw ConfigError(path + ".directory", "must be non-empty");
  if (out.formats.empty())
    throw ConfigError(path + ".formats", "must be non-empty");
  for (const auto& f : out.formats)
    if (f != "csv" && f != "text")
      throw ConfigError(path + ".formats", "unknown format '" + f + "'");
}

void parse_verify(const json& node, const std::string& path,
                  VerifyConfig& vf) {
  Cursor c(node, path);
  vf.fault = c.text("fault", vf.fault);
  vf.scale = c.text("scale", vf.scale);
  c.finish();
  if (vf.fault != "none" && vf.fault != "perturb_lyapunov")
    throw ConfigError(path + ".fault",
                      "expected 'none' or 'perturb_lyapunov'");
  if (vf.scale != "desk" && vf.scale != "full")
    throw ConfigError(path + ".scale", "expected 'desk' or 'full'");
}

ordered complex_json(Cx z) {
  return ordered::array({z.real(), z.imag()});
}

ordered matrix_json(const Eigen::MatrixXd& m) {
  ordered rows = ordered::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered row = ordered::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config(const std::string& json_text) {
  if (json_text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ConfigError("", "empty config");
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("", "top level must be an object");

  ExperimentConfig cfg;
  Cursor c(root, "");

  const bool has_scenario = c.has("scenario");
  const bool has_operator = c.has("operator");
  if (has_scenario && has_operator)
    throw ConfigError("operator",
                      "mutually exclusive with the scenario preset");
  if (has_scenario && c.has("delay"))
    throw ConfigError("delay", "mutually exclusive with the scenario preset");

  cfg.use_scenario = !has_operator;
  if (has_scenario) parse_scenario(c.raw("scenario"), "scenario", cfg.scenario);
  if (has_operator) {
    parse_operator(c.raw("operator"), "operator", cfg.op);
    if (c.has("delay")) parse_delay(c.raw("delay"), "delay", cfg.delay);
    // Explicit systems default to no noise and a zero additive coefficient.
    cfg.noise.wiener_variances.clear();
  }
  if (c.has("noise")) {
    cfg.noise_overridden = true;
    parse_noise(c.raw("noise"), "noise", cfg.noise);
  }
  if (c.has("diffusion")) {
    cfg.diffusion_overridden = true;
    parse_diffusion(c.raw("diffusion"), "diffusion", cfg.diffusion);
  }
  if (c.has("simulation"))
    parse_simulation(c.raw("simulation"), "simulation", cfg.simulation);
  if (c.has("analysis"))
    parse_analysis(c.raw("analysis"), "analysis", cfg.analysis);
  if (c.has("output")) parse_output(c.raw("output"), "output", cfg.output);
  if (c.has("verify")) parse_verify(c.raw("verify"), "verify", cfg.verify);
  c.finish();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config_json(const ExperimentConfig& cfg) {
  ordered root;
  root["mode"] = cfg.use_scenario ? "scenario" : "explicit";
  if (cfg.use_scenario) {
    ordered sc;
    sc["preset"] = "wave";
    sc["modes"] = cfg.scenario.modes;
    sc["alpha"] = cfg.scenario.alpha;
    sc["c1"] = cfg.scenario.c1;
    sc["c2"] = cfg.scenario.c2;
    sc["beta"] = cfg.scenario.beta;
    root["scenario"] = std::move(sc);
  } else {
    ordered op;
    op["eigenvalues"] = cfg.op.eigenvalues;
    op["modes"] = cfg.op.modes;
    if (!cfg.op.explicit_lambdas.empty())
      op["explicit_eigenvalues"] = cfg.op.explicit_lambdas;
    ordered damping;
    damping["kind"] = cfg.op.damping_kind;
    if (cfg.op.damping_kind == "scalar") {
      damping["beta"] = complex_json(cfg.op.beta);
    } else if (cfg.op.damping_kind == "diagonal") {
      ordered diag = ordered::array();
      for (Cx z : cfg.op.diagonal) diag.push_back(complex_json(z));
      damping["diagonal"] = std::move(diag);
    } else {
      damping["dense"] = matrix_json(cfg.op.dense);
    }
    op["damping"] = std::move(damping);
    root["operator"] = std::move(op);

    ordered dl;
    dl["horizon"] = cfg.delay.horizon;
    auto atoms_json = [](const std::vector<AtomConfig>& atoms) {
      ordered arr = ordered::array();
      for (const auto& a : atoms) {
        ordered e;
        e["lag"] = a.lag;
        e["weight"] = matrix_json(a.weight);
        arr.push_back(std::move(e));
      }
      return arr;
    };
    dl["position_atoms"] = atoms_json(cfg.delay.position_atoms);
    dl["velocity_atoms"] = atoms_json(cfg.delay.velocity_atoms);
    root["delay"] = std::move(dl);
  }

  // The preset determines noise and diffusion; echo those sections only when
  // they are inputs in their own right.
  if (cfg.noise_overridden || !cfg.use_scenario) {
    ordered ns;
    ns["wiener_variances"] = cfg.noise.wiener_variances;
    ns["jump_rate"] = cfg.noise.jump_rate;
    ns["jump_law"] = cfg.noise.jump_law;
    ns["jump_vector"] = cfg.noise.jump_vector;
    ns["jump_scale"] = cfg.noise.jump_scale;
    ns["pareto_alpha"] = cfg.noise.pareto_alpha;
    ns["compensate"] = cfg.noise.compensate;
    root["noise"] = std::move(ns);
  }

  if (cfg.diffusion_overridden || !cfg.use_scenario) {
    ordered df;
    df["type"] = cfg.diffusion.type;
    if (cfg.diffusion.bottom.size() > 0)
      df["bottom"] = matrix_json(cfg.diffusion.bottom);
    df["beta"] = cfg.diffusion.beta;
    df["alpha1"] = cfg.diffusion.alpha1;
    df["alpha2"] = cfg.diffusion.alpha2;
    ordered kap = ordered::array();
    for (const auto& ka : cfg.diffusion.kappa) {
      ordered e;
      e["lag"] = ka.lag;
      e["weight"] = ka.weight;
      kap.push_back(std::move(e));
    }
    df["kappa"] = std::move(kap);
    df["lipschitz"] = cfg.diffusion.lipschitz;
    root["diffusion"] = std::move(df);
  }

  ordered sim;
  sim["t_max"] = cfg.simulation.t_max;
  sim["step"] = cfg.simulation.step;
  sim["paths"] = cfg.simulation.paths;
  sim["master_seed"] = cfg.simulation.master_seed;
  sim["initial_scale"] = cfg.simulation.initial_scale;
  sim["initial_mode"] = cfg.simulation.initial_mode;
  sim["divergence_norm"] = cfg.simulation.divergence_norm;
  sim["richardson"] = cfg.simulation.richardson;
  root["simulation"] = std::move(sim);

  ordered an;
  an["c"] = cfg.analysis.c;
  an["b_max"] = cfg.analysis.b_max;
  an["grid_points"] = cfg.analysis.grid_points;
  an["dictionary_size"] = cfg.analysis.dictionary_size;
  an["checkpoints"] = cfg.analysis.checkpoints;
  an["offset"] = cfg.analysis.offset;
  an["a_grid"] = cfg.analysis.a_grid;
  root["analysis"] = std::move(an);

  ordered out;
  out["directory"] = cfg.output.directory;
  out["formats"] = cfg.output.formats;
  root["output"] = std::move(out);

  ordered vf;
  vf["fault"] = cfg.verify.fault;
  vf["scale"] = cfg.verify.scale;
  root["verify"] = std::move(vf);

  return root.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  // The hash identifies the experiment, so the output destination stays out
  // of it: the same run written to two directories shares one hash.
  ExperimentConfig keyed = cfg;
  keyed.output = OutputConfig{};
  const std::string text = canonical_config_json(keyed);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed,
                     std::optional<int> paths, std::optional<int> modes) {
  if (seed) cfg.simulation.master_seed = *seed;
  if (paths) {
    if (*paths < 1) throw ConfigError("simulation.paths", "must be positive");
    cfg.simulation.paths = *paths;
  }
  if (modes) {
    if (*modes < 1) throw ConfigError("operator.modes", "must be positive");
    if (!cfg.use_scenario && cfg.op.eigenvalues == "explicit")
      throw ConfigError("operator.modes",
                        "cannot override modes of an explicit eigenvalue list");
    if (cfg.use_scenario)
      cfg.scenario.modes = *modes;
    else
      cfg.op.modes = *modes;
  }
}

BuiltSystem build_system(const ExperimentConfig& cfg) {
  BuiltSystem sys;
  int modes = 0;
  bool dirichlet = true;

  if (cfg.use_scenario) {
    WaveSystem w = build_wave(cfg.scenario);
    modes = cfg.scenario.modes;
    sys.op = std::move(w.op);
    sys.kernel = std::move(w.kernel);
    sys.diffusion = std::move(w.diffusion);
    sys.noise = std::move(w.noise);
  } else {
    modes = cfg.op.eigenvalues == "explicit"
                ? static_cast<int>(cfg.op.explicit_lambdas.size())
                : cfg.op.modes;
    dirichlet = cfg.op.eigenvalues == "dirichlet";
    SpectralOperator a =
        dirichlet ? dirichlet_laplacian_1d(modes)
                  : explicit_spectrum(Eigen::Map<const Eigen::VectorXd>(
                        cfg.op.explicit_lambdas.data(),
                        static_cast<Eigen::Index>(
                            cfg.op.explicit_lambdas.size())));
    DampingSpec b;
    if (cfg.op.damping_kind == "scalar") {
      b = scalar_damping(cfg.op.beta);
    } else if (cfg.op.damping_kind == "diagonal") {
      Eigen::VectorXcd d(static_cast<Eigen::Index>(cfg.op.diagonal.size()));
      for (Eigen::Index i = 0; i < d.size(); ++i)
        d(i) = cfg.op.diagonal[static_cast<std::size_t>(i)];
      b = diagonal_damping(std::move(d));
    } else {
      b = dense_damping(cfg.op.dense.cast<Cx>());
    }
    try {
      sys.op = build_reduction(a, b);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("operator.damping", e.what());
    }

    DelayKernel k;
    k.horizon = cfg.delay.horizon;
    for (const auto& at : cfg.delay.position_atoms)
      k.position_atoms.push_back({at.lag, at.weight});
    for (const auto& at : cfg.delay.velocity_atoms)
      k.velocity_atoms.push_back({at.lag, at.weight});
    try {
      validate_kernel(k, modes);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("delay", e.what());
    }
    sys.kernel = std::move(k);
    sys.diffusion = DiffusionSpec{};
    sys.diffusion.modes = modes;
    sys.diffusion.noise_dim = 1;
    sys.diffusion.additive = true;
    sys.diffusion.additive_bottom = Eigen::MatrixXd::Zero(modes, 1);
    sys.noise = NoiseSpec{};
  }

  if (cfg.noise_overridden) {
    NoiseSpec ns;
    if (!cfg.noise.wiener_variances.empty())
      ns.wiener_variances = Eigen::Map<const Eigen::VectorXd>(
          cfg.noise.wiener_variances.data(),
          static_cast<Eigen::Index>(cfg.noise.wiener_variances.size()));
    ns.jump_rate = cfg.noise.jump_rate;
    ns.law = cfg.noise.jump_law == "fixed"      ? JumpLaw::FixedVector
             : cfg.noise.jump_law == "sphere"   ? JumpLaw::UniformSphere
             : cfg.noise.jump_law == "gaussian" ? JumpLaw::Gaussian
                                                : JumpLaw::ParetoRadial;
    if (!cfg.noise.jump_vector.empty())
      ns.jump_vector = Eigen::Map<const Eigen::VectorXd>(
          cfg.noise.jump_vector.data(),
          static_cast<Eigen::Index>(cfg.noise.jump_vector.size()));
    ns.jump_scale = cfg.noise.jump_scale;
    ns.pareto_alpha = cfg.noise.pareto_alpha;
    ns.compensate = cfg.noise.compensate;
    sys.noise = std::move(ns);
  }

  if (cfg.diffusion_overridden) {
    if (cfg.diffusion.type == "saturated_field") {
      if (!dirichlet)
        throw ConfigError("diffusion.type",
                          "saturated_field needs the dirichlet operator");
      sys.diffusion = wave_diffusion(modes, cfg.diffusion.beta);
    } else {
      DiffusionSpec d;
      d.modes = modes;
      d.additive = true;
      d.additive_bottom = cfg.diffusion.bottom.size() > 0
                              ? cfg.diffusion.bottom
                              : Eigen::MatrixXd::Zero(modes, 1);
      if (d.additive_bottom.rows() != modes)
        throw ConfigError("diffusion.bottom",
                          "needs one row per operator mode");
      d.noise_dim = static_cast<int>(d.additive_bottom.cols());
      d.alpha1 = cfg.diffusion.alpha1;
      d.alpha2 = cfg.diffusion.alpha2;
      d.kappa = cfg.diffusion.kappa;
      d.lipschitz = cfg.diffusion.lipschitz;
      sys.diffusion = std::move(d);
    }
  }

  try {
    validate_diffusion(sys.diffusion);
    validate_noise(sys.noise, sys.diffusion.noise_dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("diffusion", e.what());
  }
  if (sys.diffusion.modes != modes)
    throw ConfigError("diffusion", "modes mismatch with the operator");

  const double scale0 = cfg.simulation.initial_scale;
  const int mode0 = cfg.simulation.initial_mode;
  if (mode0 > modes)
    throw ConfigError("simulation.initial_mode", "exceeds operator modes");
  const int dim = 2 * modes;
  if (dirichlet) {
    sys.history = [modes, scale0, mode0](double sign) {
      return wave_history(modes, sign * scale0, mode0);
    };
  } else {
    const Eigen::VectorXd unit = Eigen::VectorXd::Unit(dim, mode0 - 1);
    sys.history = [unit, scale0](double sign) {
      Eigen::VectorXd y = sign * scale0 * unit;
      return std::function<Eigen::VectorXd(double)>(
          [y](double) { return y; });
    };
  }
  return sys;
}

}  // namespace sdwave
