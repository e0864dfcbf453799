#include "klyap/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "klyap/koopman.hpp"
#include "klyap/lyapunov.hpp"
#include "klyap/oracle.hpp"

namespace klyap {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw ConfigError("config: unknown key \"" + item.key() + "\" in " + where);
}

Vec parse_vec(const json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

Mat parse_mat(const json& j) {
  if (j.empty()) return Mat();
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw ConfigError("config: jacobian rows have inconsistent lengths");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_to_json(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  out << content;
}

fs::path prepare_output_dir(const ExperimentConfig& cfg) {
  if (cfg.outputs.empty()) throw ConfigError("config: output directory not specified");
  fs::path dir(cfg.outputs);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("config: cannot create output directory " + dir.string());
  return dir;
}

// Fill the grid box defaults once the state dimension is known.
ExperimentConfig resolve(const ExperimentConfig& in, int dim) {
  ExperimentConfig out = in;
  if (out.grid.lo.size() == 0) out.grid.lo = Vec::Constant(dim, -1.5);
  if (out.grid.hi.size() == 0) out.grid.hi = Vec::Constant(dim, 1.5);
  if (out.grid.lo.size() != dim || out.grid.hi.size() != dim)
    throw ConfigError("config: grid bounds do not match the system dimension");
  if (out.grid.resolution < 2) throw ConfigError("config: grid resolution must be >= 2");
  return out;
}

CVec jacobian_generators(const SystemDef& sys, double delta) {
  if (sys.jacobian_at_origin.size() == 0)
    throw ConfigError("config: system has no Jacobian; spectrum mode needs one");
  const Mat F = discretized_jacobian(sys, delta);
  CVec ev = F.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(), [](const auto& a, const auto& b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return ev;
}

std::string spectrum_csv(const CVec& values, bool append_zero) {
  std::string out = "re,im,modulus\n";
  for (int i = 0; i < values.size(); ++i)
    out += fmt(values(i).real()) + "," + fmt(values(i).imag()) + "," + fmt(std::abs(values(i))) +
           "\n";
  if (append_zero) out += "0,0,0\n";
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  try {
    ExperimentConfig cfg;
    check_keys(j, {"mode", "system", "delta", "n_traj", "horizon", "seed", "kernel", "ridge",
                   "krr_lambdas", "decay", "grid", "outputs", "spectrum_degree_max", "trend_sizes",
                   "initial_states", "predict_steps", "fill_grid", "slack_rel", "oracle_tol",
                   "oracle_t_max", "rng"},
               "config");  // "rng" is informational output, accepted back verbatim
    if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
    if (j.contains("system")) {
      const json& s = j["system"];
      check_keys(s, {"name", "a", "b", "jacobian"}, "system");
      if (s.contains("name")) cfg.system.name = s["name"].get<std::string>();
      if (s.contains("a")) cfg.system.a = s["a"].get<double>();
      if (s.contains("b")) cfg.system.b = s["b"].get<double>();
      if (s.contains("jacobian")) cfg.system.jacobian = parse_mat(s["jacobian"]);
    }
    if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
    if (j.contains("n_traj")) cfg.n_traj = j["n_traj"].get<int>();
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("kernel")) {
      const json& k = j["kernel"];
      check_keys(k, {"k", "scale"}, "kernel");
      if (k.contains("k")) cfg.kernel.k = k["k"].get<int>();
      if (k.contains("scale")) cfg.kernel.scale = k["scale"].get<double>();
    }
    if (j.contains("ridge")) cfg.ridge = j["ridge"].get<double>();
    if (j.contains("krr_lambdas")) {
      cfg.krr_lambdas.clear();
      for (const auto& v : j["krr_lambdas"]) cfg.krr_lambdas.push_back(v.get<double>());
    }
    if (j.contains("decay")) cfg.decay = j["decay"].get<std::string>();
    if (j.contains("grid")) {
      const json& g = j["grid"];
      check_keys(g, {"lo", "hi", "resolution"}, "grid");
      if (g.contains("lo")) cfg.grid.lo = parse_vec(g["lo"]);
      if (g.contains("hi")) cfg.grid.hi = parse_vec(g["hi"]);
      if (g.contains("resolution")) cfg.grid.resolution = g["resolution"].get<int>();
    }
    if (j.contains("outputs")) cfg.outputs = j["outputs"].get<std::string>();
    if (j.contains("spectrum_degree_max"))
      cfg.spectrum_degree_max = j["spectrum_degree_max"].get<int>();
    if (j.contains("trend_sizes")) {
      cfg.trend_sizes.clear();
      for (const auto& v : j["trend_sizes"]) cfg.trend_sizes.push_back(v.get<int>());
    }
    if (j.contains("initial_states")) {
      cfg.initial_states.clear();
      for (const auto& v : j["initial_states"]) cfg.initial_states.push_back(parse_vec(v));
    }
    if (j.contains("predict_steps")) cfg.predict_steps = j["predict_steps"].get<int>();
    if (j.contains("fill_grid")) cfg.fill_grid = j["fill_grid"].get<int>();
    if (j.contains("slack_rel")) cfg.slack_rel = j["slack_rel"].get<double>();
    if (j.contains("oracle_tol")) cfg.oracle_tol = j["oracle_tol"].get<double>();
    if (j.contains("oracle_t_max")) cfg.oracle_t_max = j["oracle_t_max"].get<int>();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
  json j;
  j["mode"] = cfg.mode;
  json s;
  s["name"] = cfg.system.name;
  s["a"] = cfg.system.a;
  s["b"] = cfg.system.b;
  if (cfg.system.jacobian.size() > 0) s["jacobian"] = mat_to_json(cfg.system.jacobian);
  j["system"] = s;
  j["delta"] = cfg.delta;
  j["n_traj"] = cfg.n_traj;
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  j["kernel"] = {{"k", cfg.kernel.k}, {"scale", cfg.kernel.scale}};
  j["ridge"] = cfg.ridge;
  j["krr_lambdas"] = cfg.krr_lambdas;
  j["decay"] = cfg.decay;
  json g;
  if (cfg.grid.lo.size() > 0) g["lo"] = vec_to_json(cfg.grid.lo);
  if (cfg.grid.hi.size() > 0) g["hi"] = vec_to_json(cfg.grid.hi);
  g["resolution"] = cfg.grid.resolution;
  j["grid"] = g;
  j["outputs"] = cfg.outputs;
  j["spectrum_degree_max"] = cfg.spectrum_degree_max;
  if (!cfg.trend_sizes.empty()) j["trend_sizes"] = cfg.trend_sizes;
  if (!cfg.initial_states.empty()) {
    json a = json::array();
    for (const Vec& v : cfg.initial_states) a.push_back(vec_to_json(v));
    j["initial_states"] = a;
  }
  j["predict_steps"] = cfg.predict_steps;
  j["fill_grid"] = cfg.fill_grid;
  j["slack_rel"] = cfg.slack_rel;
  j["oracle_tol"] = cfg.oracle_tol;
  j["oracle_t_max"] = cfg.oracle_t_max;
  // PRNG contract recorded alongside the parameters that feed it.
  j["rng"] = "mt19937_64/seed_seq(seed_lo,seed_hi,trajectory_index)/top53-bit uniform";
  return j.dump(2) + "\n";
}

SystemDef build_system(const SystemConfig& cfg) {
  if (cfg.name == "lienard") return lienard();
  if (cfg.name == "brusselator") return brusselator(cfg.a, cfg.b);
  if (cfg.name == "linear") {
    if (cfg.jacobian.size() == 0)
      throw ConfigError("config: linear system needs a jacobian matrix");
    return linear_system(cfg.jacobian);
  }
  throw ConfigError("config: unknown system \"" + cfg.name + "\"");
}

ProductKernel build_kernel(const KernelConfig& cfg, int dim) {
  try {
    return ProductKernel(WendlandRadial(dim, cfg.k, cfg.scale));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::vector<std::function<double(const Vec&)>> decay_factors(const std::string& name, int dim) {
  if (name == "norm_squared") {
    std::vector<std::function<double(const Vec&)>> factors;
    for (int i = 0; i < dim; ++i)
      factors.push_back([i](const Vec& x) { return x(i); });
    return factors;
  }
  throw ConfigError("config: unknown decay function \"" + name + "\"");
}

Mat make_grid(const GridConfig& cfg, int dim) {
  const int res = cfg.resolution;
  int total = 1;
  for (int i = 0; i < dim; ++i) total *= res;
  Mat grid(dim, total);
  std::vector<int> idx(dim, 0);
  for (int c = 0; c < total; ++c) {
    for (int i = 0; i < dim; ++i)
      grid(i, c) = cfg.lo(i) + (cfg.hi(i) - cfg.lo(i)) * idx[i] / (res - 1);
    int k = 0;
    while (k < dim && ++idx[k] == res) idx[k++] = 0;
  }
  return grid;
}

void run_spectrum(const ExperimentConfig& cfg0) {
  if (cfg0.mode != "spectrum") throw ConfigError("run_spectrum: mode mismatch");
  const SystemDef sys = build_system(cfg0.system);
  const ExperimentConfig cfg = resolve(cfg0, sys.dim);
  const fs::path dir = prepare_output_dir(cfg);
  write_text(dir / "resolved_config.json", resolved_config_json(cfg));

  const CVec generators = jacobian_generators(sys, cfg.delta);
  const SpectrumTruth truth = exact_spectrum(generators, cfg.spectrum_degree_max);

  const ProductKernel kern = build_kernel(cfg.kernel, sys.dim);
  const SampleSet data = sample_trajectories(sys, cfg.n_traj, cfg.horizon, cfg.delta, cfg.seed);
  const KoopmanModel model = fit_kedmd(kern, data, cfg.ridge);

  write_text(dir / "spectrum_estimated.csv", spectrum_csv(spectrum(model), false));
  write_text(dir / "spectrum_exact.csv", spectrum_csv(truth.products, truth.includes_zero));

  std::string summary;
  summary += "estimated_spectral_radius=" + fmt(model.spectral_radius) + "\n";
  summary += "exact_spectral_radius=" + fmt(generators.cwiseAbs().maxCoeff()) + "\n";
  summary += "n_pairs=" + std::to_string(data.n()) + "\n";
  write_text(dir / "summary.txt", summary);
}

void run_lyapunov(const ExperimentConfig& cfg0) {
  if (cfg0.mode != "lyapunov") throw ConfigError("run_lyapunov: mode mismatch");
  const SystemDef sys = build_system(cfg0.system);
  const ExperimentConfig cfg = resolve(cfg0, sys.dim);
  const fs::path dir = prepare_output_dir(cfg);
  write_text(dir / "resolved_config.json", resolved_config_json(cfg));

  const ProductKernel kern = build_kernel(cfg.kernel, sys.dim);
  const SampleSet data = sample_trajectories(sys, cfg.n_traj, cfg.horizon, cfg.delta, cfg.seed);
  const KoopmanModel koop = fit_kedmd(kern, data, cfg.ridge);
  const DecayModel decay = fit_decay(kern, data, decay_factors(cfg.decay, sys.dim), cfg.krr_lambdas);
  const LyapunovModel lyap = estimate_lyapunov(koop, decay);

  const Mat grid = make_grid(cfg.grid, sys.dim);
  const int m = static_cast<int>(grid.cols());
  const auto w = [&](const Vec& x) { return decay.w_true(x); };

  double max_w = 0.0;
  for (int j = 0; j < m; ++j) max_w = std::max(max_w, w(grid.col(j)));
  const double slack = cfg.slack_rel * max_w;
  const DecayReport report = check_decay(lyap, decay, sys, grid, slack);

  const Mat P_lin = linearized_lyapunov(sys.jacobian_at_origin, cfg.delta,
                                        Mat::Identity(sys.dim, sys.dim));

  std::string csv;
  for (int i = 0; i < sys.dim; ++i) csv += "x" + std::to_string(i + 1) + ",";
  csv += "v_hat,v_oracle,v_lin,decay_violation\n";
  int unconverged = 0;
  for (int j = 0; j < m; ++j) {
    const Vec x = grid.col(j);
    const SimulatedValue sim =
        simulate_lyapunov(sys, x, w, cfg.delta, cfg.oracle_tol, cfg.oracle_t_max);
    if (!sim.converged) ++unconverged;
    for (int i = 0; i < sys.dim; ++i) csv += fmt(x(i)) + ",";
    csv += fmt(eval_lyapunov(lyap, x)) + "," + fmt(sim.value) + "," + fmt(x.dot(P_lin * x)) + "," +
           fmt(report.violations(j)) + "\n";
  }
  write_text(dir / "lyapunov_grid.csv", csv);

  const Vec ones = Vec::Ones(sys.dim);
  const SimulatedValue sim_ones =
      simulate_lyapunov(sys, ones, w, cfg.delta, cfg.oracle_tol, cfg.oracle_t_max);
  std::string summary;
  summary += "v_hat_1_1=" + fmt(eval_lyapunov(lyap, ones)) + "\n";
  summary += "v_oracle_1_1=" + fmt(sim_ones.value) + "\n";
  summary += "v_lin_1_1=" + fmt(ones.dot(P_lin * ones)) + "\n";
  summary += "decay_fraction=" + fmt(report.satisfied_fraction) + "\n";
  summary += "decay_slack=" + fmt(slack) + "\n";
  summary += "worst_violation=" + fmt(report.worst_violation) + "\n";
  summary += "h_fill=" + fmt(fill_distance(data.x, sys.domain, cfg.fill_grid)) + "\n";
  summary += "stein_residual=" + fmt(lyap.solver_residual) + "\n";
  summary += "spectral_radius=" + fmt(koop.spectral_radius) + "\n";
  summary += "n_pairs=" + std::to_string(data.n()) + "\n";
  summary += "oracle_unconverged=" + std::to_string(unconverged) + "\n";
  write_text(dir / "summary.txt", summary);
}

void run_trend(const ExperimentConfig& cfg0) {
  if (cfg0.mode != "trend") throw ConfigError("run_trend: mode mismatch");
  if (cfg0.trend_sizes.size() < 3)
    throw ConfigError("config: trend mode needs at least three sample sizes");
  for (std::size_t i = 1; i < cfg0.trend_sizes.size(); ++i)
    if (cfg0.trend_sizes[i] <= cfg0.trend_sizes[i - 1])
      throw ConfigError("config: trend sample sizes must be strictly increasing");

  const SystemDef sys = build_system(cfg0.system);
  const ExperimentConfig cfg = resolve(cfg0, sys.dim);
  const fs::path dir = prepare_output_dir(cfg);
  write_text(dir / "resolved_config.json", resolved_config_json(cfg));

  const ProductKernel kern = build_kernel(cfg.kernel, sys.dim);
  const Mat grid = make_grid(cfg.grid, sys.dim);
  const int m = static_cast<int>(grid.cols());
  const auto factors = decay_factors(cfg.decay, sys.dim);
  const auto w = [&factors](const Vec& x) {
    double acc = 0.0;
    for (const auto& f : factors) {
      const double v = f(x);
      acc += v * v;
    }
    return acc;
  };

  Vec v_oracle(m);
  for (int j = 0; j < m; ++j)
    v_oracle(j) = simulate_lyapunov(sys, grid.col(j), w, cfg.delta, cfg.oracle_tol,
                                    cfg.oracle_t_max)
                      .value;

  std::string csv = "n_traj,n_pairs,h_fill,v_rms_error,train_residual_rms\n";
  std::vector<double> fills, errors;
  for (int n_traj : cfg.trend_sizes) {
    const SampleSet data = sample_trajectories(sys, n_traj, cfg.horizon, cfg.delta, cfg.seed);
    const KoopmanModel koop = fit_kedmd(kern, data, cfg.ridge);
    const DecayModel decay = fit_decay(kern, data, factors, cfg.krr_lambdas);
    const LyapunovModel lyap = estimate_lyapunov(koop, decay);

    const double h_fill = fill_distance(data.x, sys.domain, cfg.fill_grid);
    double sq = 0.0;
    for (int j = 0; j < m; ++j) {
      const double diff = eval_lyapunov(lyap, grid.col(j)) - v_oracle(j);
      sq += diff * diff;
    }
    const double rms = std::sqrt(sq / m);
    const double train_rms = std::sqrt(training_residuals(koop).squaredNorm() / data.n());

    fills.push_back(h_fill);
    errors.push_back(rms);
    csv += std::to_string(n_traj) + "," + std::to_string(data.n()) + "," + fmt(h_fill) + "," +
           fmt(rms) + "," + fmt(train_rms) + "\n";
  }
  write_text(dir / "trend.csv", csv);

  bool fill_decreasing = true;
  for (std::size_t i = 1; i < fills.size(); ++i)
    if (!(fills[i] < fills[i - 1])) fill_decreasing = false;
  const bool error_decreasing = errors.back() < errors.front();
  std::string summary;
  summary += std::string("h_fill_decreasing=") + (fill_decreasing ? "1" : "0") + "\n";
  summary += std::string("error_decreasing=") + (error_decreasing ? "1" : "0") + "\n";
  write_text(dir / "summary.txt", summary);
}

void run_predict(const ExperimentConfig& cfg0) {
  if (cfg0.mode != "predict") throw ConfigError("run_predict: mode mismatch");
  if (cfg0.initial_states.empty())
    throw ConfigError("config: predict mode needs at least one initial state");

  const SystemDef sys = build_system(cfg0.system);
  const ExperimentConfig cfg = resolve(cfg0, sys.dim);
  const fs::path dir = prepare_output_dir(cfg);
  write_text(dir / "resolved_config.json", resolved_config_json(cfg));

  const ProductKernel kern = build_kernel(cfg.kernel, sys.dim);
  const SampleSet data = sample_trajectories(sys, cfg.n_traj, cfg.horizon, cfg.delta, cfg.seed);
  const KoopmanModel model = fit_kedmd(kern, data, cfg.ridge);

  std::string summary;
  for (std::size_t s = 0; s < cfg.initial_states.size(); ++s) {
    const Vec& x0 = cfg.initial_states[s];
    if (x0.size() != sys.dim) throw ConfigError("config: initial state dimension mismatch");
    const Prediction pred = predict_trajectory(model, x0, cfg.predict_steps);

    std::string csv = "t";
    for (int i = 0; i < sys.dim; ++i) csv += ",x" + std::to_string(i + 1) + "_true";
    for (int i = 0; i < sys.dim; ++i) csv += ",x" + std::to_string(i + 1) + "_pred";
    csv += ",deviation,status\n";

    Vec x_true = x0;
    double dev_sum = 0.0;
    const int rows = static_cast<int>(pred.states.cols());
    for (int t = 0; t < rows; ++t) {
      const double dev = (pred.states.col(t) - x_true).norm();
      dev_sum += dev;
      csv += std::to_string(t);
      for (int i = 0; i < sys.dim; ++i) csv += "," + fmt(x_true(i));
      for (int i = 0; i < sys.dim; ++i) csv += "," + fmt(pred.states(i, t));
      csv += "," + fmt(dev) + ",";
      csv += (pred.diverged && t == rows - 1) ? "diverged" : "ok";
      csv += "\n";
      if (t + 1 < rows) x_true = step(sys, x_true, cfg.delta);
    }
    write_text(dir / ("predict_" + std::to_string(s) + ".csv"), csv);
    summary += "mean_deviation_" + std::to_string(s) + "=" + fmt(dev_sum / rows) + "\n";
    summary += "diverged_" + std::to_string(s) + "=" + (pred.diverged ? std::string("1") : "0") +
               "\n";
  }
  write_text(dir / "summary.txt", summary);
}

void run_experiment(const ExperimentConfig& cfg) {
  if (cfg.mode == "spectrum")
    run_spectrum(cfg);
  else if (cfg.mode == "lyapunov")
    run_lyapunov(cfg);
  else if (cfg.mode == "trend")
    run_trend(cfg);
  else if (cfg.mode == "predict")
    run_predict(cfg);
  else
    throw ConfigError("config: unknown mode \"" + cfg.mode + "\"");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return 2;
  if (dynamic_cast<const InstabilityError*>(&e)) return 4;
  return 3;
}

int run_with_exit_code(const ExperimentConfig& cfg) {
  try {
    run_experiment(cfg);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
}

}  // namespace klyap
