#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "qnuis/bounds.hpp"
#include "qnuis/errors.hpp"
#include "qnuis/fisher.hpp"
#include "qnuis/metrology.hpp"
#include "qnuis/models.hpp"
#include "qnuis/oracle.hpp"
#include "qnuis/properties.hpp"

namespace qnuis::cli {

namespace {

using Json = nlohmann::ordered_json;

Json to_json(const RMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const RVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const BoundResult& r) {
  Json j;
  j["value"] = r.value;
  Json comps = Json::object();
  for (const auto& [k, v] : r.components) comps[k] = v;
  j["components"] = comps;
  if (r.optimal_weights) j["optimal_weights"] = to_json(*r.optimal_weights);
  return j;
}

RVector to_vector(const std::vector<double>& v) { return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size())); }

RMatrix square_from(const std::vector<double>& v, int k, const std::string& what) {
  if (v.empty()) return RMatrix::Identity(k, k);
  if (static_cast<int>(v.size()) == k) return to_vector(v).asDiagonal();
  if (static_cast<int>(v.size()) != k * k) {
    std::ostringstream os;
    os << what << " needs " << k << " diagonal entries or " << k * k << " row-major entries, got " << v.size();
    throw Error(ErrorCode::ShapeMismatch, os.str());
  }
  RMatrix m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = v[static_cast<std::size_t>(i * k + j)];
  return m;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ModelArgs {
  std::string name;
  std::vector<double> fixed;
  std::vector<double> theta;
  bool orthogonal = false;

  void add(CLI::App* sub) {
    sub->add_option("--model", name, "Built-in model A-F")->required();
    sub->add_option("--fixed", fixed, "Fixed parameters (theta0 for C, s0 for F)")->delimiter(',');
    sub->add_option("--theta", theta, "Parameter point")->delimiter(',')->required();
    sub->add_flag("--orthogonal", orthogonal, "Use the built-in orthogonalizing reparametrization; theta is xi");
  }

  ParametricModel model() const {
    ParametricModel m = make_builtin(name, fixed);
    if (orthogonal) m = orthogonalize(m, builtin_reparametrization(m));
    return m;
  }

  RVector point(const ParametricModel& m) const {
    if (static_cast<int>(theta.size()) != m.n) {
      std::ostringstream os;
      os << "model " << m.name << " has " << m.n << " parameters, --theta has " << theta.size();
      throw Error(ErrorCode::ShapeMismatch, os.str());
    }
    return to_vector(theta);
  }
};

struct Output {
  std::string path;
  std::string format;

  void add(CLI::App* sub, const std::string& default_format, const std::vector<std::string>& formats) {
    format = default_format;
    sub->add_option("--out", path, "Output file (stdout if omitted)");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember(formats));
  }

  void write(const std::string& text, std::ostream& out) const {
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error(ErrorCode::InvalidArgument, "failed writing '" + path + "'");
  }
};

template <class F>
Json attempt(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return Json{{"error", e.what()}};
  }
}

// ---- bounds ----
struct BoundsCmd {
  ModelArgs model;
  std::vector<double> weight, weight_full, v_nn;
  std::optional<double> v_in;
  Output output;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("bounds", "Fisher information and estimation-error bounds at one point");
    model.add(sub);
    sub->add_option("--weight", weight, "Interest weight W_I (m diagonal or m*m row-major entries)")->delimiter(',');
    sub->add_option("--weight-full", weight_full, "Full weight W (n diagonal or n*n entries)")->delimiter(',');
    sub->add_option("--v-nn", v_nn, "Nuisance MSE block V_NN (scalar, or 4 entries for 1+2)")->delimiter(',');
    sub->add_option("--v-in", v_in, "Interest/nuisance MSE entry V_IN (1+1 models)");
    output.add(sub, "json", {"json"});
    sub->callback([this] { ran = true; });
  }

  bool ran = false;

  std::string run() const {
    const ParametricModel m = model.model();
    const RVector th = model.point(m);
    const FisherBundle fb = sld_fisher(m, th);
    const int n = m.n, k = m.m;
    const RMatrix W = square_from(weight_full, n, "--weight-full");
    const RMatrix W_I = square_from(weight, k, "--weight");
    const BlockSplit gb = split_blocks(fb.G, k), gib = split_blocks(fb.G_inv, k);

    Json j;
    j["model"] = m.name;
    j["n"] = n;
    j["m"] = k;
    j["theta"] = to_json(th);
    j["G"] = to_json(fb.G);
    j["G_inv"] = to_json(fb.G_inv);
    j["blocks"] = {{"G_II", to_json(gb.II)},   {"G_IN", to_json(gb.IN)},       {"G_NN", to_json(gb.NN)},
                   {"G_inv_II", to_json(gib.II)}, {"G_inv_IN", to_json(gib.IN)}, {"G_inv_NN", to_json(gib.NN)}};
    if (k < n) {
      j["partial_fisher"] = to_json(RMatrix(gib.II.inverse()));
      j["information_loss"] = to_json(RMatrix(gib.II - gb.II.inverse()));
    }

    Json b;
    b["sld_cr"] = sld_cr_bound(W, fb.G_inv);
    b["sld_cr_interest"] = sld_cr_bound(W_I, gib.II);
    if (m.is_qubit() && n == 2) b["nagaoka"] = attempt([&] { return Json(nagaoka_bound(W, fb.G_inv)); });
    if (m.is_qubit() && n == 3) b["hgm"] = attempt([&] { return Json(hgm_bound(W, fb.G_inv)); });

    std::optional<WeightLimitKind> kind;
    if (m.is_qubit() && n == 2 && k == 1) kind = WeightLimitKind::Nagaoka11;
    if (m.is_qubit() && n == 3 && k == 1) kind = WeightLimitKind::Hgm12;
    if (m.is_qubit() && n == 3 && k == 2) kind = WeightLimitKind::Hgm21;
    if (kind) {
      b["weight_limit"] = attempt([&] {
        const WeightLimitResult r = weight_limit_bound(*kind, W_I, fb.G_inv);
        return Json{{"kind", to_string(*kind)},
                    {"value", r.value},
                    {"closed_form", r.closed_form},
                    {"epsilons", r.epsilons},
                    {"ladder", r.ladder},
                    {"extrapolants", r.extrapolants}};
      });
    }
    if (!v_nn.empty()) {
      if (kind == WeightLimitKind::Nagaoka11) {
        b["nui_bound_11"] = attempt([&] {
          if (v_nn.size() != 1) throw Error(ErrorCode::ShapeMismatch, "--v-nn takes one value for 1+1 models");
          return to_json(nui_bound_11(fb.G_inv, v_in.value_or(fb.G_inv(0, 1)), v_nn[0]));
        });
      } else if (kind == WeightLimitKind::Hgm12) {
        b["nui_bound_12"] = attempt([&] { return to_json(nui_bound_12(fb.G_inv, square_from(v_nn, 2, "--v-nn"))); });
      } else if (kind == WeightLimitKind::Hgm21) {
        b["nui_bound_21"] = attempt([&] {
          if (v_nn.size() != 1) throw Error(ErrorCode::ShapeMismatch, "--v-nn takes one value for 2+1 models");
          return to_json(nui_bound_21(W_I, fb.G_inv, v_nn[0]));
        });
      } else {
        throw Error(ErrorCode::InvalidArgument, "--v-nn applies to qubit 1+1, 1+2 and 2+1 models only");
      }
    }
    j["bounds"] = b;
    return j.dump(2) + "\n";
  }
};

// ---- orthogonalize ----
struct OrthoCmd {
  std::string name;
  std::vector<double> fixed, xi;
  Output output;
  bool ran = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("orthogonalize", "Apply the built-in orthogonalizing reparametrization");
    sub->add_option("--model", name, "Built-in model A-D")->required();
    sub->add_option("--fixed", fixed, "Fixed parameters")->delimiter(',');
    sub->add_option("--theta", xi, "Point in the new coordinates xi")->delimiter(',')->required();
    output.add(sub, "json", {"json"});
    sub->callback([this] { ran = true; });
  }

  std::string run() const {
    const ParametricModel base = make_builtin(name, fixed);
    const Reparametrization r = builtin_reparametrization(base);
    const ParametricModel m = orthogonalize(base, r);
    if (static_cast<int>(xi.size()) != m.n) throw Error(ErrorCode::ShapeMismatch, "--theta length must match the model");
    const RVector x = to_vector(xi);
    require_in_domain(m, x);
    const FisherBundle fb = sld_fisher(m, x);
    Json j;
    j["model"] = m.name;
    j["reparametrization"] = r.name;
    j["xi"] = to_json(x);
    j["theta"] = to_json(RVector(r.forward(x)));
    j["jacobian"] = to_json(RMatrix(r.jacobian(x)));
    j["G"] = to_json(fb.G);
    j["G_inv"] = to_json(fb.G_inv);
    j["off_block_max"] = m.m < m.n ? fb.G.topRightCorner(m.m, m.n - m.m).cwiseAbs().maxCoeff() : 0.0;
    return j.dump(2) + "\n";
  }
};

// ---- oracle ----
struct OracleCmd {
  ModelArgs model;
  std::vector<double> weight;
  std::vector<std::string> families{"pvm-grid"};
  OracleConfig cfg;
  Output output;
  bool ran = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("oracle", "Brute-force minimization over measurement families");
    model.add(sub);
    sub->add_option("--weight", weight, "Interest weight W_I")->delimiter(',');
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--grid-density", cfg.grid_density, "Bloch grid subdivisions")->capture_default_str();
    sub->add_option("--refinements", cfg.refinement_rounds, "Refinement rounds")->capture_default_str();
    sub->add_option("--family", families, "Candidate families: pvm-grid, mixtures, random-4-outcome")
        ->delimiter(',')
        ->check(CLI::IsMember({"pvm-grid", "mixtures", "random-4-outcome"}))
        ->capture_default_str();
    sub->add_option("--random-candidates", cfg.random_candidates, "Random POVM count")->capture_default_str();
    sub->add_option("--mixture-density", cfg.mixture_grid_density, "Direction grid for mixtures")->capture_default_str();
    output.add(sub, "json", {"json"});
    sub->callback([this] { ran = true; });
  }

  std::string run() {
    const ParametricModel m = model.model();
    const RVector th = model.point(m);
    const RMatrix W_I = square_from(weight, m.m, "--weight");
    cfg.use_pvm_grid = cfg.use_mixtures = cfg.use_random = false;
    for (const auto& f : families) {
      if (f == "pvm-grid") cfg.use_pvm_grid = true;
      if (f == "mixtures") cfg.use_mixtures = true;
      if (f == "random-4-outcome") cfg.use_random = true;
    }
    const OracleResult r = oracle_minimize(m, th, W_I, cfg);
    Json j;
    j["model"] = m.name;
    j["theta"] = to_json(th);
    j["weight"] = to_json(W_I);
    j["config"] = {{"seed", cfg.seed},
                   {"grid_density", cfg.grid_density},
                   {"refinement_rounds", cfg.refinement_rounds},
                   {"families", families},
                   {"random_candidates", cfg.random_candidates},
                   {"mixture_grid_density", cfg.mixture_grid_density},
                   {"mixture_weights", cfg.mixture_weights}};
    j["value"] = r.value;
    j["family"] = r.family;
    Json effects = Json::array();
    for (const auto& e : r.effects) effects.push_back({{"a", e.a}, {"r", {e.r(0), e.r(1), e.r(2)}}});
    j["effects"] = effects;
    j["trace"] = r.trace;
    j["evaluated"] = r.evaluated;
    j["skipped"] = r.skipped;

    // Closed-form reference where one exists.
    const RMatrix G_inv = sld_fisher(m, th).G_inv;
    const RMatrix G_II = G_inv.topLeftCorner(m.m, m.m);
    std::optional<double> ref;
    if (m.m == 1) ref = W_I(0, 0) * G_II(0, 0);
    if (m.m == 2 && m.n == 3) ref = weight_limit_bound(WeightLimitKind::Hgm21, W_I, G_inv).closed_form;
    if (ref) {
      j["reference"] = *ref;
      j["relative_gap"] = (r.value - *ref) / std::abs(*ref);
    }
    return j.dump(2) + "\n";
  }
};

// ---- scan ----
struct ScanCmd {
  std::string preset;
  std::vector<int> variants{1, 2, 3};
  std::optional<double> omega, b2, gamma, tmin, tmax;
  std::optional<int> tcount;
  std::vector<double> s0;
  std::string spacing = "log";
  Output output;
  bool ran = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("scan", "SLD Fisher information time series for the noise models");
    sub->add_option("--preset", preset, "fig1a, fig1b or fig1c")->check(CLI::IsMember(noise_preset_names()));
    sub->add_option("--variant", variants, "Variants to emit")->delimiter(',')->check(CLI::Range(1, 3))->capture_default_str();
    sub->add_option("--omega", omega, "Angular frequency");
    sub->add_option("--b2", b2, "Squared field strength");
    sub->add_option("--gamma", gamma, "Correlation rate Gamma");
    sub->add_option("--s0", s0, "Initial Bloch vector")->delimiter(',')->expected(3);
    sub->add_option("--tmin", tmin, "First time (default 1e-3)");
    sub->add_option("--tmax", tmax, "Last time (default 30 / Gamma)");
    sub->add_option("--tcount", tcount, "Number of times (default 200)");
    sub->add_option("--tspacing", spacing, "linear or log")->check(CLI::IsMember({"linear", "log"}))->capture_default_str();
    output.add(sub, "csv", {"csv", "json"});
    sub->callback([this] { ran = true; });
  }

  NoiseModelSpec spec_for(int variant) const {
    NoiseModelSpec s;
    if (!preset.empty()) {
      s = noise_preset(preset, variant);
    } else {
      if (!omega || !b2 || !gamma) throw Error(ErrorCode::InvalidSpec, "give --preset or all of --omega, --b2, --gamma");
      s.variant = variant;
      s.s0 = Eigen::Vector3d(std::sqrt(0.91), 0.0, 0.3);
    }
    if (omega) s.omega = *omega;
    if (b2) s.b2 = *b2;
    if (gamma) s.gamma_corr = *gamma;
    if (!s0.empty()) s.s0 = Eigen::Vector3d(s0[0], s0[1], s0[2]);
    s.validate();
    return s;
  }

  std::string run() const {
    std::vector<FisherTimeSeries> series;
    std::vector<double> times;
    for (int v : variants) {
      const NoiseModelSpec s = spec_for(v);
      if (times.empty()) {
        if (!tmin && !tmax && !tcount && spacing == "log") {
          times = default_time_grid(s);
        } else {
          times = time_grid(tmin.value_or(1e-3), tmax.value_or(30.0 / s.gamma_corr), tcount.value_or(200),
                            spacing == "log" ? Spacing::Log : Spacing::Linear);
        }
      }
      series.push_back(fisher_time_series(s, times));
    }
    auto normalized = [](double log_value, PointStatus status, double t) {
      if (status != PointStatus::Ok || std::isnan(log_value)) return std::numeric_limits<double>::quiet_NaN();
      return std::exp(log_value - 2.0 * std::log(t));
    };
    if (output.format == "csv") {
      std::string text = "t,variant,g11_over_t2,g11_partial_over_t2,status\n";
      for (const auto& s : series)
        for (const auto& p : s.points)
          text += fmt17(p.t) + "," + std::to_string(s.variant) + "," + fmt17(normalized(p.log_g11, p.status, p.t)) + "," +
                  fmt17(normalized(p.log_g11_partial, p.status, p.t)) + "," + to_string(p.status) + "\n";
      return text;
    }
    Json j;
    const NoiseModelSpec s = spec_for(variants.front());
    j["noise_model"] = {{"preset", preset}, {"omega", s.omega}, {"b2", s.b2}, {"gamma", s.gamma_corr},
                 {"s0", {s.s0(0), s.s0(1), s.s0(2)}}};
    Json arr = Json::array();
    for (const auto& ser : series) {
      Json e;
      e["variant"] = ser.variant;
      e["t"] = ser.times;
      Json a = Json::array(), b = Json::array(), la = Json::array(), lb = Json::array(), st = Json::array();
      for (const auto& p : ser.points) {
        a.push_back(normalized(p.log_g11, p.status, p.t));
        b.push_back(normalized(p.log_g11_partial, p.status, p.t));
        la.push_back(p.status == PointStatus::Ok ? Json(p.log_g11) : Json(nullptr));
        lb.push_back(p.status == PointStatus::Ok && !std::isnan(p.log_g11_partial) ? Json(p.log_g11_partial) : Json(nullptr));
        st.push_back(to_string(p.status));
      }
      e["g11_over_t2"] = a;
      e["g11_partial_over_t2"] = b;
      e["log_g11"] = la;
      e["log_g11_partial"] = lb;
      e["status"] = st;
      arr.push_back(e);
    }
    j["series"] = arr;
    return j.dump(2) + "\n";
  }
};

// ---- validate ----
struct ValidateCmd {
  PropertyConfig cfg;
  std::vector<std::string> overrides, exclude;
  bool list = false;
  Output output;
  bool ran = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("validate", "Run the property suites");
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--samples", cfg.sample_scale, "Sample-count multiplier")->capture_default_str();
    sub->add_option("--override-tol", overrides, "name=value threshold override (repeatable)");
    sub->add_option("--exclude", exclude, "Property to skip (repeatable)");
    sub->add_flag("--list", list, "List property names and thresholds");
    output.add(sub, "json", {"json"});
    sub->callback([this] { ran = true; });
  }

  int run(std::string& text) {
    if (list) {
      Json j = Json::object();
      for (const auto& name : property_names()) j[name] = property_tolerance(name);
      text = j.dump(2) + "\n";
      return Success;
    }
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--override-tol expects name=value");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(o.substr(eq + 1), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != o.size() - eq - 1) throw Error(ErrorCode::InvalidArgument, "bad tolerance in '" + o + "'");
      cfg.tolerance_overrides[o.substr(0, eq)] = v;
    }
    cfg.exclude.insert(exclude.begin(), exclude.end());
    const auto results = run_properties(cfg);
    Json j;
    Json props = Json::array(), failures = Json::array();
    bool pass = true;
    for (const auto& r : results) {
      props.push_back({{"name", r.name},
                       {"pass", r.pass},
                       {"violation", r.violation},
                       {"tolerance", r.tolerance},
                       {"strict", r.strict},
                       {"samples", r.samples},
                       {"detail", r.detail}});
      if (!r.pass) {
        pass = false;
        failures.push_back(r.name);
      }
    }
    j["pass"] = pass;
    j["seed"] = cfg.seed;
    j["failures"] = failures;
    j["properties"] = props;
    text = j.dump(2) + "\n";
    return pass ? Success : PropertyFailure;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Estimation-error bounds with nuisance parameters", "qnuis"};
  app.require_subcommand(1);
  BoundsCmd bounds;
  OrthoCmd ortho;
  OracleCmd oracle;
  ScanCmd scan;
  ValidateCmd validate;
  bounds.add(app);
  ortho.add(app);
  oracle.add(app);
  scan.add(app);
  validate.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Success;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Success;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return InvalidInput;
  }

  try {
    std::string text;
    int code = Success;
    Output* sink = nullptr;
    if (bounds.ran) {
      text = bounds.run();
      sink = &bounds.output;
    } else if (ortho.ran) {
      text = ortho.run();
      sink = &ortho.output;
    } else if (oracle.ran) {
      text = oracle.run();
      sink = &oracle.output;
    } else if (scan.ran) {
      text = scan.run();
      sink = &scan.output;
    } else if (validate.ran) {
      code = validate.run(text);
      sink = &validate.output;
      if (code != Success) {
        Json j = Json::parse(text);
        for (const auto& name : j["failures"]) err << "property failed: " << name.get<std::string>() << "\n";
      }
    }
    if (sink) sink->write(text, out);
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::EmptyFeasibleSet || e.code() == ErrorCode::NonConvergent) return Infeasible;
    return InvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return InvalidInput;
  }
}

}  // namespace qnuis::cli
