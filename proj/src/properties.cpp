#include "qnuis/properties.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "qnuis/bounds.hpp"
#include "qnuis/errors.hpp"
#include "qnuis/fisher.hpp"
#include "qnuis/metrology.hpp"
#include "qnuis/models.hpp"
#include "qnuis/oracle.hpp"
#include "qnuis/povm.hpp"

namespace qnuis {

namespace {

using Rng = std::mt19937_64;

struct Outcome {
  double violation = 0.0;
  long samples = 0;
  std::string detail;
};

struct Context {
  Rng rng;
  double scale;
  const Tolerances& tol;

  int count(int base) const { return std::max(1, static_cast<int>(std::lround(base * scale))); }
};

struct Property {
  std::string name;
  double tolerance;
  bool strict;
  std::function<Outcome(Context&)> run;
};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

CMatrix random_complex(Rng& rng, int d) {
  std::normal_distribution<double> g;
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  return a;
}

CMatrix random_state(Rng& rng, int d) {
  const CMatrix a = random_complex(rng, d);
  CMatrix rho = a * a.adjoint() + 0.05 * CMatrix::Identity(d, d);
  return rho / rho.trace().real();
}

CMatrix random_traceless(Rng& rng, int d) {
  const CMatrix a = random_complex(rng, d);
  CMatrix h = 0.5 * (a + a.adjoint());
  h -= (h.trace() / static_cast<double>(d)) * CMatrix::Identity(d, d);
  return h;
}

CMatrix random_psd(Rng& rng, int d) {
  const CMatrix a = random_complex(rng, d);
  return a * a.adjoint();
}

RMatrix random_spd(Rng& rng, int n, double ridge = 0.1) {
  std::normal_distribution<double> g;
  RMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() + ridge * RMatrix::Identity(n, n);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<ParametricModel> all_models() {
  std::vector<ParametricModel> out;
  for (const auto& name : builtin_names()) out.push_back(make_builtin(name, name == "C" ? std::vector<double>{0.6} : std::vector<double>{}));
  return out;
}

std::string where(const std::string& model, const RVector& theta) {
  std::ostringstream os;
  os.precision(6);
  os << model << " at (";
  for (Eigen::Index i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta(i);
  os << ")";
  return os.str();
}

// Keeps the largest violation and where it happened.
struct Worst {
  Outcome out{-std::numeric_limits<double>::infinity(), 0, ""};
  void add(double v, const std::function<std::string()>& detail) {
    ++out.samples;
    if (v > out.violation) {
      out.violation = v;
      out.detail = detail();
    }
  }
};

double log_relative_gap(double la, double lb) { return std::abs(std::expm1(la - lb)); }

std::vector<Property> make_properties() {
  std::vector<Property> ps;

  // linalg-core
  ps.push_back({"linalg.sld_solution", 1e-9, false, [](Context& c) {
                  Worst w;
                  for (int d = 2; d <= 4; ++d) {
                    for (int k = 0; k < c.count(50); ++k) {
                      const CMatrix rho = random_state(c.rng, d);
                      const CMatrix drho = random_traceless(c.rng, d);
                      const CMatrix L = solve_sld(rho, drho, c.tol);
                      const double scale = std::max(1.0, max_abs(L));
                      const double v = std::max({hermitian_defect(L), max_abs(0.5 * (rho * L + L * rho) - drho),
                                                 std::abs((rho * L).trace()) / scale});
                      w.add(v, [&] { return "d=" + std::to_string(d); });
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"linalg.fidelity_symmetry", 1e-9, false, [](Context& c) {
                  Worst w;
                  for (int d = 2; d <= 3; ++d) {
                    for (int k = 0; k < c.count(100); ++k) {
                      const CMatrix a = random_psd(c.rng, d), b = random_psd(c.rng, d);
                      const double fab = fidelity(a, b, c.tol), fba = fidelity(b, a, c.tol);
                      w.add(std::abs(fab - fba) / std::max(1.0, fab), [&] { return "d=" + std::to_string(d); });
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"linalg.psd_sqrt_roundtrip", 1e-9, false, [](Context& c) {
                  Worst w;
                  for (int d = 2; d <= 4; ++d) {
                    for (int k = 0; k < c.count(50); ++k) {
                      const CMatrix a = random_psd(c.rng, d);
                      const CMatrix r = psd_sqrt(a, c.tol);
                      w.add(max_abs(r * r - a) / std::max(1.0, max_abs(a)), [&] { return "d=" + std::to_string(d); });
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"linalg.projector_completeness", 1e-10, false, [](Context& c) {
                  Worst w;
                  for (int d = 2; d <= 4; ++d) {
                    for (int k = 0; k < c.count(50); ++k) {
                      const EigenDecomposition e = eig_hermitian(random_traceless(c.rng, d), c.tol);
                      CMatrix sum = CMatrix::Zero(d, d);
                      for (const auto& p : e.projectors) sum += p;
                      w.add(max_abs(sum - CMatrix::Identity(d, d)), [&] { return "d=" + std::to_string(d); });
                    }
                  }
                  return w.out;
                }});

  // models
  ps.push_back({"models.states_valid", 1e-10, false, [](Context& c) {
                  Worst w;
                  for (const auto& model : all_models()) {
                    for (int k = 0; k < c.count(50); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.0, c.tol);
                      const CMatrix rho = evaluate(model, th, c.tol);
                      const double v = std::max({-min_eigenvalue(rho), std::abs(rho.trace().real() - 1.0),
                                                 std::abs(rho.trace().imag()), hermitian_defect(rho)});
                      w.add(v, [&] { return where(model.name, th); });
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"models.fd_matches_closed_form", 1e-6, false, [](Context& c) {
                  Worst w;
                  for (const auto& model : all_models()) {
                    if (!model.has_closed_derivatives()) continue;
                    for (int k = 0; k < c.count(20); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.02, c.tol);
                      const auto closed = model.deriv_fn(th);
                      const auto fd = finite_difference_derivatives(model, th, c.tol);
                      for (std::size_t i = 0; i < closed.size(); ++i) {
                        const double v = max_abs(fd[i] - closed[i]) / std::max(1e-3, max_abs(closed[i]));
                        w.add(v, [&] { return where(model.name, th) + ", parameter " + std::to_string(i + 1); });
                      }
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"models.orthogonalized_block_diagonal", 1e-8, false, [](Context& c) {
                  Worst w;
                  for (const auto& model : all_models()) {
                    if (model.name == "E" || model.name == "F") continue;
                    const ParametricModel ortho = orthogonalize(model, builtin_reparametrization(model), c.tol);
                    for (int k = 0; k < c.count(20); ++k) {
                      const RVector xi = sample_interior(ortho, c.rng, 0.02, c.tol);
                      const RMatrix G = sld_fisher(ortho, xi, c.tol).G;
                      const double v = G.topRightCorner(ortho.m, ortho.n - ortho.m).cwiseAbs().maxCoeff();
                      w.add(v, [&] { return where(ortho.name, xi); });
                    }
                  }
                  return w.out;
                }});

  // fisher
  ps.push_back({"fisher.data_processing", 1e-8, false, [](Context& c) {
                  Worst w;
                  for (const auto& model : all_models()) {
                    for (int k = 0; k < c.count(10); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.02, c.tol);
                      const RMatrix G = sld_fisher(model, th, c.tol).G;
                      for (int p = 0; p < c.count(100); ++p) {
                        const RMatrix J = classical_fisher(model, th, random_qubit_pvm(c.rng), c.tol).J;
                        w.add(-min_eigenvalue(RMatrix(G - J)), [&] { return where(model.name, th); });
                      }
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"fisher.schur_inequality", 1e-10, false, [](Context& c) {
                  Worst w;
                  auto check = [&](const RMatrix& J, int m, const std::string& at) {
                    const RMatrix sup = J.inverse().topLeftCorner(m, m);
                    const RMatrix inv_block = J.topLeftCorner(m, m).inverse();
                    const double scale = std::max(1.0, sup.cwiseAbs().maxCoeff());
                    w.add(-min_eigenvalue(RMatrix(sup - inv_block)) / scale, [&] { return at; });
                  };
                  for (const auto& model : all_models()) {
                    for (int k = 0; k < c.count(10); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.02, c.tol);
                      check(sld_fisher(model, th, c.tol).G, model.m, where(model.name, th) + " (SLD)");
                      const ClassicalFisher cf = classical_fisher(model, th, random_povm(c.rng, 4), c.tol);
                      if (cf.rank == model.n && condition_number(cf.J) < c.tol.singular_condition)
                        check(cf.J, model.m, where(model.name, th) + " (classical)");
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"fisher.gill_massar", 1e-8, false, [](Context& c) {
                  Worst w;
                  for (const auto& model : all_models()) {
                    for (int k = 0; k < c.count(10); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.02, c.tol);
                      const RMatrix G_inv = sld_fisher(model, th, c.tol).G_inv;
                      for (int p = 0; p < c.count(20); ++p) {
                        const RMatrix J = classical_fisher(model, th, random_qubit_pvm(c.rng), c.tol).J;
                        w.add((J * G_inv).trace() - 1.0, [&] { return where(model.name, th); });
                      }
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"fisher.dual_basis", 1e-8, false, [](Context& c) {
                  Worst w;
                  for (const auto& model : all_models()) {
                    for (int k = 0; k < c.count(10); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.02, c.tol);
                      const CMatrix rho = evaluate(model, th, c.tol);
                      const FisherBundle fb = sld_fisher(model, th, c.tol);
                      double v = 0.0;
                      for (int i = 0; i < model.n; ++i)
                        for (int j = 0; j < model.n; ++j)
                          v = std::max(v, std::abs(sld_inner(rho, fb.duals[i], fb.slds[j]) - (i == j ? 1.0 : 0.0)));
                      w.add(v, [&] { return where(model.name, th); });
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"fisher.unbiasedness_survives_reparametrization", 1e-6, false, [](Context& c) {
                  Worst w;
                  for (const auto& model : all_models()) {
                    if (model.name == "E" || model.name == "F") continue;
                    const Reparametrization repar = builtin_reparametrization(model);
                    const ParametricModel ortho = orthogonalize(model, repar, c.tol);
                    for (int k = 0; k < c.count(5); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.05, c.tol);
                      const Povm povm = random_povm(c.rng, 4);
                      Estimator est;
                      try {
                        est = locally_unbiased_estimator(model, th, povm, Scope::Interest, c.tol);
                      } catch (const Error& e) {
                        if (e.code() == ErrorCode::SingularNuisanceScores) continue;
                        throw;
                      }
                      const RVector xi = repar.inverse(th);
                      const UnbiasednessReport r = check_local_unbiasedness(ortho, xi, povm, est, c.tol);
                      w.add(std::max(r.mean_residual, r.derivative_residual), [&] { return where(ortho.name, xi); });
                    }
                  }
                  return w.out;
                }});

  // bounds
  ps.push_back({"bounds.nagaoka_exceeds_sld", 0.0, true, [](Context& c) {
                  Worst w;
                  for (int k = 0; k < c.count(100); ++k) {
                    const RMatrix W = random_spd(c.rng, 2), G_inv = random_spd(c.rng, 2);
                    const double s = sld_cr_bound(W, G_inv), nb = nagaoka_bound(W, G_inv, c.tol);
                    w.add((s - nb) / std::max(1.0, s), [&] { return "random 2x2 pair"; });
                  }
                  return w.out;
                }});
  ps.push_back({"bounds.nui11_not_below_weight_limit", 1e-9, false, [](Context& c) {
                  Worst w;
                  const RMatrix one = RMatrix::Identity(1, 1);
                  for (const auto& model : all_models()) {
                    if (model.n != 2 || model.m != 1) continue;
                    for (int k = 0; k < c.count(10); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.02, c.tol);
                      const RMatrix G_inv = sld_fisher(model, th, c.tol).G_inv;
                      const double limit = weight_limit_bound(WeightLimitKind::Nagaoka11, one, G_inv, c.tol).value;
                      for (int j = 0; j < c.count(10); ++j) {
                        const double V_NN = G_inv(1, 1) * (1.0 + std::exp(uniform(c.rng, -4.0, 4.0)));
                        const double V_IN = G_inv(0, 1) + uniform(c.rng, -2.0, 2.0);
                        const double v = nui_bound_11(G_inv, V_IN, V_NN, c.tol).value;
                        w.add((limit - v) / std::max(1.0, limit), [&] { return where(model.name, th); });
                      }
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"bounds.nui12_exceeds_g11", 0.0, true, [](Context& c) {
                  Worst w;
                  for (int k = 0; k < c.count(100); ++k) {
                    const double g11 = std::exp(uniform(c.rng, -3.0, 3.0));
                    const RMatrix G_NN = random_spd(c.rng, 2);
                    const RMatrix V_NN = G_NN + (G_NN.determinant() + 1.0) * random_spd(c.rng, 2, 1.0);
                    BoundResult r;
                    try {
                      r = nui_bound_12(g11, G_NN, V_NN, c.tol);
                    } catch (const Error& e) {
                      if (e.code() == ErrorCode::DeltaOutOfRange) continue;
                      throw;
                    }
                    w.add((g11 - r.value) / g11, [&] { return "delta_N=" + std::to_string(r.component("delta_N")); });
                  }
                  return w.out;
                }});
  ps.push_back({"bounds.elimination_direct_and_psd", 1e-8, false, [](Context& c) {
                  Worst w;
                  for (int k = 0; k < c.count(100); ++k) {
                    const int n = 2 + static_cast<int>(c.rng() % 3);
                    const int m = (n > 2 && c.rng() % 2) ? 2 : 1;
                    const RMatrix M = random_spd(c.rng, n), W_I = random_spd(c.rng, m);
                    const EliminationResult r = classical_weight_elimination(M, W_I, c.tol);
                    const double scale = std::max(1.0, std::abs(r.bound.value));
                    const double wscale = std::max(1.0, r.bound.optimal_weights->cwiseAbs().maxCoeff());
                    const double v = std::max(std::abs(r.direct - r.bound.value) / scale,
                                              -min_eigenvalue(*r.bound.optimal_weights) / wscale);
                    w.add(v, [&] { return "n=" + std::to_string(n) + ", m=" + std::to_string(m); });
                  }
                  return w.out;
                }});
  ps.push_back({"bounds.nui11_nuisance_rescaling", 1e-9, false, [](Context& c) {
                  Worst w;
                  for (int k = 0; k < c.count(100); ++k) {
                    const RMatrix G_inv = random_spd(c.rng, 2);
                    const double V_NN = G_inv(1, 1) + std::exp(uniform(c.rng, -3.0, 3.0));
                    const double V_IN = G_inv(0, 1) + uniform(c.rng, -1.0, 1.0);
                    const double a = (c.rng() % 2 ? 1.0 : -1.0) * std::exp(uniform(c.rng, -2.3, 2.3));
                    RMatrix D = RMatrix::Identity(2, 2);
                    D(1, 1) = a;
                    const double v0 = nui_bound_11(G_inv, V_IN, V_NN, c.tol).value;
                    const double v1 = nui_bound_11(RMatrix(D * G_inv * D), a * V_IN, a * a * V_NN, c.tol).value;
                    w.add(std::abs(v1 - v0) / std::max(1.0, v0), [&] { return "scale " + std::to_string(a); });
                  }
                  return w.out;
                }});

  // povm
  ps.push_back({"povm.candidates_valid", 0.0, false, [](Context& c) {
                  Worst w;
                  for (int k = 0; k < c.count(100); ++k) {
                    const int outcomes = 2 + static_cast<int>(c.rng() % 4);
                    const Povm p = random_povm(c.rng, outcomes);
                    w.add(validate_povm(p, c.tol).valid ? 0.0 : 1.0, [&] { return "random POVM"; });
                    const Povm mix = randomize_povms(p, random_qubit_pvm(c.rng), uniform(c.rng, 0.01, 0.99), c.tol);
                    w.add(validate_povm(mix, c.tol).valid ? 0.0 : 1.0, [&] { return "randomized POVM"; });
                  }
                  OracleConfig cfg;
                  cfg.grid_density = 16;
                  cfg.refinement_rounds = 1;
                  cfg.use_mixtures = true;
                  cfg.use_random = true;
                  cfg.random_candidates = 100;
                  cfg.seed = c.rng();
                  for (const auto& model : all_models()) {
                    const RVector th = sample_interior(model, c.rng, 0.05, c.tol);
                    const RMatrix W = RMatrix::Identity(model.m, model.m);
                    const OracleResult r = oracle_minimize(model, th, W, cfg, c.tol);
                    w.add(validate_povm(r.povm, c.tol).valid ? 0.0 : 1.0, [&] { return "oracle on " + where(model.name, th); });
                  }
                  return w.out;
                }});
  ps.push_back({"povm.oracle_monotone", 0.0, false, [](Context& c) {
                  Worst w;
                  OracleConfig cfg;
                  cfg.grid_density = 16;
                  cfg.refinement_rounds = 3;
                  cfg.use_mixtures = true;
                  cfg.mixture_grid_density = 8;
                  for (const auto& model : all_models()) {
                    const RVector th = sample_interior(model, c.rng, 0.05, c.tol);
                    const OracleResult r = oracle_minimize(model, th, RMatrix::Identity(model.m, model.m), cfg, c.tol);
                    for (std::size_t i = 1; i < r.trace.size(); ++i)
                      w.add(r.trace[i] - r.trace[i - 1], [&] { return where(model.name, th); });
                  }
                  return w.out;
                }});
  ps.push_back({"povm.oracle_not_below_limit", 1e-9, false, [](Context& c) {
                  Worst w;
                  OracleConfig cfg;
                  cfg.grid_density = 16;
                  cfg.refinement_rounds = 2;
                  cfg.use_mixtures = true;
                  cfg.mixture_grid_density = 8;
                  const RMatrix one = RMatrix::Identity(1, 1);
                  for (const auto& model : all_models()) {
                    if (model.n != 2 || model.m != 1) continue;
                    for (int k = 0; k < c.count(3); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.05, c.tol);
                      const double limit = sld_fisher(model, th, c.tol).G_inv(0, 0);
                      const double v = oracle_minimize(model, th, one, cfg, c.tol).value;
                      w.add((limit - v) / std::max(1.0, limit), [&] { return where(model.name, th); });
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"povm.model_b_sigma1_optimal", 1e-9, false, [](Context& c) {
                  Worst w;
                  const ParametricModel B = make_builtin("B");
                  OracleConfig cfg;
                  cfg.grid_density = 16;
                  cfg.refinement_rounds = 2;
                  for (int k = 0; k < c.count(10); ++k) {
                    const RVector th = sample_interior(B, c.rng, 0.05, c.tol);
                    const OracleResult r = oracle_minimize(B, th, RMatrix::Identity(1, 1), cfg, c.tol);
                    double v = 0.0;
                    for (const auto& e : r.effects) {
                      const double nr = e.r.norm();
                      if (nr > 1e-12) v = std::max(v, 1.0 - std::abs(e.r(0)) / nr);
                    }
                    w.add(v, [&] { return where("B", th); });
                  }
                  return w.out;
                }});
  ps.push_back({"povm.randomize_additivity", 1e-8, false, [](Context& c) {
                  Worst w;
                  for (const auto& model : all_models()) {
                    for (int k = 0; k < c.count(10); ++k) {
                      const RVector th = sample_interior(model, c.rng, 0.02, c.tol);
                      const Povm a = random_povm(c.rng, 3), b = random_qubit_pvm(c.rng);
                      const double eps = uniform(c.rng, 0.01, 0.99);
                      const RMatrix Ja = classical_fisher(model, th, a, c.tol).J;
                      const RMatrix Jb = classical_fisher(model, th, b, c.tol).J;
                      const RMatrix Jm = classical_fisher(model, th, randomize_povms(a, b, eps, c.tol), c.tol).J;
                      const RMatrix expect = (1.0 - eps) * Ja + eps * Jb;
                      w.add((Jm - expect).cwiseAbs().maxCoeff() / std::max(1.0, expect.cwiseAbs().maxCoeff()),
                            [&] { return where(model.name, th); });
                    }
                  }
                  return w.out;
                }});

  // metrology
  ps.push_back({"metrology.schur_ordering", 1e-9, false, [](Context&) {
                  Worst w;
                  for (const auto& preset : noise_preset_names()) {
                    for (int variant = 1; variant <= 3; ++variant) {
                      const NoiseModelSpec spec = noise_preset(preset, variant);
                      for (const auto& p : fisher_time_series(spec, default_time_grid(spec)).points) {
                        if (p.status != PointStatus::Ok) continue;
                        w.add(std::expm1(p.log_g11_partial - p.log_g11),
                              [&] { return preset + " variant " + std::to_string(variant) + " t=" + std::to_string(p.t); });
                      }
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"metrology.variant3_equality", 1e-9, false, [](Context&) {
                  Worst w;
                  for (const auto& preset : noise_preset_names()) {
                    const NoiseModelSpec spec = noise_preset(preset, 3);
                    for (const auto& p : fisher_time_series(spec, default_time_grid(spec)).points) {
                      if (p.status != PointStatus::Ok) continue;
                      w.add(log_relative_gap(p.log_g11_partial, p.log_g11),
                            [&] { return preset + " t=" + std::to_string(p.t); });
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"metrology.variant1_approaches_variant2", 1e-3, false, [](Context&) {
                  Worst w;
                  const NoiseModelSpec s1 = noise_preset("fig1a", 1), s2 = noise_preset("fig1a", 2);
                  const double t = 30.0 / s1.gamma_corr;
                  const FisherPoint a = fisher_point(s1, t), b = fisher_point(s2, t);
                  if (a.status != PointStatus::Ok || b.status != PointStatus::Ok) {
                    w.add(std::numeric_limits<double>::infinity(), [&] { return "singular point at Gamma t = 30"; });
                    return w.out;
                  }
                  w.add(log_relative_gap(a.log_g11, b.log_g11), [&] { return "g11 at Gamma t = 30"; });
                  w.add(log_relative_gap(a.log_g11_partial, b.log_g11_partial),
                        [&] { return "partial g11 at Gamma t = 30"; });
                  return w.out;
                }});
  ps.push_back({"metrology.bloch_norm_nonincreasing", 1e-12, false, [](Context&) {
                  Worst w;
                  for (const auto& preset : noise_preset_names()) {
                    for (int variant = 1; variant <= 3; ++variant) {
                      const NoiseModelSpec spec = noise_preset(preset, variant);
                      double prev = spec.s0.norm();
                      for (double t : default_time_grid(spec)) {
                        const double cur = evolve_bloch(spec, t).norm();
                        w.add(cur - prev, [&] { return preset + " variant " + std::to_string(variant) + " t=" + std::to_string(t); });
                        prev = cur;
                      }
                    }
                  }
                  return w.out;
                }});
  ps.push_back({"metrology.derivatives_match_fd", 1e-6, false, [](Context&) {
                  Worst w;
                  for (const auto& preset : noise_preset_names()) {
                    for (int variant = 1; variant <= 3; ++variant) {
                      const NoiseModelSpec spec = noise_preset(preset, variant);
                      for (double gt : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 30.0}) {
                        const double t = gt / spec.gamma_corr;
                        const auto cf = bloch_derivatives(spec, t);
                        const auto fd = bloch_derivatives_fd(spec, t);
                        for (Eigen::Index j = 0; j < cf.cols(); ++j) {
                          const double scale = cf.col(j).cwiseAbs().maxCoeff();
                          if (scale == 0.0) continue;
                          w.add((cf.col(j) - fd.col(j)).cwiseAbs().maxCoeff() / scale, [&] {
                            return preset + " variant " + std::to_string(variant) + " Gamma t=" + std::to_string(gt);
                          });
                        }
                      }
                    }
                  }
                  return w.out;
                }});
  return ps;
}

const std::vector<Property>& registry() {
  static const std::vector<Property> ps = make_properties();
  return ps;
}

const Property& find(const std::string& name) {
  for (const auto& p : registry())
    if (p.name == name) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown property '" + name + "'");
}

}  // namespace

std::vector<std::string> property_names() {
  std::vector<std::string> out;
  for (const auto& p : registry()) out.push_back(p.name);
  return out;
}

double property_tolerance(const std::string& name) { return find(name).tolerance; }

std::vector<PropertyResult> run_properties(const PropertyConfig& cfg) {
  for (const auto& [name, _] : cfg.tolerance_overrides) find(name);
  for (const auto& name : cfg.exclude) find(name);
  if (!(cfg.sample_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample scale must be positive");

  std::vector<PropertyResult> out;
  std::uint64_t index = 0;
  for (const auto& p : registry()) {
    ++index;
    if (cfg.exclude.count(p.name)) continue;
    PropertyResult r;
    r.name = p.name;
    r.strict = p.strict;
    const auto it = cfg.tolerance_overrides.find(p.name);
    r.tolerance = it == cfg.tolerance_overrides.end() ? p.tolerance : it->second;
    // Each property draws from its own stream so exclusions do not shift the others.
    Context ctx{Rng(cfg.seed * 0x9E3779B97F4A7C15ULL + index), cfg.sample_scale, cfg.tol};
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome o = p.run(ctx);
      r.violation = o.violation;
      r.samples = o.samples;
      r.detail = o.detail;
      r.pass = o.samples > 0 && (p.strict ? o.violation < r.tolerance : o.violation <= r.tolerance);
      if (o.samples == 0) r.detail = "no samples evaluated";
    } catch (const std::exception& e) {
      r.pass = false;
      r.violation = std::numeric_limits<double>::infinity();
      r.detail = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(r);
  }
  return out;
}

}  // namespace qnuis
