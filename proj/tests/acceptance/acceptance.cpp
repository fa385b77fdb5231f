// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qnuis/bounds.hpp"
#include "qnuis/errors.hpp"
#include "qnuis/fisher.hpp"
#include "qnuis/metrology.hpp"
#include "qnuis/models.hpp"
#include "qnuis/oracle.hpp"
#include "qnuis/povm.hpp"

using namespace qnuis;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  double time_limit;
  std::function<Outcome()> body;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel_err(const RMatrix& a, const RMatrix& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / std::max(1e-300, ref.cwiseAbs().maxCoeff());
}

// Draws a model with random fixed parameters where the model has any.
struct Drawn {
  ParametricModel model;
  std::vector<double> fixed;
};

Drawn draw_model(const std::string& name, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::vector<double> fixed;
  if (name == "C") fixed = {u(rng)};
  if (name == "F") {
    Eigen::Vector3d s0 = oracle::random_direction(rng) * std::uniform_real_distribution<double>(0.5, 1.0)(rng);
    if (std::hypot(s0(0), s0(1)) < 0.1) s0(0) = 0.3;
    s0 *= std::min(1.0, 1.0 / s0.norm());
    fixed = {s0(0), s0(1), s0(2)};
  }
  return {make_builtin(name, fixed), fixed};
}

Outcome ac1() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int points = 0;
  for (const auto& name : builtin_names()) {
    for (int k = 0; k < 20; ++k) {
      const Drawn d = draw_model(name, rng);
      const RVector t = sample_interior(d.model, rng);
      const RMatrix ref = oracle::inverse_fisher(name, t, d.fixed);
      worst = std::max(worst, rel_err(sld_fisher(d.model, t).G_inv, ref));
      ++points;
    }
  }
  return {worst < 1e-8, "points=" + std::to_string(points) + " max_rel_err=" + fmt(worst)};
}

Outcome ac2() {
  std::mt19937_64 rng(202);
  OracleConfig cfg;
  cfg.grid_density = 64;
  cfg.refinement_rounds = 3;
  double worst = 0.0;
  const RMatrix W = RMatrix::Identity(1, 1);
  for (const std::string name : {"A", "B", "C"}) {
    for (int k = 0; k < 5; ++k) {
      const Drawn d = draw_model(name, rng);
      const RVector t = sample_interior(d.model, rng);
      const RMatrix G_inv = oracle::inverse_fisher(name, t, d.fixed);
      const double closed = G_inv(0, 0);
      const auto kind = d.model.n == 2 ? WeightLimitKind::Nagaoka11 : WeightLimitKind::Hgm12;
      const double limit = weight_limit_bound(kind, W, G_inv).value;
      const double value = oracle_minimize(d.model, t, W, cfg).value;
      worst = std::max({worst, std::abs(value - closed) / closed, std::abs(limit - closed) / closed});
    }
  }
  return {worst < 1e-3, "points=15 max_rel_gap=" + fmt(worst)};
}

Outcome ac3() {
  OracleConfig cfg;
  const RMatrix W = RMatrix::Identity(1, 1);
  const double t0 = 0.6, t1 = 0.5, t2 = 0.1;
  const double c_ref = 1.0 - t1 * t1 / (1.0 - t0 * t0), b_ref = 1.0 - t1 * t1;
  const double c = oracle_minimize(make_builtin("C", {t0}), (RVector(2) << t1, t2).finished(), W, cfg).value;
  const double b = oracle_minimize(make_builtin("B"), (RVector(3) << t1, t2, t0).finished(), W, cfg).value;
  const double ec = std::abs(c - c_ref) / c_ref, eb = std::abs(b - b_ref) / b_ref;
  return {ec < 1e-3 && eb < 1e-3 && c < b, "C=" + fmt(c) + " (ref 0.609375) B=" + fmt(b) + " (ref 0.75)"};
}

oracle::BlochPoint bloch_point(const ParametricModel& model, const RVector& t) {
  return {bloch_vector(model, t), bloch_jacobian(model, t)};
}

std::vector<oracle::Effect> as_effects(const Povm& p) {
  std::vector<oracle::Effect> out;
  for (const auto& e : p.effects) out.push_back({0.5 * e.trace().real(), 0.5 * pauli::components(e)});
  return out;
}

Outcome ac4() {
  std::mt19937_64 rng(404);
  double worst_det = INFINITY, worst_gm = -INFINITY, worst_v = 0.0;
  int pairs = 0, biased = 0;
  for (const std::string name : {"A", "E"}) {
    const auto model = make_builtin(name);
    for (int k = 0; k < 100; ++k) {
      const RVector t = sample_interior(model, rng);
      const Povm p = random_povm(rng, 4);
      const Estimator est = locally_unbiased_estimator(model, t, p, Scope::Full);
      if (!check_local_unbiasedness(model, t, p, est).pass) ++biased;
      const RMatrix V = mse_matrix(model, t, p, est);
      const RMatrix J_ref = oracle::classical_fisher(oracle::bloch(name, t), as_effects(p));
      const RMatrix V_ref = J_ref.inverse();
      worst_v = std::max(worst_v, rel_err(V, V_ref));
      const RMatrix G_inv = oracle::inverse_fisher(name, t);
      worst_det = std::min({worst_det, tradeoff_det_check(V, G_inv), tradeoff_det_check(V_ref, G_inv)});
      worst_gm = std::max(worst_gm, (classical_fisher(model, t, p).J * G_inv).trace());
      ++pairs;
    }
  }
  const bool pass = biased == 0 && worst_v < 1e-8 && worst_det >= -1e-9 && worst_gm <= 1.0 + 1e-8;
  return {pass, "pairs=" + std::to_string(pairs) + " min_det_gap=" + fmt(worst_det) + " max_gill_massar=" +
                    fmt(worst_gm) + " V_vs_oracle=" + fmt(worst_v) + " biased=" + std::to_string(biased)};
}

Outcome ac5() {
  std::mt19937_64 rng(505);
  double worst_grid = 0.0, worst_schur = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 3;
    const int m = n == 2 ? 1 : 1 + (k / 3) % 2;
    const RMatrix M = oracle::random_spd(rng, n);
    const RMatrix W = oracle::random_spd(rng, m);
    const double v = classical_weight_elimination(M, W).bound.value;
    const double schur = (W * M.inverse().topLeftCorner(m, m).inverse()).trace();
    const double grid = oracle::grid_elimination(M, W);
    const double scale = std::max(1.0, std::abs(schur));
    worst_grid = std::max(worst_grid, std::abs(v - grid) / scale);
    worst_schur = std::max(worst_schur, std::abs(v - schur) / scale);
  }
  return {worst_grid < 1e-4 && worst_schur < 1e-10,
          "cases=100 max_grid_gap=" + fmt(worst_grid) + " max_schur_gap=" + fmt(worst_schur)};
}

Outcome ac6() {
  bool a = true, b = true, c = true, d = true;
  double gap_a = 0.0, gap_b = -INFINITY, gap_c = -INFINITY, gap_d = 0.0;
  for (const auto& preset : noise_preset_names()) {
    const auto grid = default_time_grid(noise_preset(preset, 1));
    const auto v1 = fisher_time_series(noise_preset(preset, 1), grid);
    const auto v2 = fisher_time_series(noise_preset(preset, 2), grid);
    const auto v3 = fisher_time_series(noise_preset(preset, 3), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& p3 = v3.points[i];
      const double e3 = p3.status == PointStatus::Ok ? std::abs(p3.g11_partial - p3.g11) / p3.g11 : INFINITY;
      gap_a = std::max(gap_a, e3);
      for (const auto* s : {&v1, &v2}) {
        const auto& p = s->points[i];
        const double diff = p.status == PointStatus::Ok ? p.log_g11_partial - p.log_g11 : INFINITY;
        gap_b = std::max(gap_b, diff);
        if (s == &v2) gap_c = std::max(gap_c, diff);
      }
    }
    // Gamma t = 30 is the last grid point.
    const auto& p1 = v1.points.back();
    const auto& p2 = v2.points.back();
    if (p1.status != PointStatus::Ok || p2.status != PointStatus::Ok) {
      gap_d = INFINITY;
    } else {
      gap_d = std::max({gap_d, std::abs(std::expm1(p1.log_g11 - p2.log_g11)),
                        std::abs(std::expm1(p1.log_g11_partial - p2.log_g11_partial))});
    }
  }
  a = gap_a <= 1e-9;
  b = gap_b <= 1e-12;
  c = gap_c < 0.0;
  d = gap_d <= 1e-3;
  auto tag = [](bool ok) { return ok ? "ok" : "FAIL"; };
  std::ostringstream os;
  os << "(a) " << tag(a) << " v3_gap=" << fmt(gap_a) << " (b) " << tag(b) << " max_log(partial/full)=" << fmt(gap_b)
     << " (c) " << tag(c) << " v2_max_log(partial/full)=" << fmt(gap_c) << " (d) " << tag(d)
     << " v1_vs_v2_rel_at_30=" << fmt(gap_d);
  return {a && b && c && d, os.str()};
}

Outcome ac7() {
  std::mt19937_64 rng(707);
  double recon = 0.0, herm = 0.0, mean = 0.0, dp = INFINITY, j_ref = 0.0;
  long pvms = 0;
  for (const auto& name : builtin_names()) {
    for (int k = 0; k < 10; ++k) {
      const Drawn d = draw_model(name, rng);
      const RVector t = sample_interior(d.model, rng);
      const CMatrix rho = evaluate(d.model, t);
      const auto drho = derivatives(d.model, t);
      const FisherBundle fb = sld_fisher(d.model, t);
      for (std::size_t i = 0; i < drho.size(); ++i) {
        const CMatrix& L = fb.slds[i];
        const double scale = std::max(1.0, drho[i].cwiseAbs().maxCoeff());
        recon = std::max(recon, (0.5 * (rho * L + L * rho) - drho[i]).cwiseAbs().maxCoeff() / scale);
        herm = std::max(herm, hermitian_defect(L));
        mean = std::max(mean, std::abs((rho * L).trace()));
      }
      const auto ref_point = oracle::bloch(name, t, d.fixed);
      for (int q = 0; q < 10; ++q) {
        const Eigen::Vector3d u = oracle::random_direction(rng);
        const RMatrix J = classical_fisher(d.model, t, bloch_pvm(u)).J;
        const RMatrix Jr = oracle::bernoulli_fisher(ref_point, u);
        j_ref = std::max(j_ref, (J - Jr).cwiseAbs().maxCoeff() / std::max(1.0, Jr.cwiseAbs().maxCoeff()));
        const RMatrix gap = fb.G - J;
        dp = std::min(dp, min_eigenvalue(RMatrix(0.5 * (gap + gap.transpose()))));
        ++pvms;
      }
    }
  }
  const bool pass = recon < 1e-9 && herm < 1e-9 && mean < 1e-9 && dp >= -1e-8 && j_ref < 1e-9;
  return {pass, "pvms_per_model=" + std::to_string(pvms / 6) + " recon=" + fmt(recon) + " herm=" + fmt(herm) +
                    " tr_rhoL=" + fmt(mean) + " min_eig(G-J)=" + fmt(dp) + " J_vs_oracle=" + fmt(j_ref)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", 5.0, ac1},  {"AC2", 60.0, ac2}, {"AC3", 0.0, ac3}, {"AC4", 30.0, ac4},
      {"AC5", 30.0, ac5}, {"AC6", 60.0, ac6}, {"AC7", 30.0, ac7},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit <= 0.0 || secs < c.time_limit;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %s %s (%.2f s", c.id.c_str(), pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    if (c.time_limit > 0.0) std::printf(", limit %.0f s%s", c.time_limit, in_time ? "" : ", exceeded");
    std::printf(")\n");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
