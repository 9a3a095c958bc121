#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gsq/brownian.hpp"
#include "gsq/config.hpp"
#include "gsq/harmonic.hpp"
#include "gsq/quantization.hpp"
#include "gsq/report.hpp"
#include "gsq/rough_path.hpp"
#include "gsq/smooth_paths.hpp"

namespace gsq::harness {

/// Shared objects built once per run.
struct Context {
  std::shared_ptr<const lie::AlgebraModel> algebra;
  std::shared_ptr<const lie::CartanRootData> roots;
  std::shared_ptr<const quantization::MomentMap> moment;

  explicit Context(const ExperimentConfig& c)
      : algebra(std::make_shared<const lie::AlgebraModel>(lie::build_algebra(c.group))),
        roots(std::make_shared<const lie::CartanRootData>(lie::build_cartan_root_data(algebra))),
        moment(std::make_shared<const quantization::MomentMap>(algebra)) {}

  repr::Irrep irrep(const std::vector<int>& labels) const {
    return repr::build_irrep(lie::weight_from_dynkin(labels, *roots), roots);
  }
  quantization::OrbitFunction hamiltonian(const std::string& spec) const {
    return quantization::orbit_function_from_spec(spec, moment);
  }
};

namespace detail {

inline void require_su2(const ExperimentConfig& c, const Context& ctx) {
  if (ctx.algebra->matrix_dim != 2) throw UnsupportedGroupError(c.name + " is implemented for SU2 only");
}

inline std::string label(const std::vector<int>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? " " : "") + std::to_string(w[i]);
  return s;
}

inline Vec unit_vector(const std::vector<cplx>& xs, int dim, const char* name) {
  if (static_cast<int>(xs.size()) != dim)
    throw ConfigParseError(std::string("hamiltonian.") + name + ": expected " + std::to_string(dim) + " components", 0,
                           std::string("hamiltonian.") + name);
  Vec v(dim);
  for (int k = 0; k < dim; ++k) v(k) = xs[k];
  if (v.norm() == 0.0)
    throw ConfigParseError(std::string("hamiltonian.") + name + ": zero vector", 0, std::string("hamiltonian.") + name);
  return v.normalized();
}

/// Sanitized file stem for a Hamiltonian id.
inline std::string stem(const std::string& id) {
  std::string s;
  for (char ch : id) s += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return s;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += std::log(x[k]) / n;
    my += std::log(y[k]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
  }
  return sxy / sxx;
}

/// Errors along a schedule may rise by at most one standard error of the
/// later point.
inline bool nonincreasing_with_slack(const std::vector<double>& err, const std::vector<double>& sigma) {
  for (std::size_t k = 1; k < err.size(); ++k)
    if (err[k] > err[k - 1] + sigma[k]) return false;
  return true;
}

/// <u | e^{-i t Q(h)} v>. The path integrals converge to this sign of the
/// exponent; see the README.
inline cplx matrix_exponential_oracle(const repr::Irrep& r, const quantization::OrbitFunction& h, double t,
                                      const Vec& u, const Vec& v) {
  const Mat q = quantization::gs_quantize(r, h, quantization::haar_quadrature(quantization::default_order(r, h)));
  return u.dot(quantization::unitary_evolve(q, -t) * v);
}

inline void run_spectrum(const ExperimentConfig& c, const Context& ctx, ExperimentRecord& rec) {
  require_su2(c, ctx);
  check_memory(c);
  const auto pw = harmonic::build_truncation(ctx.roots, c.cutoff);
  auto& t = rec.add_table("spectrum", {"lambda", "two_j", "min_eigenvalue", "oracle", "abs_error", "multiplicity",
                                       "expected_multiplicity", "decomposition_residual"});
  for (const auto& labels : c.lambda) {
    const repr::Irrep r = ctx.irrep(labels);
    const auto ls = harmonic::assemble_laplacians(pw, r.lambda);
    const RVec ev = ls.magnetic.eigenvalues();
    const double oracle = lie::dual_pairing(2.0 * r.lambda + ctx.roots->rho, ctx.roots->rho, *ctx.roots);
    int mult = 0;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
      if (std::abs(ev(k) - ev(0)) < 1e-8) ++mult;
    const double err = std::abs(ev(0) - oracle);
    t.rows.push_back({label(labels), std::to_string(r.two_j), fmt(ev(0)), fmt(oracle), fmt(err), std::to_string(mult),
                      std::to_string(r.dim), fmt(ls.decomposition_residual)});
    rec.add_check("spectrum lambda=" + label(labels) + " min eigenvalue = <2 lambda + rho | rho>", err < 1e-9,
                  "error " + fmt(err));
    rec.add_check("spectrum lambda=" + label(labels) + " multiplicity = dim", mult == r.dim,
                  std::to_string(mult) + " vs " + std::to_string(r.dim));
  }
}

inline void run_quantize(const ExperimentConfig& c, const Context& ctx, ExperimentRecord& rec) {
  require_su2(c, ctx);
  check_memory(c);
  const auto pw = harmonic::build_truncation(ctx.roots, c.cutoff);
  auto& t = rec.add_table("quantize", {"lambda", "h_id", "order", "exact", "projection_residual", "hermitian_defect",
                                       "identity_defect"});
  auto& m = rec.add_table("quantize_matrix", {"lambda", "h_id", "row", "col", "re", "im"});
  for (const auto& labels : c.lambda) {
    const repr::Irrep r = ctx.irrep(labels);
    for (const auto& spec : c.hamiltonians) {
      const auto h = ctx.hamiltonian(spec);
      const auto q = quantization::haar_quadrature(quantization::default_order(r, h));
      const Mat qm = quantization::gs_quantize(r, h, q);
      const auto pq = quantization::project_quantize(pw, r, h, q);
      const double residual = (qm - pq.matrix).norm();
      double identity_defect = std::nan("");
      if (h.band == 0) {
        identity_defect = (qm - h.on_orbit(RVec::Zero(ctx.moment->dim())) * Mat::Identity(r.dim, r.dim)).norm();
        rec.add_check("quantize " + spec + " lambda=" + label(labels) + " is a multiple of the identity",
                      identity_defect < 1e-12, "defect " + fmt(identity_defect));
      }
      t.rows.push_back({label(labels), spec, std::to_string(q.order), pq.exact ? "true" : "false", fmt(residual),
                        fmt(hermitian_defect(qm)), fmt(identity_defect)});
      for (int i = 0; i < r.dim; ++i)
        for (int k = 0; k < r.dim; ++k)
          m.rows.push_back({label(labels), spec, std::to_string(i), std::to_string(k), fmt(qm(i, k).real()),
                            fmt(qm(i, k).imag())});
      rec.add_check("quantize " + spec + " lambda=" + label(labels) + " orbit integral = projection",
                    pq.exact && residual < 1e-8, "residual " + fmt(residual));
    }
  }
}

inline void run_propagate(const ExperimentConfig& c, const Context& ctx, ExperimentRecord& rec) {
  require_su2(c, ctx);
  check_memory(c);
  const auto pw = harmonic::build_truncation(ctx.roots, c.cutoff);
  const repr::Irrep r = ctx.irrep(c.lambda.front());
  const auto ls = harmonic::assemble_laplacians(pw, r.lambda);
  const auto g = harmonic::ground_space(ls.shifted, 0.0);
  const double eps1 = harmonic::first_positive_eigenvalue(ls.shifted);
  rng::Stream s(c.seed, 0, rng::kExperimentData);
  Vec coeff(g.basis.cols());
  for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) = cplx(s.normal(), s.normal());
  const Vec f = g.basis * coeff.normalized();

  auto& t = rec.add_table("propagate", {"lambda", "h_id", "r", "t", "error", "bound", "v_sup", "eps1"});
  for (const auto& spec : c.hamiltonians) {
    const auto h = ctx.hamiltonian(spec);
    if (h.band < 0) throw std::invalid_argument("propagate needs a band-limited Hamiltonian");
    const auto fn = [&](const repr::GroupElement& x) { return cplx(h.lift(x)); };
    const auto v = harmonic::multiplication_operator(pw, fn, quantization::haar_quadrature(c.cutoff + h.band + 1), h.band);
    // sup |h^| sampled on a fine node set (a lower estimate, so the bound is not loosened)
    const auto fine = quantization::haar_quadrature(2 * h.band + 8);
    double vsup = 0.0;
    for (const auto& x : fine.nodes) vsup = std::max(vsup, std::abs(h.lift(x)));
    const Vec target = harmonic::compressed_unitary_propagate(g, v, -c.t, f);
    std::vector<double> rs, errs;
    bool within = true;
    auto& plot = rec.add_plot("propagate_" + stem(spec), "r");
    for (double rr : c.r) {
      const double err = (harmonic::semigroup_propagate(ls.shifted, v, rr, c.t, f) - target).norm();
      const double bound = vsup / (eps1 * rr) * 1.1;
      within = within && err <= bound;
      rs.push_back(rr);
      errs.push_back(err);
      t.rows.push_back({label(c.lambda.front()), spec, fmt(rr), fmt(c.t), fmt(err), fmt(bound), fmt(vsup), fmt(eps1)});
      plot.points.push_back({rr, err, 0.0});
    }
    rec.add_check("propagate " + spec + " error within ||V|| / (eps1 r) (1 + 0.1)", within);
    if (rs.size() >= 2) {
      const double slope = loglog_slope(rs, errs);
      rec.summary["slope"][spec] = slope;
      rec.add_check("propagate " + spec + " log-log slope <= -0.9", slope <= -0.9, "slope " + fmt(slope));
    }
  }
}

inline std::vector<std::string> estimate_columns(bool with_n) {
  std::vector<std::string> cols = {"lambda", "h_id", "r"};
  if (with_n) cols.push_back("n");
  for (const char* k : {"t", "n_paths", "seed", "re", "im", "stderr", "oracle_re", "oracle_im", "n_steps", "plain_re",
                        "plain_im", "plain_stderr"})
    cols.push_back(k);
  return cols;
}

struct ScheduleEntry {
  double r;
  int n;
};

/// Result rows and checks shared by the two path-integral experiments.
inline void record_estimates(const ExperimentConfig& c, const repr::Irrep& r, const Vec& u, const Vec& v,
                             const std::vector<quantization::OrbitFunction>& hs,
                             const std::vector<ScheduleEntry>& schedule,
                             const std::vector<brownian::FkResult>& results, bool smooth, const std::string& x_label,
                             ExperimentRecord& rec) {
  const std::string name = smooth ? "smooth" : "brownian";
  auto& t = rec.add_table(name, estimate_columns(smooth));
  const cplx overlap = u.dot(v);
  for (std::size_t q = 0; q < hs.size(); ++q) {
    const cplx oracle = hs[q].is_zero() ? overlap : matrix_exponential_oracle(r, hs[q], c.t, u, v);
    auto& plot = rec.add_plot(name + "_" + std::to_string(q) + "_" + stem(hs[q].id), x_label);
    std::vector<double> errs, sigmas;
    bool zero_ok = true;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      const auto& e = results[k].estimates[q][0];
      const auto& p = results[k].plain[q][0];
      std::vector<std::string> row = {label(c.lambda.front()), hs[q].id, fmt(schedule[k].r)};
      if (smooth) row.push_back(std::to_string(schedule[k].n));
      for (const std::string& x :
           {fmt(c.t), std::to_string(c.paths), std::to_string(c.seed), fmt(e.value.real()), fmt(e.value.imag()),
            fmt(e.std_error), fmt(oracle.real()), fmt(oracle.imag()), std::to_string(results[k].n_steps),
            fmt(p.value.real()), fmt(p.value.imag()), fmt(p.std_error)})
        row.push_back(x);
      t.rows.push_back(row);
      const double err = std::abs(e.value - oracle);
      errs.push_back(err);
      sigmas.push_back(e.std_error);
      plot.points.push_back({smooth && x_label == "n" ? double(schedule[k].n) : schedule[k].r, err, e.std_error});
      if (hs[q].is_zero()) zero_ok = zero_ok && std::abs(p.value - overlap) <= 3.0 * p.std_error;
    }
    if (hs[q].is_zero()) {
      rec.add_check(name + " h=0 estimate = <u|v> within 3 std_error at every point", zero_ok);
      continue;
    }
    if (schedule.size() >= 2)
      rec.add_check(name + " " + hs[q].id + " error nonincreasing along the schedule (1 std_error slack)",
                    nonincreasing_with_slack(errs, sigmas));
    if (!smooth && schedule.back().r >= 64.0) {
      const double allowed = std::max(3.0 * sigmas.back(), 0.05);
      rec.add_check(name + " " + hs[q].id + " error at the largest r within max(3 std_error, 0.05)",
                    errs.back() <= allowed, "error " + fmt(errs.back()) + " allowed " + fmt(allowed));
    }
  }
}

inline void run_brownian(const ExperimentConfig& c, const Context& ctx, ExperimentRecord& rec) {
  require_su2(c, ctx);
  const repr::Irrep r = ctx.irrep(c.lambda.front());
  const Vec u = unit_vector(c.u, r.dim, "u"), v = unit_vector(c.v, r.dim, "v");
  brownian::FkQuery query;
  for (const auto& spec : c.hamiltonians) query.hamiltonians.push_back(ctx.hamiltonian(spec));
  query.pairs = {{u, v}};
  brownian::FkOptions o;
  o.workers = c.workers;
  o.steps_per_unit = c.steps_per_unit;
  o.n_steps = c.steps;
  o.control_variate = c.control_variate;
  o.mc_normalization = c.mc_normalization;
  o.config_hash = rec.config_hash;
  std::vector<ScheduleEntry> schedule;
  std::vector<brownian::FkResult> results;
  for (double rr : c.r) {
    schedule.push_back({rr, 0});
    results.push_back(brownian::fk_estimate(r, query, rr, c.t, c.paths, c.seed, o));
  }
  record_estimates(c, r, u, v, query.hamiltonians, schedule, results, false, "r", rec);
}

inline void run_smooth(const ExperimentConfig& c, const Context& ctx, ExperimentRecord& rec) {
  require_su2(c, ctx);
  const repr::Irrep r = ctx.irrep(c.lambda.front());
  const Vec u = unit_vector(c.u, r.dim, "u"), v = unit_vector(c.v, r.dim, "v");
  std::vector<ScheduleEntry> schedule;
  std::string x_label = "r";
  if (c.r.size() == c.n.size()) {
    for (std::size_t k = 0; k < c.r.size(); ++k) schedule.push_back({c.r[k], c.n[k]});
  } else if (c.r.size() == 1) {
    x_label = "n";
    for (int n : c.n) schedule.push_back({c.r[0], n});
  } else if (c.n.size() == 1) {
    for (double rr : c.r) schedule.push_back({rr, c.n[0]});
  } else {
    throw ConfigParseError("schedule.n: r and n schedules must have equal length, or one of them a single entry", 0,
                           "schedule.n");
  }
  brownian::FkQuery query;
  for (const auto& spec : c.hamiltonians) query.hamiltonians.push_back(ctx.hamiltonian(spec));
  query.pairs = {{u, v}};
  roughpath::SmoothOptions o;
  o.workers = c.workers;
  o.control_variate = c.control_variate;
  o.mc_normalization = c.mc_normalization;
  o.n_steps = c.steps;
  o.config_hash = rec.config_hash;
  std::vector<brownian::FkResult> results;
  for (const auto& e : schedule) results.push_back(roughpath::smooth_estimate(r, query, e.r, c.t, e.n, c.paths, c.seed, o));
  record_estimates(c, r, u, v, query.hamiltonians, schedule, results, true, x_label, rec);
}

inline void run_signature(const ExperimentConfig& c, ExperimentRecord& rec) {
  rng::Stream s(c.seed, 0, rng::kRoughPath);
  auto random_path = [&] {
    roughpath::PiecewiseLinearPath x;
    RVec p = RVec::Zero(c.sig_dim);
    for (int k = 0; k < c.sig_points; ++k) {
      x.times.push_back(c.t * k / (c.sig_points - 1));
      x.points.push_back(p);
      for (int i = 0; i < c.sig_dim; ++i) p(i) += s.normal();
    }
    return x;
  };
  const auto x = random_path(), y = random_path();
  const auto sig = roughpath::signature(x, c.sig_depth);
  auto& t = rec.add_table("signature", {"level", "index", "value"});
  for (int level = 0; level <= c.sig_depth; ++level)
    for (Eigen::Index k = 0; k < sig.levels[level].size(); ++k) {
      std::string idx;
      Eigen::Index rem = k;
      std::vector<int> digits(level);
      for (int l = level - 1; l >= 0; --l) {
        digits[l] = static_cast<int>(rem % c.sig_dim);
        rem /= c.sig_dim;
      }
      for (int l = 0; l < level; ++l) idx += (l ? "." : "") + std::to_string(digits[l]);
      t.rows.push_back({std::to_string(level), idx.empty() ? "()" : idx, fmt(sig.levels[level](k))});
    }

  double chen = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i; j < x.size(); ++j)
      for (std::size_t k = j; k < x.size(); ++k)
        chen = std::max(chen, roughpath::signature(x, c.sig_depth, i, k)
                                  .max_abs_diff(roughpath::signature(x, c.sig_depth, i, j) *
                                                roughpath::signature(x, c.sig_depth, j, k)));
  rec.summary["chen_defect"] = chen;
  rec.add_check("signature Chen relation on all grid triples", chen < 1e-12, "defect " + fmt(chen));

  const auto lx = roughpath::lift(x), ly = roughpath::lift(y);
  rec.add_document("rough_path", to_json(lx));
  const double dp = roughpath::p_variation_distance(lx, ly, c.p);
  rec.summary["p_variation_distance"] = dp;
  if (x.size() <= 22) {
    const double en = roughpath::p_variation_distance_enumerate(lx, ly, c.p);
    rec.add_check("signature p-variation DP = enumeration", std::abs(dp - en) <= 1e-12 * std::max(1.0, en),
                  fmt(dp) + " vs " + fmt(en));
  }

  const int level = c.sig_level, record = std::min(level, 4);
  const auto fine = roughpath::brownian_increments(c.sig_dim, c.t, level, s);
  const auto ebm = roughpath::enhance_brownian(fine, c.t, level, record);
  rec.add_document("enhanced_brownian", to_json(ebm));
  auto& e = rec.add_table("enhanced_brownian", {"time", "level1_norm", "levy_area_01", "membership_defect"});
  for (std::size_t k = 0; k < ebm.size(); ++k) {
    const auto& g = ebm.values[k];
    e.rows.push_back({fmt(ebm.times[k]), fmt(g.v.norm()), c.sig_dim >= 2 ? fmt(g.antisymmetric()(0, 1)) : "0",
                      fmt(g.membership_defect())});
  }
  rec.add_check("enhanced Brownian motion stays in G2", ebm.max_membership_defect() < 1e-12);
}

}  // namespace detail

/// Runs the configured experiment. Numeric content depends only on the
/// config (workers and output directory aside) and seed.
inline ExperimentRecord run_experiment(const ExperimentConfig& c) {
  validate(c, emit_config(c));
  ExperimentRecord rec;
  rec.experiment = c.name;
  rec.seed = c.seed;
  rec.config_hash = config_hash(c);
  rec.config_text = emit_config(c);
  rec.started = utc_now();
  if (c.name == "signature") {
    detail::run_signature(c, rec);
  } else {
    const Context ctx(c);
    if (c.name == "spectrum") detail::run_spectrum(c, ctx, rec);
    else if (c.name == "quantize") detail::run_quantize(c, ctx, rec);
    else if (c.name == "propagate") detail::run_propagate(c, ctx, rec);
    else if (c.name == "brownian-pi") detail::run_brownian(c, ctx, rec);
    else if (c.name == "smooth-pi") detail::run_smooth(c, ctx, rec);
  }
  rec.finished = utc_now();
  return rec;
}

}  // namespace gsq::harness
