#include "finsler/identity_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "finsler/parallel.hpp"

namespace finsler {

namespace {

// Tracks the largest term magnitude while a residual is assembled.
struct Scale {
  double value{1.0};
  void add(double term) { value = std::max(value, std::abs(term)); }
};

// H_ab^c = g^{cd} H_abd
Tensor<double> raise_last(const Tensor<double>& H, const Eigen::MatrixXd& g_inv) {
  const int m = H.dim();
  Tensor<double> out(m, 3);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (int d = 0; d < m; ++d) s += g_inv(c, d) * H(a, b, d);
        out(a, b, c) = s;
      }
    }
  }
  return out;
}

}  // namespace

Residual check_pde(const RestrictedFields& f) {
  const int m = f.m;
  const Tensor<double> Hu = raise_last(f.H, f.g_inv);
  Residual r{Tensor<double>(m, 2), 1.0};
  Scale sc;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      double hs = 0.0;
      for (int c = 0; c < m; ++c) hs += Hu(a, b, c) * f.S_a[c];
      const double t1 = f.S_ab(a, b), t3 = f.S * f.g(a, b), t4 = f.E(a, b);
      sc.add(t1);
      sc.add(hs);
      sc.add(t3);
      sc.add(t4);
      r.value(a, b) = t1 + hs + t3 - t4;
    }
  }
  r.scale = sc.value;
  return r;
}

Residual check_codazzi(const RestrictedFields& f) {
  const int m = f.m;
  const Tensor<double> Hu = raise_last(f.H, f.g_inv);
  Residual r{Tensor<double>(m, 3), 1.0};
  Scale sc;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        double h1 = 0.0, h2 = 0.0;
        for (int d = 0; d < m; ++d) {
          h1 += Hu(a, b, d) * f.E(d, c);
          h2 += Hu(a, c, d) * f.E(d, b);
        }
        sc.add(f.dE(a, b, c));
        sc.add(f.dE(a, c, b));
        sc.add(h1);
        sc.add(h2);
        r.value(a, b, c) = f.dE(a, b, c) - f.dE(a, c, b) - h1 + h2;
      }
    }
  }
  r.scale = sc.value;
  return r;
}

Residual check_cartan_symmetry(const RestrictedFields& f) {
  const int m = f.m;
  Residual r{Tensor<double>(m, 4), 1.0};
  Scale sc;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        for (int d = 0; d < m; ++d) {
          const double t = f.dH(a, b, c, d);
          sc.add(t);
          // H is totally symmetric, so swapping d with the first slot covers all three.
          const double worst = std::max({std::abs(t - f.dH(d, b, c, a)), std::abs(t - f.dH(a, d, c, b)),
                                         std::abs(t - f.dH(a, b, d, c))});
          r.value(a, b, c, d) = worst;
        }
      }
    }
  }
  r.scale = sc.value;
  return r;
}

Residual check_gauss(const RestrictedFields& f) {
  const int m = f.m;
  const Tensor<double> Hu = raise_last(f.H, f.g_inv);  // Hu(a, d, e) = H^e_ad
  Residual r{Tensor<double>(m, 4), 1.0};
  Scale sc;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        for (int d = 0; d < m; ++d) {
          double h1 = 0.0, h2 = 0.0;
          for (int e = 0; e < m; ++e) {
            h1 += f.H(b, e, c) * Hu(a, d, e);
            h2 += f.H(b, e, d) * Hu(a, c, e);
          }
          const double gg = f.g(a, c) * f.g(b, d) - f.g(a, d) * f.g(b, c);
          sc.add(f.R(a, b, c, d));
          sc.add(h1);
          sc.add(h2);
          sc.add(gg);
          r.value(a, b, c, d) = f.R(a, b, c, d) - (h1 - h2 + gg);
        }
      }
    }
  }
  r.scale = sc.value;
  return r;
}

Residual check_ricci(const RestrictedFields& f) {
  const int m = f.m;
  Residual r{Tensor<double>(m, 3), 1.0};
  Scale sc;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        double curv = 0.0;
        for (int e = 0; e < m; ++e) {
          double Rup = 0.0;  // R^e_abc
          for (int q = 0; q < m; ++q) Rup += f.g_inv(e, q) * f.R(q, a, b, c);
          curv += f.S_a[e] * Rup;
        }
        sc.add(f.S_abc(a, b, c));
        sc.add(f.S_abc(a, c, b));
        sc.add(curv);
        r.value(a, b, c) = f.S_abc(a, b, c) - f.S_abc(a, c, b) - curv;
      }
    }
  }
  r.scale = sc.value;
  return r;
}

Residual check_scalar_ricci(const RestrictedFields& f) {
  const int m = f.m;
  Residual r{Tensor<double>(m, 2), 1.0};
  Scale sc;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      sc.add(f.S_ab(a, b));
      r.value(a, b) = f.S_ab(a, b) - f.S_ab(b, a);
    }
  }
  r.scale = sc.value;
  return r;
}

Residual check_pde(const MetricModel& model, const IndicatrixPoint& p) { return check_pde(restrict_fields(model, p)); }
Residual check_codazzi(const MetricModel& model, const IndicatrixPoint& p) {
  return check_codazzi(restrict_fields(model, p));
}
Residual check_cartan_symmetry(const MetricModel& model, const IndicatrixPoint& p) {
  return check_cartan_symmetry(restrict_fields(model, p));
}
Residual check_gauss(const MetricModel& model, const IndicatrixPoint& p) {
  return check_gauss(restrict_fields(model, p));
}

double isotropy_residual(const RestrictedFields& f) {
  const double c = f.e / static_cast<double>(f.m);
  double num = 0.0;
  double den = 1.0;
  for (int a = 0; a < f.m; ++a) {
    for (int b = 0; b < f.m; ++b) {
      num = std::max(num, std::abs(f.E(a, b) - c * f.g(a, b)));
      den = std::max(den, std::abs(f.E(a, b)));
    }
  }
  return num / den;
}

double isotropy_residual(const MetricModel& model, const IndicatrixPoint& p) {
  return isotropy_residual(restrict_fields(model, p));
}

std::vector<Eigen::VectorXd> sample_base_points(const MetricModel& model, int count, Rng& rng) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    out.push_back(uniform_in_ball(rng, model.dim, model.base_radius));
    model.check_base(out.back());
  }
  return out;
}

std::vector<IndicatrixPoint> sample_fibre_points(const MetricModel& model, const Eigen::VectorXd& x, int count,
                                                 Rng& rng) {
  const int n = model.dim;
  std::vector<IndicatrixPoint> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  while (static_cast<int>(out.size()) < count) {
    const Eigen::VectorXd theta = uniform_on_sphere(rng, n);
    if (1.0 - std::abs(theta[n - 1]) < 1e-6) continue;
    if (model.direction_margin > 0.0 && theta.cwiseAbs().minCoeff() < model.direction_margin) continue;
    out.push_back(chart_point(x, theta));
  }
  return out;
}

SampleSet draw_samples(const MetricModel& model, const SamplePlan& plan) {
  if (plan.base_points < 1 || plan.fibre_points < 1) throw InvalidInput("sample counts must be positive");
  Rng rng(plan.seed);
  SampleSet s;
  s.base = sample_base_points(model, plan.base_points, rng);
  for (const auto& x : s.base) s.fibre.push_back(sample_fibre_points(model, x, plan.fibre_points, rng));
  return s;
}

Tolerances default_tolerances() {
  return {{"eq-1.11", 1e-5}, {"eq-1.12", 1e-5}, {"eq-2.1", 1e-5}, {"eq-2.2", 1e-4}, {"thm-1", 1e-5}};
}

std::vector<CheckReport> run_checks(const MetricModel& model, const SamplePlan& plan, const Tolerances& tolerances) {
  struct Kind {
    const char* tag;
    const char* name;
    Residual (*fn)(const RestrictedFields&);
  };
  static const Kind kinds[] = {
      {"eq-1.11", "cartan-derivative-symmetry", &check_cartan_symmetry},
      {"eq-1.12", "gauss-equation", &check_gauss},
      {"eq-2.1", "s-curvature-pde", &check_pde},
      {"eq-2.2", "codazzi-mean-berwald", &check_codazzi},
  };
  constexpr std::size_t kChecks = std::size(kinds);

  const SampleSet samples = draw_samples(model, plan);
  std::vector<VolumeAt> volumes(samples.base.size());
  std::vector<std::string> volume_errors(samples.base.size());
  parallel_for(
      samples.base.size(),
      [&](std::size_t i) {
        try {
          volumes[i] = volume_at(model, samples.base[i]);
        } catch (const Error& err) {
          volume_errors[i] = err.what();
        }
      },
      plan.threads);

  std::vector<std::pair<int, int>> index;
  for (std::size_t b = 0; b < samples.fibre.size(); ++b) {
    for (std::size_t k = 0; k < samples.fibre[b].size(); ++k) index.emplace_back(static_cast<int>(b), static_cast<int>(k));
  }
  // rows[point][check]
  std::vector<std::array<PointResidual, kChecks>> rows(index.size());
  parallel_for(
      index.size(),
      [&](std::size_t i) {
        const auto [b, k] = index[i];
        const IndicatrixPoint& p = samples.fibre[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
        PointResidual base;
        base.base = b;
        base.fibre = k;
        base.x = p.chart.x;
        base.chart = p.chart.id;
        base.u = p.u;
        for (auto& r : rows[i]) r = base;
        try {
          if (!volume_errors[static_cast<std::size_t>(b)].empty()) throw Error(volume_errors[static_cast<std::size_t>(b)]);
          const RestrictedFields f = restrict_fields(model, p, volumes[static_cast<std::size_t>(b)]);
          for (std::size_t c = 0; c < kChecks; ++c) rows[i][c].residual = kinds[c].fn(f).relative();
        } catch (const Error& err) {
          for (auto& r : rows[i]) {
            r.residual = std::numeric_limits<double>::infinity();
            r.error = err.what();
          }
        }
      },
      plan.threads);

  std::vector<CheckReport> out;
  for (std::size_t c = 0; c < kChecks; ++c) {
    CheckReport rep;
    rep.tag = kinds[c].tag;
    rep.name = kinds[c].name;
    rep.metric_id = model.id;
    rep.dim = model.dim;
    rep.seed = plan.seed;
    rep.samples = static_cast<int>(index.size());
    auto tol = tolerances.find(rep.tag);
    rep.tolerance = tol != tolerances.end() ? tol->second : default_tolerances().at(rep.tag);
    for (const auto& row : rows) {
      rep.points.push_back(row[c]);
      rep.max_residual = std::max(rep.max_residual, row[c].residual);
    }
    rep.pass = rep.max_residual <= rep.tolerance;
    out.push_back(std::move(rep));
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::isotropic_and_constant: return "isotropic-and-constant";
    case Verdict::non_isotropic: return "non-isotropic";
    case Verdict::violation: return "VIOLATION";
    case Verdict::isotropic_unasserted: return "isotropic-unasserted";
  }
  return "unknown";
}

AuditRecord schur_audit(const MetricModel& model, const Eigen::VectorXd& x, const std::vector<IndicatrixPoint>& fibre,
                        const AuditTolerances& tol, unsigned threads) {
  if (fibre.empty()) throw InvalidInput("audit needs at least one fibre point");
  const VolumeAt vol = volume_at(model, x);
  AuditRecord rec;
  rec.x = x;
  rec.samples.resize(fibre.size());
  parallel_for(
      fibre.size(),
      [&](std::size_t i) {
        const RestrictedFields f = restrict_fields(model, fibre[i], vol);
        FibreSample& s = rec.samples[i];
        s.point = fibre[i];
        s.e = f.e;
        s.grad_e = std::sqrt(std::max(0.0, f.e_a.dot(f.g_inv * f.e_a)));
        s.isotropy = isotropy_residual(f);
      },
      threads);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (const auto& s : rec.samples) {
    rec.max_isotropy_residual = std::max(rec.max_isotropy_residual, s.isotropy);
    rec.max_grad_e = std::max(rec.max_grad_e, s.grad_e);
    lo = std::min(lo, s.e);
    hi = std::max(hi, s.e);
    sum += s.e;
  }
  rec.e_mean = sum / static_cast<double>(rec.samples.size());
  rec.e_spread = hi - lo;

  const bool isotropic = rec.max_isotropy_residual <= tol.isotropy;
  if (!isotropic) {
    rec.verdict = Verdict::non_isotropic;
  } else if (model.dim < 3) {
    // Every 1-dimensional fibre is isotropic; constancy is not implied.
    rec.verdict = Verdict::isotropic_unasserted;
  } else {
    rec.asserted = true;
    const bool constant = rec.e_spread <= tol.constancy && rec.max_grad_e <= tol.constancy;
    rec.verdict = constant ? Verdict::isotropic_and_constant : Verdict::violation;
  }
  return rec;
}

WeakIsotropyRecord weak_isotropy_check(const MetricModel& model, const Eigen::VectorXd& x,
                                       const std::vector<IndicatrixPoint>& fibre, double c, unsigned threads) {
  const int n = model.dim;
  const VolumeAt vol = volume_at(model, x);
  std::vector<double> worst(fibre.size(), 0.0);
  parallel_for(
      fibre.size(),
      [&](std::size_t i) {
        const IndicatrixPoint p = fibre[i].u.norm() >= kChartRadius ? other_chart(fibre[i]) : fibre[i];
        const FlagPoint q = chart_embed(model, p.chart, p.u);
        const AmbientJets amb = ambient_jets(model, x, q.y, 5, &vol);
        const Jet F = sqrt(truncate(amb.F2, 2));
        double num = 0.0, den = 1.0;
        std::vector<int> alpha(static_cast<std::size_t>(n), 0);
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            std::fill(alpha.begin(), alpha.end(), 0);
            ++alpha[static_cast<std::size_t>(a)];
            ++alpha[static_cast<std::size_t>(b)];
            const double s = amb.S.derivative(alpha);
            const double fh = c * F.derivative(alpha);
            num = std::max(num, std::abs(s - fh));
            den = std::max({den, std::abs(s), std::abs(fh)});
          }
        }
        worst[i] = num / den;
      },
      threads);
  WeakIsotropyRecord rec;
  rec.c = c;
  rec.samples = static_cast<int>(fibre.size());
  for (double w : worst) rec.max_hessian_residual = std::max(rec.max_hessian_residual, w);
  return rec;
}

WeakIsotropyRecord weak_isotropy_check(const MetricModel& model, const Eigen::VectorXd& x,
                                       const std::vector<IndicatrixPoint>& fibre, unsigned threads) {
  if (model.dim < 3) throw InvalidInput("weak isotropy needs n >= 3");
  if (fibre.empty()) throw InvalidInput("weak isotropy needs at least one fibre point");
  const VolumeAt vol = volume_at(model, x);
  std::vector<double> e(fibre.size());
  parallel_for(fibre.size(), [&](std::size_t i) { e[i] = restrict_fields(model, fibre[i], vol).e; }, threads);
  double sum = 0.0;
  for (double v : e) sum += v;
  const double c = sum / static_cast<double>(e.size()) / static_cast<double>(model.dim - 1);
  return weak_isotropy_check(model, x, fibre, c, threads);
}

}  // namespace finsler
