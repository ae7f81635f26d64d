#include "finsler/finsler_core.hpp"

#include <cmath>

#include "finsler/quadrature.hpp"

namespace finsler {

namespace {


VolumeAt volume_from_jet_log(const Jet& log_sigma, int n) {
  VolumeAt v;
  v.sigma = std::exp(log_sigma.value());
  v.dlog_sigma = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    std::vector<int> alpha(static_cast<std::size_t>(n), 0);
    alpha[static_cast<std::size_t>(k)] = 1;
    v.dlog_sigma[k] = log_sigma.derivative(alpha);
  }
  return v;
}

std::vector<Jet> seeded(const Eigen::VectorXd& p, int first, const JetLayoutPtr& layout) {
  std::vector<Jet> out;
  out.reserve(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out.push_back(Jet::variable(first + static_cast<int>(i), p[i], layout));
  }
  return out;
}

double log_bh(const MetricModel& model, const Eigen::VectorXd& x) { return std::log(bh_volume_coefficient(model, x)); }

}  // namespace

double bh_volume_coefficient(const MetricModel& model, const Eigen::VectorXd& x) {
  model.check_base(x);
  const int n = model.dim;
  const MeanEstimate m = sphere_mean(n, [&](const Eigen::VectorXd& theta) {
    const double f = model.eval_F(x, theta);
    if (!(f > 0.0)) throw InvalidInput("F must be positive on the unit sphere for the Busemann-Hausdorff volume");
    return std::pow(f, -n);
  });
  const double sigma = 1.0 / m.value;
  if (!(m.error_bound <= 1e-6 * m.value)) throw QuadratureError(sigma, sigma * m.error_bound / m.value);
  return sigma;
}

VolumeAt volume_at(const MetricModel& model, const Eigen::VectorXd& x) {
  const int n = model.dim;
  switch (model.volume.kind) {
    case VolumeKind::lebesgue:
      return {1.0, Eigen::VectorXd::Zero(n)};
    case VolumeKind::busemann_hausdorff: {
      VolumeAt v;
      v.sigma = bh_volume_coefficient(model, x);
      v.dlog_sigma = Eigen::VectorXd::Zero(n);
      const double h = 1e-4 * (1.0 + x.norm());
      for (int k = 0; k < n; ++k) {
        auto central = [&](double step) {
          Eigen::VectorXd xp = x, xm = x;
          xp[k] += step;
          xm[k] -= step;
          return (log_bh(model, xp) - log_bh(model, xm)) / (2.0 * step);
        };
        v.dlog_sigma[k] = (4.0 * central(h) - central(2.0 * h)) / 3.0;
      }
      return v;
    }
    case VolumeKind::riemannian_auto: {
      auto layout = JetLayout::get(n, 1);
      const std::vector<Jet> xs = seeded(x, 1, layout);
      const std::vector<Jet> ys(static_cast<std::size_t>(n), Jet(1.0));
      JetMatrix a(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          a(i, j) = model.coefficient_a[static_cast<std::size_t>(i * n + j)].evaluate<Jet>(xs, ys, model.params);
        }
      }
      require_positive_definite(values(a), "coefficient matrix a(x)");
      return volume_from_jet_log(0.5 * spd_inverse(a).log_det, n);
    }
    case VolumeKind::custom: {
      auto layout = JetLayout::get(n, 1);
      const std::vector<Jet> xs = seeded(x, 1, layout);
      const std::vector<Jet> ys(static_cast<std::size_t>(n), Jet(1.0));
      const Jet sigma = model.volume.sigma.evaluate<Jet>(xs, ys, model.params);
      if (!(sigma.value() > 0.0)) throw InvalidInput("volume coefficient sigma(x) must be positive");
      return volume_from_jet_log(log(sigma), n);
    }
  }
  throw Error("unknown volume kind");
}

AmbientJets ambient_jets(const MetricModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y, int order,
                         const VolumeAt* volume) {
  const int n = model.dim;
  if (order < 0 || order > kMaxJetOrder) throw InvalidInput("jet order out of range");
  validate_flag_point(model, {x, y});

  AmbientJets out;
  out.n = n;
  out.order = order;
  out.x = x;
  out.y = y;

  // Variables 0..n-1 shift x, n..2n-1 shift y.
  auto full = JetLayout::get(2 * n, order);
  const std::vector<Jet> xs = seeded(x, 1, full);
  const std::vector<Jet> ys = seeded(y, n + 1, full);
  const Jet F = model.eval_F<Jet>(xs, ys);
  const Jet P = F * F;

  std::vector<int> eta(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) eta[static_cast<std::size_t>(i)] = n + i;
  out.F2 = restrict_variables(P, eta);
  if (order < 2) return out;

  out.g = JetMatrix(n, n);
  for (int i = 0; i < n; ++i) {
    const Jet d = differentiate(out.F2, i);
    for (int j = 0; j < n; ++j) out.g(i, j) = 0.5 * differentiate(d, j);
  }
  require_positive_definite(values(out.g), "fundamental tensor");
  SpdFactor<Jet> factor = spd_inverse<Jet>(out.g);
  out.g_inv = std::move(factor.inverse);
  out.log_det_g = factor.log_det;

  // x-derivatives of F^2 as jets in dy: order K-1.
  std::vector<Jet> F2x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) F2x[static_cast<std::size_t>(k)] = restrict_variables(differentiate(P, k), eta);

  auto yl2 = JetLayout::get(n, order - 2);
  const std::vector<Jet> y2 = seeded(y, 1, yl2);
  std::vector<Jet> bracket(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) {
    Jet b = -truncate(F2x[static_cast<std::size_t>(l)], order - 2);
    for (int k = 0; k < n; ++k) b += differentiate(F2x[static_cast<std::size_t>(k)], l) * y2[static_cast<std::size_t>(k)];
    bracket[static_cast<std::size_t>(l)] = b;
  }
  out.G = JetVector(n);
  for (int i = 0; i < n; ++i) {
    Jet s(yl2);
    for (int l = 0; l < n; ++l) s += out.g_inv(i, l) * bracket[static_cast<std::size_t>(l)];
    out.G[i] = 0.25 * s;
  }

  const VolumeAt vol = volume ? *volume : volume_at(model, x);
  out.tau = 0.5 * out.log_det_g - std::log(vol.sigma);
  if (order < 3) return out;

  const int k3 = order - 3;
  const Jet F3 = sqrt(truncate(out.F2, k3));
  out.A = Tensor<Jet>(n, 3);
  for (int i = 0; i < n; ++i) {
    const Jet di = differentiate(out.F2, i);
    for (int j = i; j < n; ++j) {
      const Jet dij = differentiate(di, j);
      for (int k = j; k < n; ++k) {
        const Jet a = 0.25 * F3 * differentiate(dij, k);
        for (const auto& [p, q, r] : {std::array{i, j, k}, std::array{i, k, j}, std::array{j, i, k},
                                      std::array{j, k, i}, std::array{k, i, j}, std::array{k, j, i}}) {
          out.A(p, q, r) = a;
        }
      }
    }
  }

  out.N = JetMatrix(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.N(i, j) = differentiate(out.G[i], j);
  }
  out.div_G = Jet(JetLayout::get(n, k3));
  for (int m = 0; m < n; ++m) out.div_G += out.N(m, m);

  // d tau / dx^k = 1/2 tr(g^{-1} dg/dx^k) - d ln sigma / dx^k
  const JetMatrix ginv3 = truncate(out.g_inv, k3);
  std::vector<Jet> tau_x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Jet tr(JetLayout::get(n, k3));
    const Jet& fx = F2x[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) {
      const Jet di = differentiate(fx, i);
      for (int j = 0; j < n; ++j) tr += ginv3(j, i) * differentiate(di, j);
    }
    tau_x[static_cast<std::size_t>(k)] = 0.25 * tr - vol.dlog_sigma[k];
  }
  const std::vector<Jet> y3 = seeded(y, 1, JetLayout::get(n, k3));
  Jet S(JetLayout::get(n, k3));
  Jet S_alt = out.div_G;
  for (int i = 0; i < n; ++i) {
    S += y3[static_cast<std::size_t>(i)] * tau_x[static_cast<std::size_t>(i)];
    S_alt -= y3[static_cast<std::size_t>(i)] * vol.dlog_sigma[i];
    const Jet tau_yi = differentiate(out.tau, i);
    for (int j = 0; j < n; ++j) S -= y3[static_cast<std::size_t>(j)] * out.N(i, j) * tau_yi;
  }
  out.S = S;
  out.S_alt = S_alt;
  if (order < 5) return out;

  out.E_hat = JetMatrix(n, n);
  for (int i = 0; i < n; ++i) {
    const Jet di = differentiate(out.div_G, i);
    for (int j = 0; j < n; ++j) out.E_hat(i, j) = differentiate(di, j);
  }
  return out;
}

CoordinateTensors coordinate_tensors(const MetricModel& model, const FlagPoint& p) {
  const AmbientJets a = ambient_jets(model, p.x, p.y, 5);
  CoordinateTensors t;
  t.F = std::sqrt(a.F2.value());
  t.g = values(a.g);
  t.g_inv = values(a.g_inv);
  t.A = values(a.A);
  t.G = values(a.G);
  t.N = values(a.N);
  t.E_hat = values(a.E_hat);
  t.tau = a.tau.value();
  t.S = a.S.value();
  t.S_alt = a.S_alt.value();
  return t;
}

Eigen::MatrixXd fundamental_tensor(const MetricModel& model, const FlagPoint& p) {
  return values(ambient_jets(model, p.x, p.y, 2).g);
}

Tensor<double> cartan_tensor(const MetricModel& model, const FlagPoint& p) {
  return values(ambient_jets(model, p.x, p.y, 3).A);
}

Eigen::VectorXd spray_coefficients(const MetricModel& model, const FlagPoint& p) {
  return values(ambient_jets(model, p.x, p.y, 2).G);
}

Eigen::MatrixXd nonlinear_connection(const MetricModel& model, const FlagPoint& p) {
  return values(ambient_jets(model, p.x, p.y, 3).N);
}

Eigen::MatrixXd mean_berwald(const MetricModel& model, const FlagPoint& p) {
  return values(ambient_jets(model, p.x, p.y, 5).E_hat);
}

double distortion(const MetricModel& model, const FlagPoint& p) { return ambient_jets(model, p.x, p.y, 2).tau.value(); }

double s_curvature(const MetricModel& model, const FlagPoint& p) { return ambient_jets(model, p.x, p.y, 3).S.value(); }

double s_curvature_alt(const MetricModel& model, const FlagPoint& p) {
  return ambient_jets(model, p.x, p.y, 3).S_alt.value();
}

}  // namespace finsler
