#include "finsler/indicatrix.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace finsler {

namespace {

constexpr int kFibreJetOrder = 3;

struct FibreEmbedding {
  std::vector<Jet> y;       // y(u) to order 3
  Eigen::VectorXd y0;
  std::vector<std::vector<Jet>> Y;  // Y[i][a] = d y^i / d u^a, order 2
};

FibreEmbedding embed(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u0) {
  const int n = model.dim;
  const int m = n - 1;
  if (u0.size() != m) throw InvalidInput("chart coordinate must have n - 1 components");
  if (!(u0.norm() < kChartRadius)) throw InvalidInput("chart coordinate outside the validity region |u| < 4");
  model.check_base(chart.x);
  auto layout = JetLayout::get(m, kFibreJetOrder);
  std::vector<Jet> U;
  for (int a = 0; a < m; ++a) U.push_back(Jet::variable(a + 1, u0[a], layout));
  Jet r2(layout);
  for (const auto& ua : U) r2 += ua * ua;
  const Jet inv = reciprocal(1.0 + r2);
  std::vector<Jet> theta;
  for (int a = 0; a < m; ++a) theta.push_back(2.0 * U[static_cast<std::size_t>(a)] * inv);
  theta.push_back(chart.id == ChartId::north ? (1.0 - r2) * inv : (r2 - 1.0) * inv);

  std::vector<Jet> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Jet(chart.x[i]));
  const Jet F = model.eval_F<Jet>(xs, theta);
  if (!(F.value() > 0.0)) throw InvalidInput("F is not positive along the fibre direction");
  const Jet invF = reciprocal(F);

  FibreEmbedding out;
  out.y0 = Eigen::VectorXd(n);
  out.Y.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    Jet yi = theta[static_cast<std::size_t>(i)] * invF;
    out.y0[i] = yi.value();
    for (int a = 0; a < m; ++a) out.Y[static_cast<std::size_t>(i)].push_back(differentiate(yi, a));
    out.y.push_back(std::move(yi));
  }
  Eigen::MatrixXd Y0(n, m);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < m; ++a) Y0(i, a) = out.Y[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)].value();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y0);
  if (!(svd.singularValues()[m - 1] > 1e-8)) throw InvalidInput("fibre embedding loses rank at this chart point");
  return out;
}

JetComposer make_composer(const FibreEmbedding& emb) {
  std::vector<Jet> eta;
  for (std::size_t i = 0; i < emb.y.size(); ++i) {
    Jet d = emb.y[i];
    d.coeffs()[0] = 0.0;
    eta.push_back(std::move(d));
  }
  return JetComposer(std::move(eta));
}

// Pullback of a covariant ambient tensor (rank 2 or 3, given as composed jets)
// through Y, truncated to `order`.
Tensor<Jet> pullback2(const Tensor<Jet>& amb, const FibreEmbedding& emb, int m, int order) {
  const int n = amb.dim();
  Tensor<Jet> out(m, 2);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      Jet s(JetLayout::get(m, order));
      for (int i = 0; i < n; ++i) {
        const Jet Yia = truncate(emb.Y[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)], order);
        for (int j = 0; j < n; ++j) {
          s += truncate(amb(i, j), order) * Yia *
               truncate(emb.Y[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)], order);
        }
      }
      out(a, b) = s;
    }
  }
  return out;
}

Tensor<Jet> pullback3(const Tensor<Jet>& amb, const FibreEmbedding& emb, int m, int order) {
  const int n = amb.dim();
  std::vector<std::vector<Jet>> Y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < m; ++a) {
      Y[static_cast<std::size_t>(i)].push_back(
          truncate(emb.Y[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)], order));
    }
  }
  // Contract one slot at a time: n^3 m + n^2 m^2 + n m^3 products.
  std::vector<Jet> s1(static_cast<std::size_t>(n * n * m), Jet(JetLayout::get(m, order)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Jet c = truncate(amb(i, j, k), order);
        for (int cc = 0; cc < m; ++cc) s1[static_cast<std::size_t>((i * n + j) * m + cc)] += c * Y[static_cast<std::size_t>(k)][static_cast<std::size_t>(cc)];
      }
    }
  }
  std::vector<Jet> s2(static_cast<std::size_t>(n * m * m), Jet(JetLayout::get(m, order)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int b = 0; b < m; ++b) {
        for (int cc = 0; cc < m; ++cc) {
          s2[static_cast<std::size_t>((i * m + b) * m + cc)] +=
              s1[static_cast<std::size_t>((i * n + j) * m + cc)] * Y[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)];
        }
      }
    }
  }
  Tensor<Jet> out(m, 3, Jet(JetLayout::get(m, order)));
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        for (int cc = 0; cc < m; ++cc) {
          out(a, b, cc) += s2[static_cast<std::size_t>((i * m + b) * m + cc)] * Y[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
        }
      }
    }
  }
  return out;
}

Tensor<Jet> as_tensor(const JetMatrix& mtx) {
  Tensor<Jet> t(static_cast<int>(mtx.rows()), 2);
  for (Eigen::Index i = 0; i < mtx.rows(); ++i) {
    for (Eigen::Index j = 0; j < mtx.cols(); ++j) t(i, j) = mtx(i, j);
  }
  return t;
}

Tensor<Jet> compose_all(const JetComposer& comp, const Tensor<Jet>& t) {
  Tensor<Jet> out = t;
  for (auto& j : out.data()) j = comp(j);
  return out;
}

Eigen::MatrixXd matrix_of(const Tensor<double>& t) {
  Eigen::MatrixXd out(t.dim(), t.dim());
  for (int a = 0; a < t.dim(); ++a) {
    for (int b = 0; b < t.dim(); ++b) out(a, b) = t(a, b);
  }
  return out;
}

struct Geometry {
  Tensor<Jet> g;       // order 2
  JetMatrix g_inv;     // order 1
  Tensor<Jet> gamma;   // order 1
  Tensor<double> R;    // lowered
};

Geometry fibre_geometry(const Tensor<Jet>& g_amb_composed, const FibreEmbedding& emb, int m) {
  Geometry geo;
  geo.g = pullback2(g_amb_composed, emb, m, 2);
  JetMatrix g1(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) g1(a, b) = truncate(geo.g(a, b), 1);
  }
  Eigen::MatrixXd gv = values(g1);
  require_positive_definite(gv, "induced fibre metric");
  geo.g_inv = spd_inverse<Jet>(g1).inverse;

  // Christoffel symbols of the first kind to order 1.
  Tensor<Jet> dg(m, 3);  // dg(a, b, c) = d_c g_ab
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) dg(a, b, c) = differentiate(geo.g(a, b), c);
    }
  }
  geo.gamma = Tensor<Jet>(m, 3);
  for (int c = 0; c < m; ++c) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        Jet s(JetLayout::get(m, 1));
        for (int d = 0; d < m; ++d) s += geo.g_inv(c, d) * (dg(d, b, a) + dg(d, a, b) - dg(a, b, d));
        geo.gamma(c, a, b) = 0.5 * s;
      }
    }
  }

  // R^a_bcd at the point, then lowered on the first slot.
  Tensor<double> Rup(m, 4);
  const Tensor<double> G0 = values(geo.gamma);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        for (int d = 0; d < m; ++d) {
          double r = 0.0;
          std::vector<int> ec(static_cast<std::size_t>(m), 0), ed(static_cast<std::size_t>(m), 0);
          ec[static_cast<std::size_t>(c)] = 1;
          ed[static_cast<std::size_t>(d)] = 1;
          r += geo.gamma(a, d, b).derivative(ec) - geo.gamma(a, c, b).derivative(ed);
          for (int e = 0; e < m; ++e) r += G0(a, c, e) * G0(e, d, b) - G0(a, d, e) * G0(e, c, b);
          Rup(a, b, c, d) = r;
        }
      }
    }
  }
  geo.R = Tensor<double>(m, 4);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        for (int d = 0; d < m; ++d) {
          double s = 0.0;
          for (int e = 0; e < m; ++e) s += gv(a, e) * Rup(e, b, c, d);
          geo.R(a, b, c, d) = s;
        }
      }
    }
  }
  return geo;
}

Tensor<Jet> gradient(const Jet& f, int m) {
  Tensor<Jet> t(m, 1);
  for (int a = 0; a < m; ++a) t(a) = differentiate(f, a);
  return t;
}

Eigen::VectorXd vector_of(const Tensor<double>& t) {
  Eigen::VectorXd v(t.dim());
  for (int a = 0; a < t.dim(); ++a) v[a] = t(a);
  return v;
}

// Volume stand-in for computations that never read tau or S.
VolumeAt unit_volume(int n) { return {1.0, Eigen::VectorXd::Zero(n)}; }

IndicatrixPoint usable_point(const IndicatrixPoint& p) {
  // Outside the validity disc means close to the pole: switch charts.
  if (p.u.norm() >= kChartRadius) return other_chart(p);
  return p;
}

}  // namespace

std::string to_string(ChartId id) { return id == ChartId::north ? "north" : "south"; }

Eigen::VectorXd stereographic_inverse(ChartId id, const Eigen::VectorXd& u) {
  const Eigen::Index m = u.size();
  const double r2 = u.squaredNorm();
  Eigen::VectorXd theta(m + 1);
  theta.head(m) = 2.0 * u / (1.0 + r2);
  theta[m] = (id == ChartId::north ? 1.0 - r2 : r2 - 1.0) / (1.0 + r2);
  return theta;
}

Eigen::VectorXd stereographic(ChartId id, const Eigen::VectorXd& theta) {
  const Eigen::Index m = theta.size() - 1;
  const Eigen::VectorXd t = theta.normalized();
  const double denom = id == ChartId::north ? 1.0 + t[m] : 1.0 - t[m];
  if (!(denom > 1e-300)) throw InvalidInput("direction is the pole of the requested chart");
  return t.head(m) / denom;
}

IndicatrixPoint chart_point(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
  const ChartId id = theta[theta.size() - 1] >= 0.0 ? ChartId::north : ChartId::south;
  return {{x, id}, stereographic(id, theta)};
}

IndicatrixPoint other_chart(const IndicatrixPoint& p) {
  const double r2 = p.u.squaredNorm();
  if (!(r2 > 0.0)) throw InvalidInput("chart centre has no image in the other chart");
  const ChartId other = p.chart.id == ChartId::north ? ChartId::south : ChartId::north;
  return {{p.chart.x, other}, p.u / r2};
}

Eigen::MatrixXd transition_jacobian(const Eigen::VectorXd& u) {
  const double r2 = u.squaredNorm();
  const Eigen::Index m = u.size();
  return Eigen::MatrixXd::Identity(m, m) / r2 - 2.0 * u * u.transpose() / (r2 * r2);
}

FlagPoint chart_embed(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u) {
  if (!(u.norm() < kChartRadius)) throw InvalidInput("chart coordinate outside the validity region |u| < 4");
  model.check_base(chart.x);
  const Eigen::VectorXd theta = stereographic_inverse(chart.id, u);
  const double f = model.eval_F(chart.x, theta);
  if (!(f > 0.0)) throw InvalidInput("F is not positive along the fibre direction");
  return {chart.x, theta / f};
}

Eigen::MatrixXd induced_metric(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u) {
  const FibreEmbedding emb = embed(model, chart, u);
  const VolumeAt vol = unit_volume(model.dim);
  const AmbientJets amb = ambient_jets(model, chart.x, emb.y0, 4, &vol);
  const Tensor<Jet> g = compose_all(make_composer(emb), as_tensor(amb.g));
  Eigen::MatrixXd out = matrix_of(values(pullback2(g, emb, model.dim - 1, 0)));
  require_positive_definite(out, "induced fibre metric");
  return out;
}

Tensor<double> christoffels(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u) {
  const FibreEmbedding emb = embed(model, chart, u);
  const VolumeAt vol = unit_volume(model.dim);
  const AmbientJets amb = ambient_jets(model, chart.x, emb.y0, 4, &vol);
  const Tensor<Jet> g = compose_all(make_composer(emb), as_tensor(amb.g));
  return values(fibre_geometry(g, emb, model.dim - 1).gamma);
}

Tensor<double> riemann(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u) {
  const FibreEmbedding emb = embed(model, chart, u);
  const VolumeAt vol = unit_volume(model.dim);
  const AmbientJets amb = ambient_jets(model, chart.x, emb.y0, 4, &vol);
  const Tensor<Jet> g = compose_all(make_composer(emb), as_tensor(amb.g));
  return fibre_geometry(g, emb, model.dim - 1).R;
}

Tensor<Jet> covariant_derivative(const Tensor<Jet>& field, const Tensor<Jet>& gamma) {
  const int m = gamma.dim();
  const int k = field.rank();
  int order = min_order(field, kMaxJetOrder) - 1;
  if (order < 0) throw InvalidInput("field jet order too low for a covariant derivative");
  if (min_order(gamma, order) < order) throw InvalidInput("connection jet order too low");
  const Tensor<Jet> G = truncate(gamma, order);
  const Tensor<Jet> T = truncate(field, order);
  const int dim = k == 0 ? m : field.dim();
  if (dim != m) throw InvalidInput("field and connection dimensions differ");
  Tensor<Jet> out(m, k + 1);
  std::vector<int> idx(static_cast<std::size_t>(k + 1));
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    idx = out.unflatten(flat);
    const int d = idx[static_cast<std::size_t>(k)];
    std::span<const int> slots(idx.data(), static_cast<std::size_t>(k));
    Jet s = truncate(differentiate(field.at(slots), d), order);
    std::vector<int> sub(idx.begin(), idx.begin() + k);
    for (int slot = 0; slot < k; ++slot) {
      const int a = sub[static_cast<std::size_t>(slot)];
      for (int e = 0; e < m; ++e) {
        sub[static_cast<std::size_t>(slot)] = e;
        s -= G(e, d, a) * T.at(sub);
      }
      sub[static_cast<std::size_t>(slot)] = a;
    }
    out.data()[flat] = s;
  }
  return out;
}

RestrictedFields restrict_fields(const MetricModel& model, const IndicatrixPoint& requested, const VolumeAt& volume,
                                 double cartan_sign) {
  const IndicatrixPoint point = usable_point(requested);
  const int n = model.dim;
  const int m = n - 1;
  const FibreEmbedding emb = embed(model, point.chart, point.u);
  const AmbientJets amb = ambient_jets(model, point.chart.x, emb.y0, 6, &volume);
  const JetComposer comp = make_composer(emb);

  RestrictedFields f;
  f.m = m;
  f.x = point.chart.x;
  f.y = emb.y0;
  f.u = point.u;
  f.chart = point.chart.id;
  f.Y = Eigen::MatrixXd(n, m);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < m; ++a) f.Y(i, a) = emb.Y[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)].value();
  }

  const Geometry geo = fibre_geometry(compose_all(comp, as_tensor(amb.g)), emb, m);
  f.g = matrix_of(values(geo.g));
  f.g_inv = values(geo.g_inv);
  f.gamma = values(geo.gamma);
  f.R = geo.R;
  f.dg = values(covariant_derivative(geo.g, geo.gamma));

  const Jet S = comp(amb.S);
  f.S = S.value();
  const Tensor<Jet> S1 = gradient(S, m);
  const Tensor<Jet> S2 = covariant_derivative(S1, geo.gamma);
  const Tensor<Jet> S3 = covariant_derivative(S2, geo.gamma);
  f.S_a = vector_of(values(S1));
  f.S_ab = matrix_of(values(S2));
  f.S_abc = values(S3);

  Tensor<Jet> H = pullback3(compose_all(comp, amb.A), emb, m, 1);
  for (auto& j : H.data()) j = cartan_sign * j;
  f.H = values(H);
  f.dH = values(covariant_derivative(H, geo.gamma));

  const Tensor<Jet> E = pullback2(compose_all(comp, as_tensor(amb.E_hat)), emb, m, 1);
  f.E = matrix_of(values(E));
  f.dE = values(covariant_derivative(E, geo.gamma));

  Jet e(JetLayout::get(m, 1));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) e += geo.g_inv(a, b) * E(a, b);
  }
  f.e = e.value();
  f.e_a = vector_of(values(gradient(e, m)));
  return f;
}

RestrictedFields restrict_fields(const MetricModel& model, const IndicatrixPoint& point) {
  return restrict_fields(model, point, volume_at(model, point.chart.x));
}

}  // namespace finsler
