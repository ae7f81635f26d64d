#include "finsler/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <map>
#include <mutex>
#include <set>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

// Octahedral orbit of a generator: kind 1 (1,0,0), 2 (0,a,a), 3 (a,a,a),
// 4 (a,a,b), 5 (a,b,0), 6 (a,b,c), all sign changes and permutations.
struct Orbit {
  int kind;
  double weight;
  double a;
  double b;
};

constexpr Orbit kLebedev302[] = {
    {1, .8545911725128148E-3, 0.0, 0.0},
    {3, .3599119285025571E-2, 0.0, 0.0},
    {4, .3449788424305883E-2, .3515640345570105, 0.0},
    {4, .3604822601419882E-2, .6566329410219612, 0.0},
    {4, .3576729661743367E-2, .4729054132581005, 0.0},
    {4, .2352101413689164E-2, .0961830852261478, 0.0},
    {4, .3108953122413675E-2, .2219645236294178, 0.0},
    {4, .3650045807677255E-2, .7011766416089545, 0.0},
    {5, .2982344963171804E-2, .2644152887060663, 0.0},
    {5, .3600820932216460E-2, .5718955891878961, 0.0},
    {6, .3571540554273387E-2, .2510034751770465, .8000727494073951},
    {6, .3392312205006170E-2, .1233548532583327, .4127724083168531},
};

constexpr Orbit kLebedev590[] = {
    {1, .3095121295306187E-3, 0.0, 0.0},
    {3, .1852379698597489E-2, 0.0, 0.0},
    {4, .1871790639277744E-2, .7040954938227469, 0.0},
    {4, .1858812585438317E-2, .6807744066455244, 0.0},
    {4, .1852028828296213E-2, .6372546939258752, 0.0},
    {4, .1846715956151242E-2, .5044419707800358, 0.0},
    {4, .1818471778162769E-2, .4215761784010967, 0.0},
    {4, .1749564657281154E-2, .3317920736472123, 0.0},
    {4, .1617210647254411E-2, .2384736701421887, 0.0},
    {4, .1384737234851692E-2, .1459036449157763, 0.0},
    {4, .9764331165051050E-3, .0609503411550720, 0.0},
    {5, .1857161196774078E-2, .6116843442009876, 0.0},
    {5, .1705153996395864E-2, .3964755348199858, 0.0},
    {5, .1300321685886048E-2, .1724782009907724, 0.0},
    {6, .1842866472905286E-2, .5610263808622060, .3518280927733519},
    {6, .1802658934377451E-2, .4742392842551980, .2634716655937950},
    {6, .1849830560443660E-2, .5984126497885380, .1816640840360209},
    {6, .1713904507106709E-2, .3791035407695563, .1720795225656878},
    {6, .1555213603396808E-2, .2778673190586244, .0821302158193251},
    {6, .1802239128008525E-2, .5033564271075117, .0899920584207488},
};

std::array<double, 3> generator(const Orbit& o) {
  switch (o.kind) {
    case 1: return {1.0, 0.0, 0.0};
    case 2: return {0.0, std::sqrt(0.5), std::sqrt(0.5)};
    case 3: return {std::sqrt(1.0 / 3.0), std::sqrt(1.0 / 3.0), std::sqrt(1.0 / 3.0)};
    case 4: return {o.a, o.a, std::sqrt(1.0 - 2.0 * o.a * o.a)};
    case 5: return {o.a, std::sqrt(1.0 - o.a * o.a), 0.0};
    default: return {o.a, o.b, std::sqrt(1.0 - o.a * o.a - o.b * o.b)};
  }
}

template <std::size_t N>
SphereRule build_lebedev(const Orbit (&orbits)[N]) {
  SphereRule rule;
  for (const auto& o : orbits) {
    std::array<double, 3> g = generator(o);
    std::sort(g.begin(), g.end());
    std::set<std::array<double, 3>> points;
    do {
      for (int s = 0; s < 8; ++s) {
        std::array<double, 3> p = g;
        for (int c = 0; c < 3; ++c) {
          if ((s >> c) & 1) p[c] = -p[c];
        }
        for (double& v : p) v += 0.0;  // fold -0 into +0
        points.insert(p);
      }
    } while (std::next_permutation(g.begin(), g.end()));
    for (const auto& p : points) {
      rule.nodes.push_back(Eigen::Vector3d(p[0], p[1], p[2]));
      rule.weights.push_back(o.weight);
    }
  }
  return rule;
}

}  // namespace

double SphereRule::mean(const std::function<double(const Eigen::VectorXd&)>& f) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * f(nodes[k]);
  return sum;
}

const SphereRule& lebedev_rule(int points) {
  static const SphereRule r302 = build_lebedev(kLebedev302);
  static const SphereRule r590 = build_lebedev(kLebedev590);
  if (points == 302) return r302;
  if (points == 590) return r590;
  throw InvalidInput("Lebedev rules are available with 302 or 590 points");
}

SphereRule circle_rule(int points) {
  SphereRule rule;
  for (int k = 0; k < points; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / points;
    rule.nodes.push_back(Eigen::Vector2d(std::cos(phi), std::sin(phi)));
    rule.weights.push_back(1.0 / points);
  }
  return rule;
}

void gauss_legendre(int points, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes.resize(static_cast<std::size_t>(points));
  weights.resize(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    nodes[static_cast<std::size_t>(k)] = eig.eigenvalues()[k];
    const double v = eig.eigenvectors()(0, k);
    weights[static_cast<std::size_t>(k)] = 2.0 * v * v;
  }
}

SphereRule product_sphere_rule(int n, int points) {
  if (n < 2) throw InvalidInput("sphere rules need n >= 2");
  std::vector<double> t, w;
  gauss_legendre(points, t, w);
  const int azimuth = 2 * points;
  const int polar = n - 2;  // angles phi_1..phi_{n-2} in [0, pi]
  SphereRule rule;
  std::vector<int> idx(static_cast<std::size_t>(polar), 0);
  double total = 0.0;
  for (;;) {
    double weight = 1.0;
    Eigen::VectorXd p(n);
    double sin_prod = 1.0;
    for (int a = 0; a < polar; ++a) {
      const std::size_t k = static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
      const double phi = 0.5 * std::numbers::pi * (t[k] + 1.0);
      p[a] = sin_prod * std::cos(phi);
      weight *= w[k] * std::pow(std::sin(phi), n - 2 - a);
      sin_prod *= std::sin(phi);
    }
    for (int k = 0; k < azimuth; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / azimuth;
      Eigen::VectorXd q = p;
      q[n - 2] = sin_prod * std::cos(phi);
      q[n - 1] = sin_prod * std::sin(phi);
      rule.nodes.push_back(q);
      rule.weights.push_back(weight);
      total += weight;
    }
    int a = 0;
    while (a < polar && ++idx[static_cast<std::size_t>(a)] == points) idx[static_cast<std::size_t>(a++)] = 0;
    if (a == polar) break;
  }
  for (double& v : rule.weights) v /= total;
  return rule;
}

namespace {

// Product rules are costly to build and reused across every volume evaluation.
const SphereRule& cached_product_rule(int n, int points) {
  static std::mutex lock;
  static std::map<std::pair<int, int>, SphereRule> cache;
  std::lock_guard<std::mutex> guard(lock);
  auto it = cache.find({n, points});
  if (it == cache.end()) it = cache.emplace(std::make_pair(n, points), product_sphere_rule(n, points)).first;
  return it->second;
}

}  // namespace

MeanEstimate sphere_mean(int n, const std::function<double(const Eigen::VectorXd&)>& f, double rel_target) {
  if (n == 2) {
    static const SphereRule c = circle_rule(1024);
    static const SphereRule d = circle_rule(2048);
    const double coarse = c.mean(f);
    const double fine = d.mean(f);
    return {fine, std::abs(fine - coarse)};
  }
  MeanEstimate est{0.0, 0.0};
  auto accept = [&](double coarse, double fine) {
    est = {fine, std::abs(fine - coarse)};
    return est.error_bound <= rel_target * std::abs(fine);
  };
  if (n == 3) {
    if (accept(lebedev_rule(302).mean(f), lebedev_rule(590).mean(f))) return est;
    double prev = cached_product_rule(3, 64).mean(f);
    for (int points : {128}) {
      const double next = cached_product_rule(3, points).mean(f);
      if (accept(prev, next)) return est;
      prev = next;
    }
    return est;
  }
  const int base = n <= 4 ? 24 : 12;
  double prev = cached_product_rule(n, base).mean(f);
  for (int points : {2 * base, 4 * base}) {
    const double next = cached_product_rule(n, points).mean(f);
    if (accept(prev, next)) return est;
    prev = next;
  }
  return est;
}

}  // namespace finsler
