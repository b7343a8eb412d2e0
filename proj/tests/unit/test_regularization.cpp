#include "semitoric/errors.hpp"
#include "semitoric/models.hpp"
#include "semitoric/regularization.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace semitoric;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseVector champagne_seed() {
  PhaseVector s(4);
  s << 0.3, 0.0, 0.3, 0.07;
  return s;
}

// grid whose sigma is the exact gradient of a closed-form S
template <class Grad>
SigmaGrid synthetic_grid(const Vec& a1, const Vec& a2, Grad grad) {
  SigmaGrid g;
  g.axis1 = a1;
  g.axis2 = a2;
  g.rest = Vec(0);
  for (Eigen::Index i = 0; i < a1.size(); ++i)
    for (Eigen::Index j = 0; j < a2.size(); ++j) {
      const Vec v = (Vec(2) << a1[i], a2[j]).finished();
      g.samples.push_back({RegularValue(v), grad(v)});
    }
  return g;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("lift_near") {
  CHECK(lift_near(0.1, 2 * kPi) == doctest::Approx(0.1 + 2 * kPi));
  CHECK(lift_near(6.2, 0.0) == doctest::Approx(6.2 - 2 * kPi));
  CHECK(lift_near(1.0, 1.0) == 1.0);
}

TEST_CASE("linspace") {
  const Vec a = linspace(0.0, 1.0, 5);
  CHECK(a[4] == 1.0);
  CHECK(a[1] == doctest::Approx(0.25));
  CHECK(linspace(2.0, 3.0, 1)[0] == 2.0);
}

TEST_CASE("closedness of synthetic fields") {
  const Vec a1 = linspace(0.0, 1.0, 7), a2 = linspace(-1.0, 1.0, 7);
  // exact differential of v1 v2 + v2^2
  const auto exact = synthetic_grid(a1, a2, [](const Vec& v) {
    return (Vec(2) << v[1], v[0] + 2 * v[1]).finished();
  });
  CHECK(closedness_defect(exact) < 1e-12);
  // (v2, 0): D1 sigma_2 - D2 sigma_1 = -1
  const auto rotational = synthetic_grid(a1, a2, [](const Vec& v) { return (Vec(2) << v[1], 0.0).finished(); });
  CHECK(closedness_defect(rotational) == doctest::Approx(1.0));
  const Mat field = closedness_field(rotational);
  CHECK(field(0, 3) == 0.0);
  CHECK(field(3, 3) == doctest::Approx(1.0));
}

TEST_CASE("closedness needs three nodes per axis") {
  const auto g = synthetic_grid(linspace(0.1, 0.2, 2), linspace(0.0, 0.1, 5),
                                [](const Vec&) { return Vec::Zero(2).eval(); });
  CHECK_THROWS_AS(closedness_defect(g), Error);
}

TEST_CASE("S integration reproduces a known primitive") {
  const auto grad = [](const Vec& v) { return (Vec(2) << 1.0 + 2 * v[0] * v[1], v[0] * v[0]).finished(); };
  const auto g = synthetic_grid(linspace(0.05, 0.2, 6), linspace(-0.1, 0.1, 5), grad);
  const SigmaSampler sampler = [&](const Vec& v) { return SigmaSample{RegularValue(v), grad(v)}; };
  const SField s = integrate_S(g, sampler, 2);
  for (int i = 0; i < g.size1(); ++i)
    for (int j = 0; j < g.size2(); ++j) {
      const double v1 = g.axis1[i], v2 = g.axis2[j];
      CHECK(s.values(i, j) == doctest::Approx(v1 + v1 * v1 * v2).epsilon(1e-3));
    }
  CHECK(s.sigma_origin[0] == doctest::Approx(1.0));
  CHECK(s.path_residual < 1e-3);
}

TEST_CASE("paths across the branch cut are refused") {
  const auto g = synthetic_grid(linspace(-0.2, -0.1, 3), linspace(-0.05, 0.05, 3),
                                [](const Vec&) { return Vec::Zero(2).eval(); });
  const SigmaSampler sampler = [](const Vec& v) { return SigmaSample{RegularValue(v), Vec::Zero(2)}; };
  CHECK(kind_of([&] { integrate_S(g, sampler, 0); }) == ErrorKind::Winding);
}

TEST_CASE("Taylor fit recovers polynomial coefficients") {
  std::vector<Vec> nodes;
  std::vector<double> vals;
  for (double a : {0.0, 0.1, 0.2, 0.3})
    for (double b : {-0.1, 0.0, 0.1, 0.2}) {
      nodes.push_back((Vec(2) << a, b).finished());
      vals.push_back(a * a + 3 * a * b);
    }
  const Vec values = Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  const TaylorFit fit = taylor_fit(nodes, values, 2);
  REQUIRE(fit.coeffs.size() == 5);
  for (const auto& c : fit.coeffs) {
    double want = 0.0;
    if (c.j1 == 2 && c.j2 == 0) want = 1.0;
    if (c.j1 == 1 && c.j2 == 1) want = 3.0;
    CHECK(std::abs(c.value - want) < 1e-10);
  }
  CHECK(fit.residual < 1e-12);
  const TaylorFit zero = taylor_fit(nodes, values, 0);
  CHECK(zero.coeffs.empty());
  CHECK(zero.residual == doctest::Approx(std::sqrt(values.squaredNorm() / values.size())));
  CHECK(kind_of([&] { taylor_fit({nodes[0], nodes[1]}, values.head(2), 3); }) == ErrorKind::IllConditioned);
}

TEST_CASE("sigma from champagne periods") {
  const auto sys = champagne_bottle();
  const auto at = [&](double a, double b) {
    return sigma_from_periods(build_period_basis(sys, RegularValue((Vec(2) << a, b).finished()), champagne_seed()));
  };
  const SigmaSample s = at(0.05, 0.02), t = at(0.05, -0.02);
  CHECK(std::isfinite(s.sigma[0]));
  CHECK(s.sigma[1] >= 0.0);
  CHECK(s.sigma[1] < 2 * kPi);
  // sigma_1 is even in v2
  CHECK(std::abs(s.sigma[0] - t.sigma[0]) < 1e-7);
}

TEST_CASE("product system: sigma_3 vanishes") {
  const auto sys = product_with_free_torus(champagne_bottle(), 1);
  PhaseVector seed(6);
  seed << 0.3, 0.0, 0.5, 0.3, 0.07, 0.1;
  const auto b = build_period_basis(sys, RegularValue((Vec(3) << 0.05, 0.02, 0.1).finished()), seed);
  const SigmaSample s = sigma_from_periods(b);
  REQUIRE(s.sigma.size() == 3);
  CHECK(std::abs(s.sigma[2]) < 1e-9);
}

TEST_CASE("normalized champagne sigma is closed on a grid") {
  const auto sys = normalized_champagne_bottle();
  SigmaGridOptions o;
  o.grid.threads = 4;
  const SigmaGrid g = sigma_grid(sys, linspace(0.02, 0.1, 9), linspace(-0.04, 0.04, 9), Vec(0), champagne_seed(), o);
  CHECK(closedness_defect(g) < 1e-3);
}

TEST_CASE("unnormalized champagne sigma is not closed") {
  // the raw moment map is not in normal form, so sigma is not a differential
  const auto sys = champagne_bottle();
  SigmaGridOptions o;
  o.grid.threads = 4;
  const SigmaGrid g = sigma_grid(sys, linspace(0.02, 0.1, 5), linspace(-0.04, 0.04, 5), Vec(0), champagne_seed(), o);
  CHECK(closedness_defect(g) > 1e-2);
}

TEST_CASE("action derivatives are the periods") {
  const auto sys = champagne_bottle();
  const auto basis = [&](double a, double b) {
    return build_period_basis(sys, RegularValue((Vec(2) << a, b).finished()), champagne_seed());
  };
  const PeriodBasis b0 = basis(0.05, 0.02);
  const Vec tau = b0.tau();
  const double h = 1e-4;
  const auto action = [&](double a, double b) { return action_integral(sys, basis(a, b), tau); };
  const double d1 = (action(0.05 + h, 0.02) - action(0.05 - h, 0.02)) / (2 * h);
  const double d2 = (action(0.05, 0.02 + h) - action(0.05, 0.02 - h)) / (2 * h);
  CHECK(std::abs(d1 - tau[0]) < 1e-4 * std::abs(tau[0]));
  CHECK(std::abs(d2 - tau[1]) < 1e-4 * std::abs(tau[1]));
}
