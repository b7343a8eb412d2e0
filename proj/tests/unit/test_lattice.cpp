#include "semitoric/errors.hpp"
#include "semitoric/lattice.hpp"
#include "semitoric/models.hpp"

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

RegularValue value(double a, double b) { return RegularValue((Vec(2) << a, b).finished()); }

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

TEST_CASE("regular value caches w") {
  const RegularValue v = value(0.05, 0.02);
  CHECK(v.w == std::complex<double>(0.05, 0.02));
}

TEST_CASE("leaf projection") {
  const auto sys = champagne_bottle();
  const Vec v = value(0.05, 0.02).v;
  const PhaseVector p = project_to_leaf(sys, v, champagne_seed());
  CHECK((moment_map(sys, p) - v).lpNorm<Eigen::Infinity>() < kTolLeafNewton);
}

TEST_CASE("inside-model return: worked values") {
  const double eps = 0.3, e2 = eps * eps;
  const auto r0 = inside_model_return({e2, 0.0}, eps);
  CHECK(std::abs(r0) < 1e-15);
  const auto r1 = inside_model_return({0.0, e2}, eps);
  CHECK(std::abs(r1.real()) < 1e-15);
  CHECK(r1.imag() == doctest::Approx(kPi / 2));
  CHECK(kind_of([&] { inside_model_return({-e2, 0.0}, eps); }) == ErrorKind::BranchCut);
  CHECK(kind_of([&] { inside_model_return({0.0, 0.0}, eps); }) == ErrorKind::NotRegular);
}

TEST_CASE("log branch with a rotated cut") {
  const LogBranch principal;
  CHECK(std::abs(principal.log({1.0, 0.0})) == 0.0);
  const LogBranch down{-kPi / 2};
  // arg in (-5 pi / 2, -pi / 2): the negative real axis gets -pi
  CHECK(down.log({-1.0, 0.0}).imag() == doctest::Approx(-kPi));
  CHECK(down.log({1.0, 0.0}).imag() == doctest::Approx(-2 * kPi));
  CHECK(down.on_cut({0.0, -2.0}));
  CHECK_FALSE(down.on_cut({-1.0, 0.0}));
  const auto r = inside_model_return({-0.09, 0.0}, 0.3, down);
  CHECK(std::abs(r.real()) < 1e-15);
  CHECK(r.imag() == doctest::Approx(-kPi));
}

TEST_CASE("champagne bottle period basis") {
  const auto sys = champagne_bottle();
  const PeriodBasis b = build_period_basis(sys, value(0.05, 0.02), champagne_seed());
  CHECK(b.tau()[0] > 0.0);
  CHECK(std::isfinite(b.tau()[0]));
  CHECK(b.residuals.maxCoeff() < 1e-8);
  CHECK(b.rows(1, 0) == 0.0);
  CHECK(b.rows(1, 1) == doctest::Approx(2 * kPi));
  // oracle: halved integration tolerances
  BasisOptions fine;
  fine.hit.tol = Tolerances{0.5e-10, 0.5e-12};
  const PeriodBasis c = build_period_basis(sys, value(0.05, 0.02), champagne_seed(), fine);
  CHECK((c.tau() - b.tau()).norm() < 1e-7);
}

TEST_CASE("reflection symmetry: tau_1(h, j) = tau_1(h, -j)") {
  const auto sys = champagne_bottle();
  for (double j : {0.01, 0.03}) {
    const double a = build_period_basis(sys, value(0.04, j), champagne_seed()).tau()[0];
    const double b = build_period_basis(sys, value(0.04, -j), champagne_seed()).tau()[0];
    CHECK(std::abs(a - b) < 1e-8);
  }
}

TEST_CASE("tau does not depend on the anchor") {
  const auto sys = champagne_bottle();
  PhaseVector other(4);
  other << -0.1, 0.35, 0.05, -0.2;
  const Vec a = build_period_basis(sys, value(0.05, 0.02), champagne_seed()).tau();
  const Vec b = build_period_basis(sys, value(0.05, 0.02), other).tau();
  CHECK(std::abs(a[0] - b[0]) < 1e-7);
  CHECK(std::abs(wrap_angle(a[1] - b[1])) < 1e-7);
}

TEST_CASE("product system decouples") {
  const auto sys = product_with_free_torus(champagne_bottle(), 1);
  PhaseVector seed(6);
  seed << 0.3, 0.0, 0.5, 0.3, 0.07, 0.1;
  const PeriodBasis b =
      build_period_basis(sys, RegularValue((Vec(3) << 0.05, 0.02, 0.1).finished()), seed);
  CHECK(b.tau()[2] == doctest::Approx(0.0));
  CHECK(b.rows.row(2).isApprox((Vec(3) << 0.0, 0.0, 2 * kPi).finished().transpose()));
  CHECK(b.residuals.maxCoeff() < 1e-8);
}

TEST_CASE("lattice property on a basis") {
  const auto sys = champagne_bottle();
  const PeriodBasis b = build_period_basis(sys, value(0.05, 0.02), champagne_seed());
  CHECK(lattice_defect(sys, b, 1) < kTolFlow);
}

TEST_CASE("critical value is not regular") {
  const auto sys = champagne_bottle();
  CHECK(kind_of([&] { build_period_basis(sys, value(0.0, 0.0), champagne_seed()); }) == ErrorKind::NotRegular);
}

TEST_CASE("period grid") {
  const auto sys = champagne_bottle();
  CHECK(period_grid(sys, {}, champagne_seed()).empty());
  std::vector<RegularValue> values{value(0.05, 0.0), value(0.0, 0.0), value(0.0, 0.05)};
  const auto out = period_grid(sys, values, champagne_seed());
  REQUIRE(out.size() == 3);
  CHECK(out[0].basis.has_value());
  CHECK(out[1].error == ErrorKind::NotRegular);
  CHECK(out[2].basis.has_value());
  GridOptions threaded;
  threaded.threads = 3;
  const auto again = period_grid(sys, values, champagne_seed(), threaded);
  CHECK(again[0].basis->tau() == out[0].basis->tau());
  CHECK(again[2].basis->tau() == out[2].basis->tau());
}

TEST_CASE("ring of values with continuation") {
  const auto sys = champagne_bottle();
  std::vector<RegularValue> ring;
  for (int k = 0; k < 64; ++k) {
    const double a = 2 * kPi * k / 64;
    ring.push_back(value(0.05 * std::cos(a), 0.05 * std::sin(a)));
  }
  GridOptions go;
  go.policy = AnchorPolicy::Continuation;
  const auto out = period_grid(sys, ring, champagne_seed(), go);
  REQUIRE(out.size() == 64);
  for (const auto& e : out) {
    REQUIRE(e.basis.has_value());
    CHECK(e.basis->residuals.maxCoeff() < 1e-8);
  }
}
