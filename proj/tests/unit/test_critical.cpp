#include "semitoric/critical.hpp"
#include "semitoric/errors.hpp"
#include "semitoric/models.hpp"

#include <doctest.h>

using namespace semitoric;

namespace {

WilliamsonIndex expected(const std::vector<BlockSpec>& blocks) {
  WilliamsonIndex w;
  for (const auto& b : blocks) switch (b.kind) {
      case BlockKind::Elliptic: w.k_e += b.multiplicity; break;
      case BlockKind::FocusFocus: w.k_f += b.multiplicity; break;
      case BlockKind::Hyperbolic: w.k_h += b.multiplicity; break;
      case BlockKind::Transverse: w.k_x += b.multiplicity; break;
    }
  return w;
}

}  // namespace

TEST_CASE("index arithmetic") {
  CHECK(WilliamsonIndex{1, 1, 0, 1}.degrees_of_freedom() == 4);
  CHECK(WilliamsonIndex{0, 1, 0, 0}.to_string() == "(k_e=0, k_f=1, k_h=0, k_x=0)");
}

TEST_CASE("rank of dF") {
  const auto sys = champagne_bottle();
  CHECK(rank_dF(sys, PhaseVector::Zero(4)) == 0);
  PhaseVector p(4);
  p << 0.3, 0.1, 0.2, -0.1;
  CHECK(rank_dF(sys, p) == 2);
  const auto prod = product_with_free_torus(sys, 1);
  CHECK(rank_dF(prod, PhaseVector::Zero(6)) == 1);
}

TEST_CASE("block models classify as built") {
  const std::vector<std::vector<BlockSpec>> cases{
      {{BlockKind::Elliptic, 1}},
      {{BlockKind::Hyperbolic, 1}},
      {{BlockKind::FocusFocus, 1}},
      {{BlockKind::Elliptic, 1}, {BlockKind::Hyperbolic, 1}},
      {{BlockKind::Elliptic, 2}, {BlockKind::Transverse, 1}},
      {{BlockKind::FocusFocus, 1}, {BlockKind::Transverse, 1}},
      {{BlockKind::Hyperbolic, 3}},
  };
  for (const auto& blocks : cases) {
    const auto sys = q_model(blocks);
    CriticalPoint cp;
    cp.point = PhaseVector::Zero(sys.dim());
    const WilliamsonIndex w = williamson_classify(sys, cp);
    CHECK(w == expected(blocks));
    CHECK_FALSE(cp.degenerate);
  }
}

TEST_CASE("champagne bottle origin is focus-focus") {
  const auto w = classify_at(champagne_bottle(), PhaseVector::Zero(4));
  CHECK(w == WilliamsonIndex{0, 1, 0, 0});
}

TEST_CASE("focus-focus times a free torus") {
  const auto sys = product_with_free_torus(champagne_bottle(), 1);
  CHECK(classify_at(sys, PhaseVector::Zero(6)) == WilliamsonIndex{0, 1, 0, 1});
}

TEST_CASE("elliptic times two free circles") {
  const auto sys = product_with_free_torus(q_model({{BlockKind::Elliptic, 1}}), 2);
  CHECK(sys.n == 3);
  CHECK(classify_at(sys, PhaseVector::Zero(6)) == WilliamsonIndex{1, 0, 0, 2});
}

TEST_CASE("dependent Hessians are degenerate") {
  auto sys = q_model({{BlockKind::Elliptic, 2}});
  sys.components[1] = sys.components[0];
  CriticalPoint cp;
  cp.point = PhaseVector::Zero(4);
  try {
    williamson_classify(sys, cp);
    FAIL("expected a degenerate point");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("regular points return the transverse index") {
  PhaseVector p(4);
  p << 0.3, 0.1, 0.2, -0.1;
  CHECK(classify_at(champagne_bottle(), p) == WilliamsonIndex{0, 0, 0, 2});
}

TEST_CASE("critical point search from a nearby seed") {
  const auto sys = champagne_bottle();
  PhaseVector seed(4);
  seed << 0.01, -0.02, 0.005, 0.01;
  const CriticalPoint cp = find_critical_point(sys, seed, 0);
  CHECK(cp.point.norm() < 1e-9);
  CHECK(cp.residual < kTolCrit);
  CHECK(cp.rank == 0);
}

TEST_CASE("critical search reports the wrong rank") {
  // the only nearby rank-deficient point of the champagne bottle has rank 0
  const auto sys = champagne_bottle();
  PhaseVector seed(4);
  seed << 0.01, -0.02, 0.005, 0.01;
  try {
    find_critical_point(sys, seed, 1);
    FAIL("expected wrong rank");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WrongRank);
  }
  CriticalSearchOptions o;
  o.allow_lower_rank = true;
  CHECK(find_critical_point(sys, seed, 1, o).rank == 0);
}

TEST_CASE("critical search finds a rank-1 orbit of the product") {
  const auto sys = product_with_free_torus(champagne_bottle(), 1);
  PhaseVector seed(6);
  seed << 0.02, 0.01, 1.3, -0.01, 0.02, 0.4;
  const CriticalPoint cp = find_critical_point(sys, seed, 1);
  CHECK(cp.rank == 1);
  CHECK(cp.point.head(2).norm() < 1e-9);
  CHECK(cp.point.segment(3, 2).norm() < 1e-9);
}

TEST_CASE("critical search fails without critical points") {
  const auto sys = q_model({{BlockKind::Transverse, 2}});
  try {
    find_critical_point(sys, PhaseVector::Zero(4), 0);
    FAIL("expected no convergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
  }
}

TEST_CASE("classification is reproducible for a fixed seed") {
  const auto sys = q_model({{BlockKind::FocusFocus, 1}, {BlockKind::Elliptic, 1}});
  CriticalPoint a, b;
  a.point = b.point = PhaseVector::Zero(6);
  ClassifyOptions o;
  o.seed = 42;
  CHECK(williamson_classify(sys, a, o) == williamson_classify(sys, b, o));
  CHECK(a.degenerate == b.degenerate);
}
