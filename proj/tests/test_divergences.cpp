#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "altproj/altproj.hpp"
#include "test_util.hpp"

using namespace altproj;
using test_util::joint2x2;
using Catch::Matchers::WithinAbs;

namespace {

MarginalDistribution margX(std::vector<double> w) {
  return MarginalDistribution(Axis::X, std::move(w));
}

JointMeasure random_denormalized(const SupportSet& s, Rng& rng, double lo = 0.2,
                                 double hi = 3.0) {
  std::vector<double> w(static_cast<std::size_t>(s.nx()) * s.ny(), 0.0);
  for (auto [x, y] : s.pairs()) w[s.index(x, y)] = rng.uniform(lo, hi);
  return JointMeasure::denormalized(s, std::move(w));
}

const SupportSet kShapes[] = {
    SupportSet::full(2, 2), SupportSet::full(3, 2), SupportSet::full(3, 3),
    SupportSet(3, 3, {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 0}, {2, 2}})};

}  // namespace

TEST_CASE("kl basics") {
  const auto u = JointMeasure::uniform(SupportSet::full(2, 2));
  CHECK(kl(u, u).value() == 0.0);

  const auto half = joint2x2({0.5, 0.5, 0.0, 0.0});
  CHECK_THAT(kl(half, u).value(), WithinAbs(std::log(2.0), 1e-15));

  CHECK_FALSE(kl(margX({1.0, 0.0}), margX({0.0, 1.0})).is_finite());
  CHECK_THROWS_AS(kl(margX({1.0, 0.0}), MarginalDistribution(Axis::Y, {1.0, 0.0})),
                  ShapeMismatch);
}

TEST_CASE("rkl swaps arguments, including the infinite cases") {
  const auto u = JointMeasure::uniform(SupportSet::full(2, 2));
  const auto half = joint2x2({0.5, 0.5, 0.0, 0.0});
  CHECK(rkl(u, u).value() == 0.0);
  CHECK(rkl(u, half) == kl(half, u));
  CHECK_THAT(rkl(u, half).value(), WithinAbs(std::log(2.0), 1e-15));
  CHECK(rkl(margX({0.0, 1.0}), margX({1.0, 0.0})) ==
        DivergenceValue::infinity());

  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_full_support(kShapes[2], rng);
    const auto q = random_full_support(kShapes[2], rng);
    CHECK(rkl(p, q) == kl(q, p));
  }
}

TEST_CASE("divergence value is an explicit extended real") {
  CHECK_THROWS_AS(DivergenceValue::infinity().value(), Error);
  CHECK(DivergenceValue::infinity() == DivergenceValue::infinity());
  CHECK(DivergenceValue::finite(0.5) != DivergenceValue::infinity());
}

TEST_CASE("b_h") {
  CHECK(b_h(2.0, 2.0) == 0.0);
  const double e = std::exp(1.0);
  CHECK_THAT(b_h(1.0, e), WithinAbs(e - 2.0, 1e-15));
  CHECK_THAT(b_h(e, 1.0), WithinAbs(1.0, 1e-15));
  CHECK_THROWS_AS(b_h(0.0, 1.0), NonPositiveInput);
  CHECK_THROWS_AS(b_h(1.0, -1.0), NonPositiveInput);
}

TEST_CASE("bregman_entropy") {
  const SupportSet s = SupportSet::full(2, 2);
  const auto u = JointMeasure::uniform(s);
  CHECK(bregman_entropy(u, u) == 0.0);

  const auto twice = JointMeasure::denormalized(s, {0.5, 0.5, 0.5, 0.5});
  CHECK_THAT(bregman_entropy(twice, u), WithinAbs(2.0 * std::log(2.0) - 1.0,
                                                  1e-15));

  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_full_support(kShapes[1], rng);
    const auto q = random_full_support(kShapes[1], rng);
    // equals KL on probability inputs
    CHECK_THAT(bregman_entropy(p, q), WithinAbs(kl(p, q).value(), 1e-12));
    CHECK(bregman_entropy(p, q) >= 0.0);
  }
}

TEST_CASE("decompose_bregman_entropy") {
  Rng rng(6);
  const SupportSet s = SupportSet::full(3, 3);

  // equal total masses: the scalar part vanishes
  {
    auto p = random_denormalized(s, rng);
    std::vector<double> scaled(p.dense());
    const auto q0 = random_denormalized(s, rng);
    const double ratio = p.total_mass() / q0.total_mass();
    for (auto [x, y] : s.pairs()) scaled[s.index(x, y)] = q0.at(x, y) * ratio;
    const auto q = JointMeasure::denormalized(s, std::move(scaled));
    const auto [scalar, klp] = decompose_bregman_entropy(p, q);
    CHECK_THAT(scalar, WithinAbs(0.0, 1e-12));
  }

  // probability inputs: (0, kl)
  {
    Rng r2(7);
    const auto p = random_full_support(s, r2);
    const auto q = random_full_support(s, r2);
    const auto [scalar, klp] = decompose_bregman_entropy(p, q);
    CHECK_THAT(scalar, WithinAbs(0.0, 1e-12));
    CHECK_THAT(klp, WithinAbs(kl(p, q).value(), 1e-12));
  }

  // parts sum to the full divergence
  for (int i = 0; i < 200; ++i) {
    const auto p = random_denormalized(s, rng);
    const auto q = random_denormalized(s, rng);
    const auto [scalar, klp] = decompose_bregman_entropy(p, q);
    CHECK_THAT(scalar + klp, WithinAbs(bregman_entropy(p, q), 1e-12));
    CHECK(scalar >= 0.0);
    CHECK(klp >= -1e-15);
  }
}

TEST_CASE("bregman_dual") {
  const SupportSet s = SupportSet::full(2, 1);
  const auto zero = JointMeasure::log_likelihood(s, {0.0, 0.0});
  CHECK(bregman_dual(zero, zero) == 0.0);

  // reverse property: B_H(p, q) == B_{H*}(log q, log p)
  Rng rng(8);
  for (const SupportSet& shape : kShapes) {
    for (int i = 0; i < 200; ++i) {
      const auto p = random_denormalized(shape, rng);
      const auto q = random_denormalized(shape, rng);
      const double direct = bregman_entropy(p, q);
      const double dual = bregman_dual(log_denormalize(q), log_denormalize(p));
      CHECK_THAT(dual, WithinAbs(direct, 1e-12));
    }
  }

  // rkl(pi_es, pi_t) as a dual divergence on full-support probabilities
  Rng r2(9);
  for (int i = 0; i < 50; ++i) {
    const auto es = random_full_support(kShapes[2], r2);
    const auto pt = random_full_support(kShapes[2], r2);
    CHECK_THAT(bregman_dual(log_denormalize(es), log_denormalize(pt)),
               WithinAbs(rkl(es, pt).value(), 1e-12));
  }
}

TEST_CASE("kl_chain_rule") {
  const SupportSet s = SupportSet::full(3, 2);
  Rng rng(10);

  {
    const auto p = random_full_support(s, rng);
    const auto [m, c] = kl_chain_rule(p, p, Axis::X);
    CHECK(m == 0.0);
    CHECK(c == 0.0);
  }

  // shared y|x conditionals: the conditional term vanishes and the joint
  // divergence reduces to the marginal one
  {
    const auto base = random_full_support(s, rng);
    const auto k = conditional(base, Direction::YGivenX);
    const auto p = joint_from(k, marginal(random_full_support(s, rng), Axis::X));
    const auto q = joint_from(k, marginal(random_full_support(s, rng), Axis::X));
    const auto [m, c] = kl_chain_rule(p, q, Axis::X);
    CHECK_THAT(c, WithinAbs(0.0, 1e-14));
    CHECK_THAT(kl(p, q).value(),
               WithinAbs(kl(marginal(p, Axis::X), marginal(q, Axis::X)).value(),
                         1e-12));
  }

  for (int i = 0; i < 200; ++i) {
    const auto p = random_full_support(s, rng);
    const auto q = random_full_support(s, rng);
    for (Axis axis : {Axis::X, Axis::Y}) {
      const auto [m, c] = kl_chain_rule(p, q, axis);
      CHECK_THAT(m + c, WithinAbs(kl(p, q).value(), 1e-12));
      CHECK(m >= -1e-15);
      CHECK(c >= -1e-15);
    }
  }

  const auto dirac = JointMeasure::dirac(s, 0, 0);
  const auto other = JointMeasure::dirac(s, 1, 1);
  CHECK_THROWS_AS(kl_chain_rule(dirac, other, Axis::X),
                  AbsoluteContinuityViolation);
}

TEST_CASE("entropy gradient matches central finite differences") {
  // Oracle: (H(pi + h e) - H(pi - h e)) / 2h per coordinate, h = 1e-5.
  const double h = 1e-5;
  Rng rng(12);
  for (const SupportSet& s : {SupportSet::full(2, 2), SupportSet::full(3, 3)}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto pi = random_denormalized(s, rng, 0.3, 2.5);
      const auto grad = log_denormalize(pi);
      for (auto [x, y] : s.pairs()) {
        std::vector<double> up(pi.dense()), down(pi.dense());
        up[s.index(x, y)] += h;
        down[s.index(x, y)] -= h;
        const double fd = (entropy(JointMeasure::denormalized(s, up)) -
                           entropy(JointMeasure::denormalized(s, down))) /
                          (2.0 * h);
        CHECK_THAT(grad.at(x, y), WithinAbs(fd, 1e-6));
      }
    }
  }
}

TEST_CASE("non-negativity and positivity") {
  Rng rng(14);
  const SupportSet s = SupportSet::full(3, 3);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_full_support(s, rng);
    const auto q = random_full_support(s, rng);
    CHECK(kl(p, q).value() >= 0.0);
    CHECK(kl(p, q).value() > 0.0);  // distinct random draws
    CHECK(bregman_entropy(p, q) > 0.0);
    CHECK(bregman_dual(log_denormalize(p), log_denormalize(q)) > 0.0);
  }
}
