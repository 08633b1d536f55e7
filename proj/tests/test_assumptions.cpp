#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "tiltbound/assumptions.hpp"
#include "tiltbound/error.hpp"

using namespace tiltbound;

namespace {

MarkovModel no_self_loop() {
  return MarkovModel({"-1", "1"}, Matrix{{0.5, 0.5}, {1, 0}}, {-1, 1});
}

MarkovModel birth_death() {
  return MarkovModel({"-1", "0", "1"}, Matrix{{0.5, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, 0.5}},
                     {1, 0, -1});
}

std::set<std::string> labels(const MarkovModel& m, const StateSet& s) {
  std::set<std::string> out;
  for (auto i : s) out.insert(m.states()[i]);
  return out;
}

}  // namespace

TEST(Validate, PositiveMatrix) {
  const MarkovModel m =
      make_model(Matrix{{0.2, 0.5, 0.3}, {0.4, 0.4, 0.2}, {0.1, 0.1, 0.8}}, {3, -1, 2});
  const AssumptionReport r = validate(m);
  EXPECT_TRUE(r.a1 && r.a2 && r.a3 && r.a4);
  EXPECT_TRUE(r.violations.empty());
}

TEST(Validate, NoSelfLoopBreaksA1) {
  const MarkovModel m = no_self_loop();
  const AssumptionReport r = validate(m);
  EXPECT_FALSE(r.a1);
  EXPECT_TRUE(r.a2);
  EXPECT_TRUE(r.a3);
  EXPECT_TRUE(r.a4);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].id, 1);
  EXPECT_EQ(labels(m, r.violations[0].states), std::set<std::string>{"1"});
  EXPECT_EQ(labels(m, r.S_b), std::set<std::string>{"1"});
}

TEST(Validate, BirthDeathBreaksA2) {
  const MarkovModel m = birth_death();
  const AssumptionReport r = validate(m);
  EXPECT_TRUE(r.a1);
  EXPECT_FALSE(r.a2);
  EXPECT_EQ(labels(m, r.S_b), std::set<std::string>{"-1"});
  bool found = false;
  for (const auto& v : r.violations)
    if (v.id == 2) {
      found = true;
      EXPECT_EQ(labels(m, v.states), std::set<std::string>{"1"});
      EXPECT_NE(v.witness.find("'1'"), std::string::npos) << v.witness;
    }
  EXPECT_TRUE(found);
}

TEST(Validate, BlockWitnessPair) {
  // S_b = {0, 1} with an edge 0 -> 1 but none back inside the block.
  const MarkovModel m =
      make_model(Matrix{{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}}, {1, 1, 0});
  const AssumptionReport r = validate(m);
  EXPECT_FALSE(r.a1);
  ASSERT_FALSE(r.violations.empty());
  EXPECT_EQ(r.violations[0].id, 1);
  EXPECT_EQ(r.violations[0].states, (StateSet{1, 0}));
}

TEST(Validate, RejectsReducibleChain) {
  EXPECT_THROW(validate(make_model(Matrix{{1, 0}, {0.5, 0.5}}, {0, 1})), AssumptionError);
}

TEST(Validate, RequireSide) {
  EXPECT_THROW(require_side(no_self_loop(), Side::upper, "test"), AssumptionError);
  EXPECT_NO_THROW(require_side(no_self_loop(), Side::lower, "test"));
  try {
    require_side(birth_death(), Side::upper, "bounds");
  } catch (const AssumptionError& e) {
    EXPECT_EQ(e.module(), "bounds");
    EXPECT_NE(std::string(e.what()).find("A2"), std::string::npos);
  }
}

TEST(Validate, AgreesWithOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 400; ++trial) {
    const MarkovModel m = oracle::random_irreducible(rng, 2, 6);
    const AssumptionReport r = validate(m);
    ASSERT_EQ(r.upper(), oracle::upper_assumptions(m));
    ASSERT_EQ(r.lower(), oracle::upper_assumptions(m.negated()));
  }
}

TEST(Validate, NegationSwapsSides) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const MarkovModel m = oracle::random_irreducible(rng);
    const AssumptionReport r = validate(m), n = validate(m.negated());
    EXPECT_EQ(r.a1, n.a3);
    EXPECT_EQ(r.a2, n.a4);
    EXPECT_EQ(r.a3, n.a1);
    EXPECT_EQ(r.a4, n.a2);
    EXPECT_EQ(r.S_b, n.S_a);
    EXPECT_EQ(r.S_a, n.S_b);
  }
}

TEST(Validate, PositiveMatricesSatisfyAll) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const MarkovModel m = oracle::random_positive(rng, 2 + trial % 5);
    EXPECT_TRUE(validate(m).all());
  }
}

TEST(Validate, RelabelingInvariant) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const MarkovModel m = oracle::random_irreducible(rng);
    const std::size_t s = m.size();
    std::vector<std::size_t> perm(s);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix p(s, s);
    Vector f(s);
    std::vector<std::string> names(s);
    for (std::size_t i = 0; i < s; ++i) {
      names[perm[i]] = m.states()[i];
      f[perm[i]] = m.observable()[i];
      for (std::size_t j = 0; j < s; ++j) p(perm[i], perm[j]) = m.transition()(i, j);
    }
    const MarkovModel pm(names, p, f);
    const AssumptionReport a = validate(m), b = validate(pm);
    EXPECT_EQ(a.a1, b.a1);
    EXPECT_EQ(a.a2, b.a2);
    EXPECT_EQ(a.a3, b.a3);
    EXPECT_EQ(a.a4, b.a4);
    EXPECT_EQ(labels(m, a.S_b), labels(pm, b.S_b));
    EXPECT_EQ(labels(m, a.S_a), labels(pm, b.S_a));
    ASSERT_EQ(a.violations.size(), b.violations.size());
    for (std::size_t i = 0; i < a.violations.size(); ++i) {
      EXPECT_EQ(a.violations[i].id, b.violations[i].id);
      if (a.violations[i].id % 2 == 0) {  // entry witnesses are full sets
        EXPECT_EQ(labels(m, a.violations[i].states), labels(pm, b.violations[i].states));
      }
    }
  }
}
