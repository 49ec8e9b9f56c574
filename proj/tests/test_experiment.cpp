#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "envdiff/experiment.hpp"

using namespace envdiff;
using namespace envdiff::experiment;

namespace {

ExperimentConfig small_config(int rule, StrategyKind strategy, int n = 60) {
  ExperimentConfig c;
  c.env.rule = eca::rule_from_number(rule);
  c.n_policies = n;
  c.steps = 60;
  c.strategy = strategy;
  return c;
}

PolicyEntry programmed(int id, const std::string& digits) {
  PolicyEntry e;
  e.policy_id = id;
  e.raw = apl::decode(digits);
  e.simplified = apl::simplify(e.raw);
  return e;
}

}  // namespace

TEST_CASE("strategy names") {
  for (auto s : {StrategyKind::Fresh, StrategyKind::RandomWalkPrefix, StrategyKind::Chained, StrategyKind::LevinSearch}) {
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK(parse_strategy("Chained") == StrategyKind::Chained);
  CHECK_THROWS(parse_strategy("greedy"));
  CHECK(parse_policy_kind("random-walk") == PolicyKind::RandomWalk);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.random_walk_count() == 100);
  CHECK(c.random_walk_interval() == 20);
  c.n_policies = 21;
  CHECK_THROWS(c.validate());
  c = ExperimentConfig{};
  c.len_min = 0;
  CHECK_THROWS(c.validate());
  c = ExperimentConfig{};
  c.steps = 0;
  CHECK_THROWS(c.validate());
  c = ExperimentConfig{};
  c.random_walk_frac = 1.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("default population layout") {
  ExperimentConfig c;
  auto pop = generate_population(c);
  REQUIRE(pop.size() == 2000);
  int walks = 0;
  for (const auto& e : pop) {
    if (e.kind == PolicyKind::RandomWalk) {
      ++walks;
      CHECK(e.policy_id % 20 == 0);
      CHECK(e.raw.empty());
    } else {
      CHECK(e.policy_id % 20 != 0);
      CHECK(e.raw.size() >= 1);
      CHECK(e.raw.size() <= 20);
      CHECK(e.k >= 0);
      CHECK(e.k <= 20);
    }
  }
  CHECK(walks == 100);
  CHECK(pop[19].kind == PolicyKind::RandomWalk);
  CHECK(pop[1999].kind == PolicyKind::RandomWalk);

  auto again = generate_population(c);
  for (std::size_t i = 0; i < pop.size(); ++i) CHECK(pop[i].raw == again[i].raw);

  c.random_walk_frac = 0;
  for (const auto& e : generate_population(c)) CHECK(e.kind == PolicyKind::Programmed);

  ExperimentConfig tiny;
  tiny.n_policies = 20;
  auto t = generate_population(tiny);
  CHECK(std::count_if(t.begin(), t.end(), [](const auto& e) { return e.kind == PolicyKind::RandomWalk; }) == 1);
}

TEST_CASE("fresh evaluation examples") {
  auto c = small_config(0, StrategyKind::Fresh);
  Population pop{programmed(1, "0"), programmed(2, "352"), programmed(3, "352")};
  auto zero = evaluate_fresh(pop, c);
  for (const auto& r : zero) CHECK(r.reward == Rational(0));

  c.env.rule = eca::rule_from_number(110);
  auto recs = evaluate_fresh(pop, c);
  CHECK(recs[1].reward == recs[2].reward);
  CHECK(recs[0].order_index == 1);
  CHECK(recs[2].order_index == 3);

  auto c204 = small_config(204, StrategyKind::Fresh);
  c204.steps = 300;
  auto one = evaluate_fresh({programmed(1, "")}, c204);
  CHECK(one[0].reward == Rational(341, 512));
  CHECK(one[0].k == 0);
}

TEST_CASE("fresh records are order independent") {
  auto c = small_config(110, StrategyKind::Fresh, 40);
  auto pop = generate_population(c);
  auto recs = evaluate_fresh(pop, c);
  auto reversed = pop;
  std::reverse(reversed.begin(), reversed.end());
  auto recs2 = evaluate_fresh(reversed, c);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].policy_id == recs2[recs.size() - 1 - i].policy_id);
    CHECK(recs[i].reward == recs2[recs.size() - 1 - i].reward);
  }
  c.threads = 4;
  auto threaded = evaluate_fresh(pop, c);
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(threaded[i].reward == recs[i].reward);
}

TEST_CASE("random-walk prefix") {
  auto c = small_config(110, StrategyKind::RandomWalkPrefix, 40);
  auto pop = generate_population(c);
  c.prefix_len = 0;
  auto none = evaluate_random_walk_prefix(pop, c);
  auto fresh = evaluate_fresh(pop, c);
  for (std::size_t i = 0; i < pop.size(); ++i) CHECK(none[i].reward == fresh[i].reward);

  c.prefix_len = 50;
  auto a = evaluate_random_walk_prefix(pop, c);
  auto b = evaluate_random_walk_prefix(pop, c);
  bool differs = false;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(a[i].reward == b[i].reward);
    differs = differs || a[i].reward != fresh[i].reward;
  }
  CHECK(differs);

  c.env.rule = eca::rule_from_number(0);
  for (const auto& r : evaluate_random_walk_prefix(pop, c)) CHECK(r.reward == Rational(0));
}

TEST_CASE("chained evaluation") {
  auto c = small_config(0, StrategyKind::Chained);
  auto pop = generate_population(c);
  for (const auto& r : evaluate_chained(pop, c)) CHECK(r.reward == Rational(0));

  c.env.rule = eca::rule_from_number(110);
  auto recs = evaluate_chained(pop, c);
  std::multiset<int> ids;
  for (const auto& r : recs) ids.insert(r.policy_id);
  std::multiset<int> expected;
  for (const auto& e : pop) expected.insert(e.policy_id);
  CHECK(ids == expected);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].order_index == static_cast<int>(i) + 1);
    if (pop[i].kind == PolicyKind::RandomWalk) CHECK(recs[i].policy_id == pop[i].policy_id);
  }
  auto again = evaluate_chained(pop, c);
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(again[i].reward == recs[i].reward);

  Population single{programmed(1, "5324")};
  CHECK(evaluate_chained(single, c)[0].reward == evaluate_fresh(single, c)[0].reward);
}

TEST_CASE("sequential strategies carry the environment over") {
  auto c = small_config(204, StrategyKind::LevinSearch);
  // Under the static rule only the agent changes cells; the first policy
  // toggles cells as it walks, and the second one inherits that state.
  Population pop{programmed(1, "35"), programmed(2, "2424")};
  auto recs = evaluate_levin(pop, c);
  auto fresh = evaluate_fresh(pop, c);
  REQUIRE(recs[1].policy_id == 2);
  CHECK(recs[0].reward == fresh[0].reward);
  CHECK(recs[1].reward != fresh[1].reward);
}

TEST_CASE("levin order") {
  Population pop{programmed(1, "23232"), programmed(2, "2"), programmed(3, "424"), programmed(4, "25")};
  auto order = levin_order(pop);
  CHECK(order == std::vector<std::size_t>{1, 3, 2, 0});

  auto c = small_config(0, StrategyKind::LevinSearch);
  for (const auto& r : evaluate_levin(pop, c)) CHECK(r.reward == Rational(0));

  Population ties{programmed(1, "42"), programmed(2, "24")};
  CHECK(levin_order(ties) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("rewards stay below the bound") {
  auto c = small_config(122, StrategyKind::Chained, 100);
  const Rational bound = Rational(1) - Rational(1, 1024);
  for (const auto& r : evaluate(generate_population(c), c)) {
    CHECK(r.reward >= Rational(0));
    CHECK(r.reward <= bound);
  }
}

TEST_CASE("records csv round trip") {
  auto c = small_config(110, StrategyKind::Fresh, 40);
  auto recs = evaluate(generate_population(c), c);
  std::stringstream ss;
  write_records_csv(ss, recs);
  auto back = read_records_csv(ss);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].policy_id == recs[i].policy_id);
    CHECK(back[i].kind == recs[i].kind);
    CHECK(back[i].simplified == recs[i].simplified);
    CHECK(back[i].k == recs[i].k);
    CHECK(back[i].reward == recs[i].reward);
    CHECK(back[i].compressor_id == recs[i].compressor_id);
  }
  std::stringstream again;
  write_records_csv(again, back);
  std::stringstream first;
  write_records_csv(first, recs);
  CHECK(again.str() == first.str());

  std::stringstream jsonl;
  write_records_jsonl(jsonl, recs);
  std::string line;
  std::getline(jsonl, line);
  CHECK(line.rfind("{\"policy_id\":1,", 0) == 0);
}

TEST_CASE("records csv errors name the column") {
  std::stringstream missing("policy_id,kind\n1,programmed\n");
  try {
    read_records_csv(missing);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("program") != std::string::npos);
  }
  auto c = small_config(110, StrategyKind::Fresh, 20);
  std::stringstream ss;
  write_records_csv(ss, evaluate(generate_population(c), c));
  std::string text = ss.str();
  const auto row = text.find('\n') + 1;
  text.replace(text.find(',', row) + 1, std::string("programmed").size(), "robot");
  std::stringstream bad(text);
  CHECK_THROWS_AS(read_records_csv(bad), std::runtime_error);
}
