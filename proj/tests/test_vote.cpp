#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "mvap/ensemble.hpp"
#include "mvap/rng.hpp"

using namespace mvap;
using namespace mvap::ensemble;
using nn::Prediction;

namespace {

// Independent recount: rank every class by (votes, summed confidence,
// -index) and derive which stage decided.
VoteOutcome oracle_vote(const std::vector<Prediction>& preds) {
  int counts[9] = {};
  double conf[9] = {};
  for (const auto& p : preds) {
    counts[p.class_id] += 1;
    conf[p.class_id] += p.confidence;
  }
  int winner = 0;
  for (int k = 1; k < 9; ++k) {
    if (counts[k] > counts[winner] ||
        (counts[k] == counts[winner] && conf[k] > conf[winner]))
      winner = k;
  }
  int count_ties = 0, conf_ties = 0;
  for (int k = 0; k < 9; ++k) {
    if (counts[k] == counts[winner]) {
      ++count_ties;
      if (conf[k] == conf[winner]) ++conf_ties;
    }
  }
  DecisionRule rule = DecisionRule::majority;
  if (count_ties > 1)
    rule = conf_ties > 1 ? DecisionRule::index_tiebreak
                         : DecisionRule::confidence_tiebreak;
  return {winner, rule};
}

}  // namespace

TEST_CASE("worked examples") {
  SUBCASE("strict plurality") {
    std::vector<Prediction> preds = {
        {0, 0.2}, {0, 0.3}, {2, 0.9}, {8, 0.9}, {0, 0.1}};
    const auto out = vote(preds);
    CHECK(out.class_id == 0);
    CHECK(out.rule == DecisionRule::majority);
  }
  SUBCASE("count tie falls to summed confidence") {
    std::vector<Prediction> preds = {{1, 0.9}, {1, 0.8}, {2, 0.95}, {2, 0.6}};
    const auto out = vote(preds);  // 1.7 > 1.55
    CHECK(out.class_id == 1);
    CHECK(out.rule == DecisionRule::confidence_tiebreak);
  }
  SUBCASE("single prediction wins as a majority") {
    std::vector<Prediction> preds = {{4, 0.5}};
    const auto out = vote(preds);
    CHECK(out.class_id == 4);
    CHECK(out.rule == DecisionRule::majority);
  }
  SUBCASE("residual tie picks the lowest index") {
    std::vector<Prediction> preds = {{3, 0.5}, {5, 0.5}};
    const auto out = vote(preds);
    CHECK(out.class_id == 3);
    CHECK(out.rule == DecisionRule::index_tiebreak);
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(vote({}), std::invalid_argument);
  }
  SUBCASE("out-of-range class is rejected") {
    std::vector<Prediction> preds = {{9, 0.5}};
    CHECK_THROWS_AS(vote(preds), std::invalid_argument);
  }
}

TEST_CASE("vote matches the exhaustive tally oracle on 10k random slates") {
  Rng rng(4242);
  // Confidences from a tiny grid so ties at both stages occur in bulk.
  const double conf_grid[4] = {0.25, 0.5, 0.5, 0.75};
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t voters = 1 + rng.below(5);
    std::vector<Prediction> preds;
    const int class_pool = 2 + static_cast<int>(rng.below(8));  // force collisions
    for (std::size_t i = 0; i < voters; ++i)
      preds.push_back({static_cast<int>(rng.below(
                           static_cast<std::uint64_t>(class_pool))),
                       conf_grid[rng.below(4)]});
    const auto got = vote(preds);
    const auto expect = oracle_vote(preds);
    INFO("trial " << trial);
    REQUIRE(got.class_id == expect.class_id);
    REQUIRE(got.rule == expect.rule);
  }
}

TEST_CASE("vote properties") {
  Rng rng(99);

  SUBCASE("invariant under permutation") {
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<Prediction> preds;
      const std::size_t voters = 1 + rng.below(5);
      for (std::size_t i = 0; i < voters; ++i)
        preds.push_back({static_cast<int>(rng.below(9)), rng.uniform()});
      const auto base = vote(preds);
      for (int shuffle_round = 0; shuffle_round < 4; ++shuffle_round) {
        shuffle(preds.begin(), preds.end(), rng);
        const auto shuffled = vote(preds);
        CHECK(shuffled.class_id == base.class_id);
        CHECK(shuffled.rule == base.rule);
      }
    }
  }

  SUBCASE("duplicating the winner never changes the winner") {
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<Prediction> preds;
      const std::size_t voters = 1 + rng.below(5);
      for (std::size_t i = 0; i < voters; ++i)
        preds.push_back({static_cast<int>(rng.below(9)), rng.uniform()});
      const auto base = vote(preds);
      Prediction dup{base.class_id, rng.uniform()};
      preds.push_back(dup);
      CHECK(vote(preds).class_id == base.class_id);
    }
  }

  SUBCASE("unanimity for every slate size") {
    for (int k = 1; k <= 7; ++k) {
      std::vector<Prediction> preds(static_cast<std::size_t>(k),
                                    Prediction{6, 0.4});
      const auto out = vote(preds);
      CHECK(out.class_id == 6);
      CHECK(out.rule == DecisionRule::majority);
    }
  }
}

TEST_CASE("decision rule names") {
  CHECK(to_string(DecisionRule::majority) == "majority");
  CHECK(to_string(DecisionRule::confidence_tiebreak) == "confidence-tiebreak");
  CHECK(to_string(DecisionRule::index_tiebreak) == "index-tiebreak");
}
