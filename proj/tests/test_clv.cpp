#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "clvboost/clv.hpp"
#include "clvboost/errors.hpp"
#include "clvboost/numerics.hpp"
#include "clvboost/simulate.hpp"
#include "oracles.hpp"

using namespace clvboost;

namespace {

Matrix toy_preprocessed(std::uint64_t seed) {
  SimulationConfig config;
  config.seed = seed;
  const SimulatedData sim = simulate(config);
  Matrix x = sim.x;
  for (Index j = 0; j < x.cols(); ++j) {
    x.col(j).array() -= x.col(j).mean();
    x.col(j) /= sample_sd(x.col(j));
  }
  return x;
}

}  // namespace

TEST_CASE("hierarchy on tiny fixtures") {
  SUBCASE("two proportional columns merge at zero loss") {
    Vector base = oracle::random_matrix(5, 10, 1).col(0);
    base.array() -= base.mean();
    Matrix x(10, 2);
    x.col(0) = base;
    x.col(1) = 2.0 * base;
    const Dendrogram d = build_hierarchy(x);
    REQUIRE(d.nodes.size() == 3);
    CHECK(d.nodes[2].members == std::vector<int>{0, 1});
    CHECK(std::abs(d.nodes[2].merge_loss) < 1e-12);
  }
  SUBCASE("correlated pair merges before the independent column") {
    Matrix x = oracle::center_columns(oracle::grouped_matrix(9, 30, {2, 1}, 0.2));
    const Dendrogram d = build_hierarchy(x);
    CHECK(d.nodes[3].members == std::vector<int>{0, 1});
  }
  SUBCASE("single column hierarchy") {
    Matrix x = oracle::center_columns(oracle::random_matrix(4, 6, 1));
    const Dendrogram d = build_hierarchy(x);
    CHECK(d.nodes.size() == 1);
    CHECK(d.merge_order.empty());
    CHECK(partition_at(d, 1) == std::vector<int>{0});
  }
}

TEST_CASE("node bookkeeping invariants") {
  const Matrix x =
      oracle::center_columns(oracle::grouped_matrix(31, 25, {4, 3, 2}, 0.7));
  const Dendrogram d = build_hierarchy(x);
  const int p = d.p;
  REQUIRE(static_cast<int>(d.nodes.size()) == 2 * p - 1);
  CHECK(d.nodes.back().members.size() == static_cast<std::size_t>(p));

  for (const ClusterNode& node : d.nodes) {
    CHECK(std::is_sorted(node.members.begin(), node.members.end()));
    CHECK(std::abs(node.component.norm() - 1.0) < 1e-10);
    CHECK(node.merge_loss >= -1e-10);
    if (node.children) {
      const auto& left = d.nodes[static_cast<std::size_t>(node.children->first)];
      const auto& right = d.nodes[static_cast<std::size_t>(node.children->second)];
      std::vector<int> merged;
      std::merge(left.members.begin(), left.members.end(), right.members.begin(),
                 right.members.end(), std::back_inserter(merged));
      CHECK(merged == node.members);
      CHECK(node.t <= left.t + right.t + 1e-10);
    }
  }
}

TEST_CASE("criterion monotonicity across the partition path") {
  const Matrix x =
      oracle::center_columns(oracle::grouped_matrix(13, 20, {3, 3, 2}, 0.8));
  const Dendrogram d = build_hierarchy(x);
  const int p = d.p;

  double previous_total = 0.0;
  for (int k = p; k >= 1; --k) {
    double total = 0.0;
    for (const int id : partition_at(d, k))
      total += d.nodes[static_cast<std::size_t>(id)].t;
    if (k < p) {
      const int formed = d.merge_order[static_cast<std::size_t>(p - k - 1)];
      const double drop = previous_total - total;
      CHECK(drop >= -1e-9);
      CHECK(drop == doctest::Approx(
                        d.nodes[static_cast<std::size_t>(formed)].merge_loss)
                        .epsilon(1e-9));
    }
    previous_total = total;
  }
}

TEST_CASE("partition levels") {
  const Matrix x = oracle::center_columns(oracle::random_matrix(19, 12, 6));
  const Dendrogram d = build_hierarchy(x);
  SUBCASE("extremes") {
    const auto leaves = partition_at(d, 6);
    CHECK(leaves == std::vector<int>{0, 1, 2, 3, 4, 5});
    const auto root = partition_at(d, 1);
    CHECK(root == std::vector<int>{10});
  }
  SUBCASE("every level partitions the variables") {
    for (int k = 1; k <= 6; ++k) {
      std::set<int> seen;
      for (const int id : partition_at(d, k))
        for (const int j : d.nodes[static_cast<std::size_t>(id)].members)
          CHECK(seen.insert(j).second);
      CHECK(seen.size() == 6);
    }
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(partition_at(d, 0), DataError);
    CHECK_THROWS_AS(partition_at(d, 7), DataError);
  }
}

TEST_CASE("greedy merges match the exhaustive oracle on small p") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index n = 10 + static_cast<Index>(seed % 12);
    const Index p = 2 + static_cast<Index>(seed % 7);
    Matrix x;
    if (seed % 2 == 0) {
      x = oracle::random_matrix(seed * 7 + 1, n, p);
    } else {
      std::vector<int> sizes;
      int remaining = static_cast<int>(p);
      while (remaining > 0) {
        const int s = std::min(remaining, 2 + static_cast<int>(seed % 3));
        sizes.push_back(s);
        remaining -= s;
      }
      x = oracle::grouped_matrix(seed * 7 + 1, n, sizes, 0.5);
    }
    x = oracle::center_columns(std::move(x));

    const Dendrogram d = build_hierarchy(x);
    const auto expected = oracle::clv_merge_sequence(x);
    REQUIRE(expected.size() == d.merge_order.size());
    for (std::size_t step = 0; step < expected.size(); ++step) {
      const ClusterNode& node =
          d.nodes[static_cast<std::size_t>(d.merge_order[step])];
      REQUIRE(node.children.has_value());
      const auto& left = d.nodes[static_cast<std::size_t>(node.children->first)];
      const auto& right = d.nodes[static_cast<std::size_t>(node.children->second)];
      const auto& a = left.members.front() <= right.members.front() ? left : right;
      const auto& b = left.members.front() <= right.members.front() ? right : left;
      CHECK(a.members == expected[step].left);
      CHECK(b.members == expected[step].right);
      CHECK(std::abs(node.t - expected[step].union_t) <= 1e-10);
    }
  }
}

TEST_CASE("column reordering permutes the dendrogram") {
  const Matrix x =
      oracle::center_columns(oracle::grouped_matrix(41, 18, {3, 2, 2}, 0.6));
  const Index p = x.cols();
  std::vector<int> perm{5, 2, 6, 0, 3, 1, 4};
  Matrix shuffled(x.rows(), p);
  for (Index j = 0; j < p; ++j) shuffled.col(j) = x.col(perm[static_cast<std::size_t>(j)]);

  const Dendrogram base = build_hierarchy(x);
  const Dendrogram moved = build_hierarchy(shuffled);

  auto canonical = [&](const Dendrogram& d, const std::vector<int>* map) {
    std::vector<std::pair<std::vector<int>, double>> merges;
    for (const int id : d.merge_order) {
      std::vector<int> members = d.nodes[static_cast<std::size_t>(id)].members;
      if (map)
        for (int& j : members) j = (*map)[static_cast<std::size_t>(j)];
      std::sort(members.begin(), members.end());
      merges.emplace_back(std::move(members),
                          d.nodes[static_cast<std::size_t>(id)].t);
    }
    return merges;
  };

  const auto base_merges = canonical(base, nullptr);
  const auto moved_merges = canonical(moved, &perm);
  REQUIRE(base_merges.size() == moved_merges.size());
  for (std::size_t i = 0; i < base_merges.size(); ++i) {
    CHECK(base_merges[i].first == moved_merges[i].first);
    CHECK(std::abs(base_merges[i].second - moved_merges[i].second) < 1e-10);
  }
}

TEST_CASE("thread count does not change the result") {
  const Matrix x =
      oracle::center_columns(oracle::grouped_matrix(53, 22, {4, 3, 3}, 0.7));
  const Dendrogram one = build_hierarchy(x, 1);
  const Dendrogram four = build_hierarchy(x, 4);
  REQUIRE(one.nodes.size() == four.nodes.size());
  for (std::size_t v = 0; v < one.nodes.size(); ++v) {
    CHECK(one.nodes[v].members == four.nodes[v].members);
    CHECK(one.nodes[v].t == four.nodes[v].t);  // bit-identical
    CHECK(one.nodes[v].merge_loss == four.nodes[v].merge_loss);
  }
}

TEST_CASE("kaiser-guttman rule") {
  SUBCASE("threshold value") {
    CHECK(kg_threshold(10, 70) == doctest::Approx(1.722315118514615).epsilon(1e-12));
  }
  SUBCASE("singletons always pass") {
    ClusterNode node;
    node.members = {3};
    node.kg_lambda1 = 0.2;  // ignored for singletons
    node.kg_lambda2 = 0.0;
    CHECK(kg_unidimensional(node, 70));
  }
  SUBCASE("frozen decision cases") {
    ClusterNode node;
    node.members.assign(10, 0);
    node.kg_lambda1 = 5.0;
    node.kg_lambda2 = 1.1;
    CHECK(kg_unidimensional(node, 70));  // L = 1.7223: 5.0 > L, 1.1 <= L
    node.kg_lambda2 = 2.0;
    CHECK_FALSE(kg_unidimensional(node, 70));
  }
  SUBCASE("kg eigenvalues come from the correlation matrix") {
    // scaling one column must not move the kg spectrum
    Matrix x = oracle::center_columns(oracle::grouped_matrix(61, 16, {3}, 0.4));
    const Dendrogram base = build_hierarchy(x);
    Matrix scaled = x;
    scaled.col(1) *= 37.0;
    const Dendrogram other = build_hierarchy(scaled);
    const ClusterNode& a = base.nodes.back();
    const ClusterNode& b = other.nodes.back();
    CHECK(a.kg_lambda1 == doctest::Approx(b.kg_lambda1).epsilon(1e-9));
    CHECK(a.kg_lambda2 == doctest::Approx(b.kg_lambda2).epsilon(1e-9));
  }
}

TEST_CASE("toy data: cutting at five recovers the planted groups") {
  const Matrix x = toy_preprocessed(1);
  const Dendrogram d = build_hierarchy(x, 0);
  const auto part = partition_at(d, 5);
  REQUIRE(part.size() == 5);

  // Majority-vote mapping of clusters onto planted groups; allow the
  // occasional stray variable.
  const std::vector<int> bounds{0, 35, 40, 50, 60, 70};
  auto planted_of = [&](int j) {
    for (int g = 0; g < 5; ++g)
      if (j >= bounds[static_cast<std::size_t>(g)] &&
          j < bounds[static_cast<std::size_t>(g) + 1])
        return g;
    return -1;
  };
  int mismatches = 0;
  std::set<int> matched_groups;
  for (const int id : part) {
    std::map<int, int> votes;
    for (const int j : d.nodes[static_cast<std::size_t>(id)].members)
      ++votes[planted_of(j)];
    const int majority =
        std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) {
          return a.second < b.second;
        })->first;
    matched_groups.insert(majority);
    for (const int j : d.nodes[static_cast<std::size_t>(id)].members)
      if (planted_of(j) != majority) ++mismatches;
  }
  CHECK(matched_groups.size() == 5);
  CHECK(mismatches <= 2);
}

TEST_CASE("dendrogram json") {
  const Matrix x = oracle::center_columns(oracle::random_matrix(3, 8, 3));
  const Dendrogram d = build_hierarchy(x);
  SUBCASE("default omits components") {
    const auto j = nlohmann::json::parse(dendrogram_to_json(d));
    CHECK(j["p"] == 3);
    CHECK(j["n"] == 8);
    REQUIRE(j["nodes"].size() == 5);
    const auto& root = j["nodes"][4];
    CHECK(root["members"].size() == 3);
    CHECK(root.contains("T"));
    CHECK(root.contains("merge_loss"));
    CHECK(root["kg"].size() == 2);
    CHECK(root["loadings"].size() == 3);
    CHECK_FALSE(root.contains("component"));
    CHECK(j["nodes"][0]["children"].is_null());
  }
  SUBCASE("full embeds components") {
    const auto j = nlohmann::json::parse(dendrogram_to_json(d, true));
    CHECK(j["nodes"][0]["component"].size() == 8);
  }
}
