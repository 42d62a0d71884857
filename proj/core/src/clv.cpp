#include "clvboost/clv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "clvboost/errors.hpp"
#include "clvboost/numerics.hpp"
#include "clvboost/parallel.hpp"

namespace clvboost {

namespace {

std::uint64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

Matrix gather_columns(const Matrix& x, const std::vector<int>& members) {
  Matrix block(x.rows(), static_cast<Index>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i)
    block.col(static_cast<Index>(i)) = x.col(members[i]);
  return block;
}

std::vector<int> merge_members(const std::vector<int>& a,
                               const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Top-2 eigenvalues of the members' correlation matrix, through the smaller
// of the q x q or n x n route (unit-norm columns make both carry the same
// nonzero spectrum).
std::pair<double, double> correlation_top2(const Matrix& x_unit,
                                           const std::vector<int>& members) {
  const Index n = x_unit.rows();
  const Index q = static_cast<Index>(members.size());
  Matrix block = gather_columns(x_unit, members);
  Matrix s;
  if (q <= n) {
    s = Matrix::Zero(q, q);
    s.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
  } else {
    s = Matrix::Zero(n, n);
    s.selfadjointView<Eigen::Lower>().rankUpdate(block);
  }
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  const EigenSystem sys = sym_full_eig(SymMatrix(std::move(s)), false);
  const double l1 = sys.values[0];
  const double l2 = sys.values.size() > 1 ? sys.values[1] : 0.0;
  return {l1, l2};
}

}  // namespace

Dendrogram build_hierarchy(const Matrix& x_pre, int threads) {
  const Index n = x_pre.rows();
  const Index p = x_pre.cols();
  if (p < 1) throw DataError("need at least one column to cluster");
  if (n < 2) throw DataError("need at least two rows to cluster");

  Dendrogram d;
  d.p = static_cast<int>(p);
  d.n = static_cast<int>(n);
  d.nodes.reserve(static_cast<std::size_t>(2 * p - 1));
  d.parent.assign(static_cast<std::size_t>(2 * p - 1), -1);

  Matrix x_unit(n, p);  // unit-norm columns, for correlation spectra
  for (Index j = 0; j < p; ++j) {
    ClusterNode leaf;
    leaf.id = static_cast<int>(j);
    leaf.members = {static_cast<int>(j)};
    GroupCriterion gc = group_criterion(x_pre.col(j));
    leaf.t = gc.t;
    leaf.loadings = {gc.loadings[0]};
    leaf.component = std::move(gc.component);
    leaf.kg_lambda1 = 1.0;  // correlation matrix of one variable
    leaf.kg_lambda2 = 0.0;
    d.nodes.push_back(std::move(leaf));
    x_unit.col(j) = x_pre.col(j) / x_pre.col(j).norm();
  }

  std::vector<int> active(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) active[static_cast<std::size_t>(j)] = static_cast<int>(j);

  std::unordered_map<std::uint64_t, double> loss;
  loss.reserve(static_cast<std::size_t>(p) * static_cast<std::size_t>(p) / 2);

  auto union_loss = [&](int a, int b) {
    const Matrix block =
        gather_columns(x_pre, merge_members(d.nodes[static_cast<std::size_t>(a)].members,
                                            d.nodes[static_cast<std::size_t>(b)].members));
    return d.nodes[static_cast<std::size_t>(a)].t +
           d.nodes[static_cast<std::size_t>(b)].t - group_criterion_value(block);
  };

  // All singleton pairs up front, then only rows touching the newest cluster.
  {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(p) * (static_cast<std::size_t>(p) - 1) / 2);
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j)
        pairs.emplace_back(active[i], active[j]);
    std::vector<double> values(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k)
        values[k] = union_loss(pairs[k].first, pairs[k].second);
    });
    for (std::size_t k = 0; k < pairs.size(); ++k)
      loss[pair_key(pairs[k].first, pairs[k].second)] = values[k];
  }

  for (int step = 1; step < static_cast<int>(p); ++step) {
    // Smallest loss wins; exact ties resolve to the smallest
    // (min member of A, min member of B) so the scan order is irrelevant.
    int best_a = -1, best_b = -1;
    double best_loss = 0.0;
    std::pair<int, int> best_key{0, 0};
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        int a = active[i], b = active[j];
        const double l = loss.at(pair_key(a, b));
        if (d.nodes[static_cast<std::size_t>(a)].members.front() >
            d.nodes[static_cast<std::size_t>(b)].members.front())
          std::swap(a, b);
        const std::pair<int, int> key{
            d.nodes[static_cast<std::size_t>(a)].members.front(),
            d.nodes[static_cast<std::size_t>(b)].members.front()};
        if (best_a < 0 || l < best_loss || (l == best_loss && key < best_key)) {
          best_a = a;
          best_b = b;
          best_loss = l;
          best_key = key;
        }
      }
    }

    ClusterNode node;
    node.id = static_cast<int>(p) - 1 + step;
    node.children = {best_a, best_b};
    node.members = merge_members(d.nodes[static_cast<std::size_t>(best_a)].members,
                                 d.nodes[static_cast<std::size_t>(best_b)].members);
    GroupCriterion gc = group_criterion(gather_columns(x_pre, node.members));
    node.t = gc.t;
    node.loadings.assign(gc.loadings.data(), gc.loadings.data() + gc.loadings.size());
    node.component = std::move(gc.component);
    node.merge_loss = d.nodes[static_cast<std::size_t>(best_a)].t +
                      d.nodes[static_cast<std::size_t>(best_b)].t - node.t;
    std::tie(node.kg_lambda1, node.kg_lambda2) =
        correlation_top2(x_unit, node.members);

    d.parent[static_cast<std::size_t>(best_a)] = node.id;
    d.parent[static_cast<std::size_t>(best_b)] = node.id;
    d.nodes.push_back(std::move(node));
    d.merge_order.push_back(static_cast<int>(p) - 1 + step);

    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](int id) { return id == best_a || id == best_b; }),
                 active.end());
    const int fresh = static_cast<int>(p) - 1 + step;
    std::vector<double> values(active.size());
    parallel_for(active.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k)
        values[k] = union_loss(fresh, active[k]);
    });
    for (std::size_t k = 0; k < active.size(); ++k)
      loss[pair_key(fresh, active[k])] = values[k];
    active.push_back(fresh);
  }

  return d;
}

std::vector<int> partition_at(const Dendrogram& d, int k) {
  if (k < 1 || k > d.p) throw DataError("partition level out of range");
  const int p = d.p;
  const int merges_applied = p - k;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (const ClusterNode& node : d.nodes) {
    const int birth = node.id < p ? 0 : node.id - (p - 1);
    const int parent = d.parent[static_cast<std::size_t>(node.id)];
    const int death = parent < 0 ? p : parent - (p - 1);
    if (birth <= merges_applied && merges_applied < death)
      out.push_back(node.id);
  }
  std::sort(out.begin(), out.end(), [&](int a, int b) {
    return d.nodes[static_cast<std::size_t>(a)].members.front() <
           d.nodes[static_cast<std::size_t>(b)].members.front();
  });
  return out;
}

double kg_threshold(int group_size, int p) {
  return 1.0 + 2.0 * std::sqrt(static_cast<double>(group_size - 1) /
                               static_cast<double>(p - 1));
}

bool kg_unidimensional(const ClusterNode& node, int p) {
  if (node.size() <= 1) return true;
  const double threshold = kg_threshold(node.size(), p);
  return node.kg_lambda1 > threshold && node.kg_lambda2 <= threshold;
}

std::string dendrogram_to_json(const Dendrogram& d, bool full) {
  nlohmann::json j;
  j["p"] = d.p;
  j["n"] = d.n;
  j["merge_order"] = d.merge_order;
  nlohmann::json nodes = nlohmann::json::array();
  for (const ClusterNode& node : d.nodes) {
    nlohmann::json item;
    item["id"] = node.id;
    item["members"] = node.members;
    if (node.children)
      item["children"] = {node.children->first, node.children->second};
    else
      item["children"] = nullptr;
    item["T"] = node.t;
    item["merge_loss"] = node.merge_loss;
    item["kg"] = {node.kg_lambda1, node.kg_lambda2};
    nlohmann::json loadings = nlohmann::json::object();
    for (std::size_t i = 0; i < node.members.size(); ++i)
      loadings[std::to_string(node.members[i])] = node.loadings[i];
    item["loadings"] = std::move(loadings);
    if (full) {
      std::vector<double> component(node.component.data(),
                                    node.component.data() + node.component.size());
      item["component"] = std::move(component);
    }
    nodes.push_back(std::move(item));
  }
  j["nodes"] = std::move(nodes);
  return j.dump(2) + "\n";
}

}  // namespace clvboost
