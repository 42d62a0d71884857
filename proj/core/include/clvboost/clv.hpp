#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clvboost/types.hpp"

namespace clvboost {

struct ClusterNode {
  int id = -1;                     // 0..p-1 leaves, then formation order
  std::vector<int> members;        // sorted variable indices
  std::optional<std::pair<int, int>> children;
  double t = 0.0;                  // criterion value of the group
  std::vector<double> loadings;    // aligned with members; c = sum v_j x_j
  Vector component;                // unit norm, length n
  double kg_lambda1 = 0.0;         // top-2 eigenvalues of the members'
  double kg_lambda2 = 0.0;         //   correlation matrix
  double merge_loss = 0.0;         // T_A + T_B - T_{A u B}; 0 for leaves

  int size() const { return static_cast<int>(members.size()); }
};

struct Dendrogram {
  std::vector<ClusterNode> nodes;  // 2p-1
  std::vector<int> merge_order;    // p-1 internal node ids in formation order
  std::vector<int> parent;         // parent id per node, -1 for the root
  int p = 0;
  int n = 0;
};

/// Ascendant hierarchy over centered columns: repeatedly merges the pair
/// with the smallest criterion loss, recomputed exactly. Ties are broken by
/// the smallest (min member of A, min member of B) so results do not depend
/// on the thread count.
Dendrogram build_hierarchy(const Matrix& x_pre, int threads = 1);

/// Node ids of the K-cluster partition (the last K-1 merges undone), sorted
/// by smallest member index.
std::vector<int> partition_at(const Dendrogram& d, int k);

/// Threshold of the modified Kaiser-Guttman rule.
double kg_threshold(int group_size, int p);

/// True iff lambda1 > L and lambda2 <= L for L = 1 + 2 sqrt((|G|-1)/(p-1)).
/// Singletons pass by convention.
bool kg_unidimensional(const ClusterNode& node, int p);

std::string dendrogram_to_json(const Dendrogram& d, bool full = false);

}  // namespace clvboost
