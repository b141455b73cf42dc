#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. They favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Max-scaled tf-idf with groups as documents, computed by rescanning every
// document for every (group, token) pair.
inline std::vector<std::map<std::string, double>>
tfidf(const std::vector<std::vector<std::string>> &docs) {
  const double n = static_cast<double>(docs.size());
  std::vector<std::map<std::string, double>> out(docs.size());
  for (std::size_t g = 0; g < docs.size(); ++g) {
    for (const auto &w : docs[g]) {
      double count = 0;
      for (const auto &x : docs[g]) count += (x == w) ? 1 : 0;
      double df = 0;
      for (const auto &d : docs) df += std::count(d.begin(), d.end(), w) > 0 ? 1 : 0;
      out[g][w] = count / static_cast<double>(docs[g].size()) * std::log10(n / df);
    }
    double top = 0;
    for (const auto &[w, s] : out[g]) top = std::max(top, s);
    if (top > 0)
      for (auto &[w, s] : out[g]) s /= top;
  }
  return out;
}

// Breadth-first search over single-token edits. Intermediate sequences
// never need to exceed the longer input.
inline std::size_t edit_distance(const std::vector<std::string> &a,
                                 const std::vector<std::string> &b,
                                 const std::vector<std::string> &alphabet) {
  const std::size_t cap = std::max(a.size(), b.size());
  std::map<std::vector<std::string>, std::size_t> seen{{a, 0}};
  std::deque<std::vector<std::string>> frontier{a};
  while (!frontier.empty()) {
    auto cur = frontier.front();
    frontier.pop_front();
    const std::size_t d = seen[cur];
    if (cur == b) return d;
    std::vector<std::vector<std::string>> next;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      auto del = cur;
      del.erase(del.begin() + static_cast<std::ptrdiff_t>(i));
      next.push_back(del);
      for (const auto &s : alphabet)
        if (s != cur[i]) {
          auto sub = cur;
          sub[i] = s;
          next.push_back(sub);
        }
    }
    if (cur.size() < cap)
      for (std::size_t i = 0; i <= cur.size(); ++i)
        for (const auto &s : alphabet) {
          auto ins = cur;
          ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(i), s);
          next.push_back(ins);
        }
    for (auto &n : next)
      if (seen.emplace(n, d + 1).second) frontier.push_back(std::move(n));
  }
  return std::numeric_limits<std::size_t>::max();
}

// Minimum transport cost over the vertices of the transportation polytope:
// every support of n + m - 1 cells whose linear system has a non-negative
// solution is a candidate plan.
inline double transport_by_vertices(const Eigen::MatrixXd &cost, const Eigen::VectorXd &supply,
                                    const Eigen::VectorXd &demand) {
  const auto n = cost.rows(), m = cost.cols();
  const auto cells = n * m, basis = n + m - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(cells), 0);
  std::fill(pick.end() - basis, pick.end(), 1);
  do {
    std::vector<Eigen::Index> support;
    for (Eigen::Index c = 0; c < cells; ++c)
      if (pick[static_cast<std::size_t>(c)]) support.push_back(c);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m, basis);
    Eigen::VectorXd rhs(n + m);
    rhs << supply, demand;
    for (Eigen::Index k = 0; k < basis; ++k) {
      A(support[k] / m, k) = 1;
      A(n + support[k] % m, k) = 1;
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(rhs);
    if ((A * x - rhs).norm() > 1e-9 || x.minCoeff() < -1e-12) continue;
    double total = 0;
    for (Eigen::Index k = 0; k < basis; ++k)
      total += x[k] * cost(support[k] / m, support[k] % m);
    best = std::min(best, total);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

// Average precision as the mean, over relevant items, of the fraction of
// the prefix ending at that item which is relevant.
inline double average_precision(const std::vector<std::size_t> &ranked,
                                const std::set<std::size_t> &relevant) {
  double sum = 0;
  for (std::size_t r : relevant) {
    const auto at = std::find(ranked.begin(), ranked.end(), r);
    if (at == ranked.end()) continue;
    const std::size_t depth = static_cast<std::size_t>(at - ranked.begin()) + 1;
    std::size_t hits = 0;
    for (std::size_t p = 0; p < depth; ++p) hits += relevant.count(ranked[p]);
    sum += static_cast<double>(hits) / static_cast<double>(depth);
  }
  return sum / static_cast<double>(relevant.size());
}

inline double precision_at(const std::vector<std::size_t> &ranked,
                           const std::set<std::size_t> &relevant, std::size_t k) {
  std::set<std::size_t> top(ranked.begin(),
                            ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size())));
  std::size_t hits = 0;
  for (std::size_t r : relevant) hits += top.count(r);
  return static_cast<double>(hits) / static_cast<double>(k);
}

} // namespace oracle
