#include "faqforge/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "faqforge/error.hpp"

namespace faqforge {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Query make_query(std::string text, const TextResources &resources,
                 const Seq2SeqModel &model, const EmbeddingTable &table) {
  Query q;
  q.tokens = preprocess(text, resources);
  q.raw_text = std::move(text);
  q.predicted_keywords = canonicalize(model.predict(q.tokens, table));
  return q;
}

std::vector<std::size_t> RankedResult::ids() const {
  std::vector<std::size_t> out;
  out.reserve(entries.size());
  for (const auto &e : entries) out.push_back(e.entry_id);
  return out;
}

nlohmann::ordered_json to_json(const RankedResult &result) {
  auto out = nlohmann::ordered_json::array();
  for (const auto &e : result.entries)
    out.push_back({{"entry_id", e.entry_id},
                   {"distance", e.distance},
                   {"question", e.question},
                   {"answer", e.answer}});
  return out;
}

std::size_t token_levenshtein(std::span<const std::string> a,
                              std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double exact_transport(const MatrixXd &cost, std::span<const std::int64_t> supply,
                       std::span<const std::int64_t> demand) {
  const std::size_t n = supply.size(), m = demand.size();
  if (static_cast<std::size_t>(cost.rows()) != n || static_cast<std::size_t>(cost.cols()) != m)
    throw Error(ErrorKind::DimensionMismatch, "cost matrix does not match masses");
  const std::int64_t total = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  if (total != std::accumulate(demand.begin(), demand.end(), std::int64_t{0}))
    throw Error(ErrorKind::InvalidArgument, "supply and demand totals differ");

  // Nodes: 0 source, 1..n suppliers, n+1..n+m consumers, n+m+1 sink.
  struct Edge {
    std::size_t to;
    std::int64_t cap;
    double cost;
  };
  const std::size_t nodes = n + m + 2, source = 0, sink = n + m + 1;
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adj(nodes);
  auto add_edge = [&](std::size_t u, std::size_t v, std::int64_t cap, double c) {
    adj[u].push_back(edges.size());
    edges.push_back({v, cap, c});
    adj[v].push_back(edges.size());
    edges.push_back({u, 0, -c});
  };
  for (std::size_t i = 0; i < n; ++i) add_edge(source, 1 + i, supply[i], 0.0);
  for (std::size_t j = 0; j < m; ++j) add_edge(1 + n + j, sink, demand[j], 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      add_edge(1 + i, 1 + n + j, total, cost(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j)));

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  double result = 0.0;
  std::int64_t flow = 0;
  std::vector<double> dist(nodes);
  std::vector<std::size_t> via(nodes);
  while (flow < total) {
    // Bellman-Ford: residual costs may be negative.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(via.begin(), via.end(), kNone);
    dist[source] = 0.0;
    for (std::size_t round = 0; round + 1 < nodes; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (dist[u] == kInf) continue;
        for (std::size_t e : adj[u]) {
          const Edge &edge = edges[e];
          if (edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] - 1e-15) {
            dist[edge.to] = dist[u] + edge.cost;
            via[edge.to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (via[sink] == kNone) break;
    std::int64_t push = total - flow;
    for (std::size_t v = sink; v != source; v = edges[via[v] ^ 1].to)
      push = std::min(push, edges[via[v]].cap);
    for (std::size_t v = sink; v != source; v = edges[via[v] ^ 1].to) {
      edges[via[v]].cap -= push;
      edges[via[v] ^ 1].cap += push;
      result += static_cast<double>(push) * edges[via[v]].cost;
    }
    flow += push;
  }
  return result;
}

namespace {

struct Bag {
  std::vector<VectorXd> vectors;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
};

Bag make_bag(std::span<const std::string> words, const EmbeddingTable &table) {
  std::map<std::string, std::int64_t> counts;
  for (const auto &w : words)
    if (table.contains(w)) ++counts[w];
  Bag bag;
  for (const auto &[w, c] : counts) {
    VectorXd v = *table.embed(w, OovPolicy::Skip);
    const double n = v.norm();
    if (n > 0.0) v /= n;
    bag.vectors.push_back(std::move(v));
    bag.counts.push_back(c);
    bag.total += c;
  }
  return bag;
}

double bag_distance(const Bag &a, const Bag &b) {
  MatrixXd cost(static_cast<Eigen::Index>(a.vectors.size()),
                static_cast<Eigen::Index>(b.vectors.size()));
  for (std::size_t i = 0; i < a.vectors.size(); ++i)
    for (std::size_t j = 0; j < b.vectors.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (a.vectors[i] - b.vectors[j]).norm();
  // Integer masses: word weight count/|bag| scaled by |a|*|b|.
  std::vector<std::int64_t> supply, demand;
  for (auto c : a.counts) supply.push_back(c * b.total);
  for (auto c : b.counts) demand.push_back(c * a.total);
  return exact_transport(cost, supply, demand) /
         static_cast<double>(a.total * b.total);
}

} // namespace

double wmd(std::span<const std::string> a, std::span<const std::string> b,
           const EmbeddingTable &table) {
  const Bag ba = make_bag(a, table), bb = make_bag(b, table);
  if (ba.total == 0 || bb.total == 0)
    throw Error(ErrorKind::EmptyBag, "word bag is empty after skipping OOV tokens");
  return bag_distance(ba, bb);
}

double combined_distance(std::span<const std::string> query_keywords,
                         std::span<const std::string> entry_keywords,
                         const EmbeddingTable &table) {
  const Bag a = make_bag(query_keywords, table), b = make_bag(entry_keywords, table);
  double wmd_part = 0.0;
  if (a.total == 0 && b.total == 0)
    wmd_part = 0.0;
  else if (a.total == 0 || b.total == 0)
    wmd_part = 1.0;
  else
    wmd_part = std::clamp(bag_distance(a, b) / 2.0, 0.0, 1.0);

  const std::size_t longest = std::max(query_keywords.size(), entry_keywords.size());
  const double lev_part =
      longest == 0 ? 0.0
                   : static_cast<double>(token_levenshtein(query_keywords, entry_keywords)) /
                         static_cast<double>(longest);
  return 0.5 * wmd_part + 0.5 * lev_part;
}

RankedResult rank_positions(const Query &query, const TranslatedFaq &index,
                            std::span<const std::size_t> positions,
                            const EmbeddingTable &table) {
  const auto keywords = canonicalize(query.predicted_keywords);
  RankedResult result;
  result.entries.reserve(positions.size());
  for (std::size_t p : positions) {
    const auto &t = index.tuples[p];
    result.entries.push_back(RankedEntry{
        t.entry_id, combined_distance(keywords, t.keywords, table),
        t.question, t.answer});
  }
  std::sort(result.entries.begin(), result.entries.end(),
            [](const RankedEntry &x, const RankedEntry &y) {
              return x.distance != y.distance ? x.distance < y.distance
                                              : x.entry_id < y.entry_id;
            });
  return result;
}

RankedResult rank(const Query &query, const TranslatedFaq &index,
                  const EmbeddingTable &table, std::optional<std::size_t> top_k) {
  if (index.tuples.empty()) throw Error(ErrorKind::EmptyIndex, "translated index is empty");
  std::vector<std::size_t> positions(index.tuples.size());
  std::iota(positions.begin(), positions.end(), 0);
  auto result = rank_positions(query, index, positions, table);
  if (top_k && *top_k < result.entries.size()) result.entries.resize(*top_k);
  return result;
}

} // namespace faqforge
