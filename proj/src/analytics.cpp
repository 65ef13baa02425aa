#include "mvrbm/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mvrbm/errors.hpp"
#include "mvrbm/regularizers.hpp"
#include "mvrbm/rng.hpp"
#include "parallel.hpp"

namespace mvrbm {

namespace {

void require_same_size(const Code& p, const Code& q) {
  if (p.size() != q.size()) throw UsageError("codes have different lengths");
}

std::vector<bool> relevance_of(const RetrievalResult& r) {
  std::vector<bool> rel;
  rel.reserve(r.items.size());
  for (const auto& item : r.items) rel.push_back(item.relevant);
  return rel;
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> rank(x.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s;
    while (e + 1 < idx.size() && x[idx[e + 1]] == x[idx[s]]) ++e;
    const double r = 0.5 * static_cast<double>(s + e) + 1.0;
    for (std::size_t t = s; t <= e; ++t) rank[idx[t]] = r;
    s = e + 1;
  }
  return rank;
}

}  // namespace

double jaccard(const Code& p, const Code& q) {
  require_same_size(p, q);
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    both += (p[i] && q[i]);
    either += (p[i] || q[i]);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

std::size_t hamming_distance(const Code& p, const Code& q) {
  require_same_size(p, q);
  std::size_t d = 0;
  for (std::size_t i = 0; i < p.size(); ++i) d += (p[i] != 0) != (q[i] != 0);
  return d;
}

ClusterAssignment hamming_kmeans(const std::vector<Code>& codes, int clusters, std::uint64_t seed, int max_iter) {
  if (clusters < 1) throw UsageError("cluster count must be >= 1");
  if (max_iter < 1) throw UsageError("max_iter must be >= 1");
  if (codes.empty()) throw UsageError("no codes to cluster");
  const std::size_t width = codes.front().size();
  for (const auto& c : codes)
    if (c.size() != width) throw UsageError("codes have different lengths");

  std::vector<Code> distinct(codes);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<std::size_t>(clusters) > distinct.size())
    throw UsageError("requested " + std::to_string(clusters) + " clusters but only " +
                     std::to_string(distinct.size()) + " distinct codes");

  ClusterAssignment out;
  out.clusters = clusters;
  Rng rng = make_rng(seed, "kmeans");
  std::sample(distinct.begin(), distinct.end(), std::back_inserter(out.centroids), clusters, rng);

  const std::size_t n = codes.size();
  out.cluster.assign(n, -1);
  for (int it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      std::size_t best_d = std::numeric_limits<std::size_t>::max();
      for (int c = 0; c < clusters; ++c) {
        const std::size_t d = hamming_distance(codes[i], out.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (out.cluster[i] != best) {
        out.cluster[i] = best;
        changed = true;
      }
    }

    std::vector<std::vector<std::size_t>> ones(clusters, std::vector<std::size_t>(width, 0));
    std::vector<std::size_t> count(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++count[out.cluster[i]];
      for (std::size_t k = 0; k < width; ++k) ones[out.cluster[i]][k] += codes[i][k] != 0;
    }
    for (int c = 0; c < clusters; ++c) {
      if (count[c] == 0) {
        // Farthest point from its own centroid; ties go to the smallest code.
        std::size_t far = 0, far_d = 0;
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
          if (count[out.cluster[i]] <= 1) continue;
          const std::size_t d = hamming_distance(codes[i], out.centroids[out.cluster[i]]);
          if (!found || d > far_d || (d == far_d && codes[i] < codes[far])) {
            far = i;
            far_d = d;
            found = true;
          }
        }
        if (!found) continue;
        --count[out.cluster[far]];
        for (std::size_t k = 0; k < width; ++k) ones[out.cluster[far]][k] -= codes[far][k] != 0;
        out.cluster[far] = c;
        count[c] = 1;
        for (std::size_t k = 0; k < width; ++k) ones[c][k] = codes[far][k] != 0;
        changed = true;
      }
    }
    for (int c = 0; c < clusters; ++c)
      for (std::size_t k = 0; k < width; ++k) out.centroids[c][k] = 2 * ones[c][k] > count[c] ? 1 : 0;
    if (!changed) break;
  }
  return out;
}

double rand_index(const std::vector<int>& labels, const std::vector<int>& reference) {
  if (labels.size() != reference.size()) throw UsageError("labelings cover different numbers of items");
  const std::size_t n = labels.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) agree += (labels[i] == labels[j]) == (reference[i] == reference[j]);
  return static_cast<double>(agree) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double rand_index_overlap(const std::vector<int>& labels, const std::vector<Code>& reference_sets, double rho2) {
  if (labels.size() != reference_sets.size()) throw UsageError("labelings cover different numbers of items");
  if (!(rho2 >= 0.0 && rho2 <= 1.0)) throw UsageError("rho2 must lie in [0, 1]");
  const std::size_t n = labels.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      agree += (labels[i] == labels[j]) == (jaccard(reference_sets[i], reference_sets[j]) >= rho2);
  return static_cast<double>(agree) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

RetrievalResult rank_by_distance(std::int64_t query_id, const Eigen::VectorXd& query, int query_label,
                                 const std::vector<Eigen::VectorXd>& corpus, const std::vector<std::int64_t>& ids,
                                 const std::vector<int>& labels) {
  if (ids.size() != corpus.size() || labels.size() != corpus.size())
    throw UsageError("corpus ids and labels must match the corpus size");
  RetrievalResult r;
  r.query_id = query_id;
  r.items.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].size() != query.size()) throw UsageError("profile dimensions differ");
    r.items.push_back({ids[i], symmetric_kl(query, corpus[i]), query_label >= 0 && labels[i] == query_label});
  }
  std::sort(r.items.begin(), r.items.end(), [](const RankedItem& x, const RankedItem& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.id < y.id;
  });
  return r;
}

std::vector<RetrievalResult> retrieve_all(const std::vector<Eigen::VectorXd>& queries,
                                          const std::vector<std::int64_t>& query_ids,
                                          const std::vector<int>& query_labels,
                                          const std::vector<Eigen::VectorXd>& corpus,
                                          const std::vector<std::int64_t>& corpus_ids,
                                          const std::vector<int>& corpus_labels, int threads) {
  if (query_ids.size() != queries.size() || query_labels.size() != queries.size())
    throw UsageError("query ids and labels must match the number of queries");
  std::vector<RetrievalResult> out(queries.size());
  detail::parallel_for(queries.size(), threads, [&](std::size_t q) {
    out[q] = rank_by_distance(query_ids[q], queries[q], query_labels[q], corpus, corpus_ids, corpus_labels);
  });
  return out;
}

double average_precision_at_k(const std::vector<bool>& relevance, int k) {
  if (k < 1) throw UsageError("k must be >= 1");
  const std::size_t depth = std::min(relevance.size(), static_cast<std::size_t>(k));
  double hits = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < depth; ++i)
    if (relevance[i]) {
      hits += 1.0;
      sum += hits / static_cast<double>(i + 1);
    }
  return hits > 0.0 ? sum / hits : 0.0;
}

double ndcg_at_k(const std::vector<bool>& relevance, int k) {
  if (k < 1) throw UsageError("k must be >= 1");
  const std::size_t depth = std::min(relevance.size(), static_cast<std::size_t>(k));
  const auto total = static_cast<std::size_t>(std::count(relevance.begin(), relevance.end(), true));
  double dcg = 0.0, ideal = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    const double discount = 1.0 / std::log2(static_cast<double>(i) + 2.0);
    if (relevance[i]) dcg += discount;
    if (i < total) ideal += discount;
  }
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

double map_at_k(const std::vector<RetrievalResult>& results, int k) {
  if (k < 1) throw UsageError("k must be >= 1");
  if (results.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : results) s += average_precision_at_k(relevance_of(r), k);
  return s / static_cast<double>(results.size());
}

double ndcg_at_k(const std::vector<RetrievalResult>& results, int k) {
  if (k < 1) throw UsageError("k must be >= 1");
  if (results.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : results) s += ndcg_at_k(relevance_of(r), k);
  return s / static_cast<double>(results.size());
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw UsageError("spearman: sizes differ");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

}  // namespace mvrbm
