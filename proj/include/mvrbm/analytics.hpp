#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mvrbm {

using Code = std::vector<std::uint8_t>;

/// |p and q| / |p or q| over set bits; 1 when both codes are empty.
double jaccard(const Code& p, const Code& q);

std::size_t hamming_distance(const Code& p, const Code& q);

struct ClusterAssignment {
  std::vector<int> cluster;
  int clusters = 0;
  std::vector<Code> centroids;
  int iterations = 0;
};

/// k-means under Hamming distance with elementwise-majority centroids (a
/// tie gives 0). Initial centroids are `clusters` distinct codes drawn
/// without replacement from the sorted distinct codes, so the result does
/// not depend on record order. Empty clusters are re-seeded with the point
/// farthest from its centroid.
ClusterAssignment hamming_kmeans(const std::vector<Code>& codes, int clusters, std::uint64_t seed,
                                 int max_iter = 100);

/// Fraction of item pairs on which two labelings agree (same vs different).
double rand_index(const std::vector<int>& labels, const std::vector<int>& reference);

/// Rand index against a pair relation: items i and j belong together when
/// jaccard(reference_sets[i], reference_sets[j]) >= rho2.
double rand_index_overlap(const std::vector<int>& labels, const std::vector<Code>& reference_sets, double rho2);

struct RankedItem {
  std::int64_t id = 0;
  double distance = 0.0;
  bool relevant = false;
};

/// Corpus items by ascending distance to the query, ties by ascending id.
struct RetrievalResult {
  std::int64_t query_id = 0;
  std::vector<RankedItem> items;
};

/// Ranks `corpus` by symmetric KL to `query`. An item is relevant when its
/// label equals the query label (and the query is labelled, label >= 0).
RetrievalResult rank_by_distance(std::int64_t query_id, const Eigen::VectorXd& query, int query_label,
                                 const std::vector<Eigen::VectorXd>& corpus, const std::vector<std::int64_t>& ids,
                                 const std::vector<int>& labels);

/// One ranking per query; queries run on up to `threads` workers.
std::vector<RetrievalResult> retrieve_all(const std::vector<Eigen::VectorXd>& queries,
                                          const std::vector<std::int64_t>& query_ids,
                                          const std::vector<int>& query_labels,
                                          const std::vector<Eigen::VectorXd>& corpus,
                                          const std::vector<std::int64_t>& corpus_ids,
                                          const std::vector<int>& corpus_labels, int threads = 1);

/// Precision averaged over the relevant positions within the top k; 0 if
/// none of the top k is relevant.
double average_precision_at_k(const std::vector<bool>& relevance, int k);
/// Binary gains, 1/log2(rank+1) discount, normalised by the ideal ordering
/// of the whole list; 0 when nothing is relevant.
double ndcg_at_k(const std::vector<bool>& relevance, int k);

double map_at_k(const std::vector<RetrievalResult>& results, int k);
double ndcg_at_k(const std::vector<RetrievalResult>& results, int k);

/// Spearman correlation with average ranks for ties; 0 if either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mvrbm
