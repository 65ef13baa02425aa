#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "helpers.hpp"
#include "mvrbm/errors.hpp"
#include "mvrbm/gradcheck.hpp"
#include "mvrbm/oracle.hpp"
#include "mvrbm/rng.hpp"

using namespace mvrbm;
using namespace testing;

namespace {

// Nested loops over binary v and h with the energy written out by hand.
double naive_binary_log_partition(const ModelParams& p) {
  const int n = static_cast<int>(p.a.size());
  const int k = static_cast<int>(p.b.size());
  double z = 0.0;
  for (int vm = 0; vm < (1 << n); ++vm)
    for (int hm = 0; hm < (1 << k); ++hm) {
      double minus_e = 0.0;
      for (int i = 0; i < n; ++i) minus_e += p.a[i] * ((vm >> i) & 1);
      for (int j = 0; j < k; ++j) minus_e += p.b[j] * ((hm >> j) & 1);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) minus_e += ((vm >> i) & 1) * p.W(i, j) * ((hm >> j) & 1);
      z += std::exp(minus_e);
    }
  return std::log(z);
}

MixedRecord with_lengths(const VisibleSchema& s, Rng& rng) { return random_record(s, rng, 3); }

// Sum of exp(log P(v)) over every record of the visible space with the
// replication counts of `like`.
double total_probability(const ModelParams& p, const VisibleSchema& s, const MixedRecord& like) {
  const auto points = oracle::enumerate_visible(p, s, oracle::lengths_of(like, s));
  double total = 0.0;
  for (const auto& pt : points) total += std::exp(oracle::exact_log_likelihood(to_record(pt.state, s), p, s));
  return total;
}

}  // namespace

TEST_CASE("log partition of zero parameters counts configurations") {
  const VisibleSchema s = binary_schema(2);
  CHECK(oracle::exact_log_partition(ModelParams::zeros(s, 2), s) == doctest::Approx(std::log(16.0)).epsilon(1e-15));
}

TEST_CASE("log partition of one standard Gaussian unit") {
  const VisibleSchema s({{"g", UnitType::gaussian(1.0)}});
  CHECK(oracle::exact_log_partition(ModelParams::zeros(s, 1), s) ==
        doctest::Approx(std::log(2.0 * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-15));
}

TEST_CASE("log partition agrees with a naive enumerator on binary models") {
  Rng rng = make_rng(21, "test");
  for (int trial = 0; trial < 50; ++trial) {
    const VisibleSchema s = binary_schema(2 + trial % 3);
    const ModelParams p = random_params(s, 1 + trial % 3, 1.5, rng);
    CHECK(std::abs(oracle::exact_log_partition(p, s) - naive_binary_log_partition(p)) <= 1e-9);
  }
}

TEST_CASE("closed-form and energy-enumerated log partitions agree on mixed schemas") {
  Rng rng = make_rng(22, "test");
  for (int trial = 0; trial < 40; ++trial) {
    const VisibleSchema s = random_tiny_schema(rng, 3, true);
    const ModelParams p = random_params(s, 1 + trial % 3, 0.7, rng);
    const MixedRecord r = with_lengths(s, rng);
    const auto lengths = oracle::lengths_of(r, s);
    CHECK(std::abs(oracle::exact_log_partition(p, s, lengths) - oracle::enumerated_log_partition(p, s, lengths)) <=
          1e-9);
  }
}

TEST_CASE("log partition is invariant under relabelling hidden units") {
  Rng rng = make_rng(23, "test");
  for (int trial = 0; trial < 20; ++trial) {
    const VisibleSchema s = random_tiny_schema(rng, 4, true);
    const ModelParams p = random_params(s, 3, 1.0, rng);
    const MixedRecord r = with_lengths(s, rng);
    ModelParams q = p;
    const int perm[3] = {2, 0, 1};
    for (int j = 0; j < 3; ++j) {
      q.b[j] = p.b[perm[j]];
      q.W.col(j) = p.W.col(perm[j]);
    }
    const auto lengths = oracle::lengths_of(r, s);
    CHECK(oracle::exact_log_partition(q, s, lengths) ==
          doctest::Approx(oracle::exact_log_partition(p, s, lengths)).epsilon(1e-13));
  }
}

TEST_CASE("log-likelihood of zero parameters is uniform") {
  const VisibleSchema s = binary_schema(2);
  const ModelParams p = ModelParams::zeros(s, 3);
  for (int v0 = 0; v0 < 2; ++v0)
    for (int v1 = 0; v1 < 2; ++v1)
      CHECK(oracle::exact_log_likelihood(binary_record({v0, v1}), p, s) ==
            doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("probabilities over the enumerated visible space sum to one") {
  Rng rng = make_rng(24, "test");
  for (int trial = 0; trial < 40; ++trial) {
    const VisibleSchema s = random_tiny_schema(rng, 4, false);
    const ModelParams p = random_params(s, 1 + trial % 3, 1.0, rng);
    CHECK(std::abs(total_probability(p, s, with_lengths(s, rng)) - 1.0) <= 1e-9);
  }
}

TEST_CASE("exact gradient matches central differences") {
  Rng rng = make_rng(25, "test");
  for (int trial = 0; trial < 30; ++trial) {
    const VisibleSchema s = random_tiny_schema(rng, 4, trial % 2 == 1);
    const ModelParams p = random_params(s, 1 + trial % 3, 0.7, rng);
    const MixedRecord r = with_lengths(s, rng);
    const Gradient g = oracle::exact_gradient(r, p, s);
    const Gradient fd =
        finite_difference([&](const ModelParams& q) { return oracle::exact_log_likelihood(r, q, s); }, p);
    CHECK(relative_error(g, fd) <= 1e-6);
  }
}

TEST_CASE("exact gradient vanishes on its own stationary point") {
  // One binary visible, no coupling: log P(v=1) is maximised by a -> +inf,
  // but the gradient of the mean over {0, 1} is zero at a = 0.
  const VisibleSchema s = binary_schema(1);
  const ModelParams p = ModelParams::zeros(s, 1);
  const Gradient g = oracle::exact_mean_gradient({binary_record({0}), binary_record({1})}, p, s);
  CHECK(g.da.norm() <= 1e-15);
  CHECK(g.dW.norm() <= 1e-15);
  CHECK(g.db.norm() <= 1e-15);
}

TEST_CASE("closed-form conditionals match enumeration") {
  Rng rng = make_rng(26, "test");
  for (int trial = 0; trial < 40; ++trial) {
    const VisibleSchema s = random_tiny_schema(rng, 4, true);
    const ModelParams p = random_params(s, 1 + trial % 3, 1.0, rng);
    const MixedRecord r = with_lengths(s, rng);
    const VisibleState v = encode(r, s);
    CHECK((oracle::enumerated_hidden_conditional(v, p, s) - hidden_conditional(v, p, s)).cwiseAbs().maxCoeff() <=
          1e-10);
    for (const auto& h : oracle::enumerate_hidden(p.hidden_units())) {
      const Eigen::VectorXd closed = expected_visible(visible_conditional(h, p, s, v.lengths), s).values;
      const Eigen::VectorXd brute = oracle::enumerated_visible_mean(h, p, s, v.lengths);
      CHECK((closed - brute).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("hybrid objectives") {
  Rng rng = make_rng(27, "test");
  for (int trial = 0; trial < 10; ++trial) {
    const VisibleSchema s({{"x", UnitType::binary()}, {"c", UnitType::categorical(3)}, {"y", UnitType::binary()}});
    const ModelParams p = random_params(s, 2, 1.0, rng);
    std::vector<MixedRecord> data;
    for (int i = 0; i < 5; ++i) data.push_back(random_record(s, rng));
    const auto one = oracle::hybrid_objectives(data, p, s, 1, 1.0);
    const auto zero = oracle::hybrid_objectives(data, p, s, 1, 0.0);
    const auto mid = oracle::hybrid_objectives(data, p, s, 1, 0.3);
    CHECK(one.hybrid == one.generative);
    CHECK(zero.hybrid == zero.discriminative);
    CHECK(mid.hybrid == doctest::Approx(0.3 * mid.generative + 0.7 * mid.discriminative).epsilon(1e-15));

    double direct = 0.0;
    for (const auto& r : data) {
      const Eigen::VectorXd cond = oracle::enumerated_unit_conditional(r, p, s, 1);
      direct += std::log(cond[std::get<CategoricalValue>(r.values[1]).index]);
    }
    CHECK(zero.discriminative == doctest::Approx(direct / 5.0).epsilon(1e-10));
  }
}

TEST_CASE("oracle refuses unsupported models") {
  const VisibleSchema cp({{"n", UnitType::constrained_poisson(3)}});
  CHECK_THROWS_AS(oracle::exact_log_partition(ModelParams::zeros(cp, 1), cp), oracle::Refusal);
  const VisibleSchema b = binary_schema(1);
  CHECK_THROWS_AS(oracle::exact_log_partition(ModelParams::zeros(b, 13), b), oracle::Refusal);
  const VisibleSchema rs({{"t", UnitType::replicated_softmax(3)}});
  CHECK_THROWS_AS(oracle::exact_log_partition(ModelParams::zeros(rs, 1), rs, {7.0}), oracle::Refusal);
  const VisibleSchema wide({{"t", UnitType::replicated_softmax(7)}});
  CHECK_THROWS_AS(oracle::exact_log_partition(ModelParams::zeros(wide, 1), wide, {2.0}), oracle::Refusal);
  CHECK_THROWS_AS(oracle::hybrid_objectives({binary_record({1})}, ModelParams::zeros(b, 1), b, 0, 1.5), UsageError);
}
