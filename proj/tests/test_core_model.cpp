#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "helpers.hpp"
#include "mvrbm/errors.hpp"
#include "mvrbm/gradcheck.hpp"
#include "mvrbm/rng.hpp"

using namespace mvrbm;
using namespace testing;

TEST_CASE("schema widths and offsets") {
  const VisibleSchema s({{"x", UnitType::binary()},
                         {"g", UnitType::gaussian(2.0)},
                         {"c", UnitType::categorical(4)},
                         {"n", UnitType::constrained_poisson(5)},
                         {"t", UnitType::replicated_softmax(3)}});
  CHECK(s.total_weight_columns() == 1 + 1 + 4 + 5 + 3);
  CHECK(s.offset(0) == 0);
  CHECK(s.offset(2) == 2);
  CHECK(s.offset(4) == 11);
  CHECK(s.index_of("n") == 3);
  CHECK(s.has_replicated_softmax());
  CHECK_THROWS_AS(s.index_of("missing"), SchemaError);
}

TEST_CASE("schema rejects invalid declarations") {
  CHECK_THROWS_AS(VisibleSchema({{"g", UnitType::gaussian(0.0)}}), SchemaError);
  CHECK_THROWS_AS(VisibleSchema({{"c", UnitType::categorical(1)}}), SchemaError);
  CHECK_THROWS_AS(VisibleSchema({{"t", UnitType::replicated_softmax(0)}}), SchemaError);
  CHECK_THROWS_AS(VisibleSchema({{"n", UnitType::constrained_poisson(0)}}), SchemaError);
  CHECK_THROWS_AS(VisibleSchema({{"a", UnitType::binary()}, {"a", UnitType::binary()}}), SchemaError);
  CHECK_THROWS_AS(VisibleSchema({{"", UnitType::binary()}}), SchemaError);
}

TEST_CASE("record validation") {
  const VisibleSchema s({{"c", UnitType::categorical(3)}, {"t", UnitType::replicated_softmax(2)}});
  MixedRecord ok;
  ok.values = {CategoricalValue{2}, TokenValue{{0, 1, 1}}};
  CHECK_NOTHROW(validate(ok, s));
  CHECK(ok.replication() == 3);

  MixedRecord bad = ok;
  bad.values[0] = CategoricalValue{3};
  CHECK_THROWS_AS(validate(bad, s), ValidationError);
  bad = ok;
  bad.values[1] = TokenValue{{2}};
  CHECK_THROWS_AS(validate(bad, s), ValidationError);
  bad = ok;
  bad.values[0] = BinaryValue{1};
  CHECK_THROWS_AS(validate(bad, s), SchemaError);
  bad.values.pop_back();
  CHECK_THROWS_AS(validate(bad, s), SchemaError);
  MixedRecord missing = ok;
  missing.values[0] = std::monostate{};
  CHECK_THROWS_AS(validate(missing, s), ValidationError);
  CHECK_NOTHROW(validate(missing, s, true));
}

TEST_CASE("energy of zero parameters vanishes") {
  const VisibleSchema s = binary_schema(2);
  const ModelParams p = ModelParams::zeros(s, 1);
  CHECK(energy(binary_record({0, 0}), vec({0}), p, s) == 0.0);
}

TEST_CASE("energy of a single standard Gaussian unit") {
  const VisibleSchema s({{"g", UnitType::gaussian(1.0)}});
  const ModelParams p = ModelParams::zeros(s, 1);
  MixedRecord r;
  r.values = {GaussianValue{1.0}};
  CHECK(energy(r, vec({0}), p, s) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("energy matches a term-by-term sum on binary models") {
  const VisibleSchema s = binary_schema(2);
  Rng rng = make_rng(11, "test");
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams p = random_params(s, 2, 1.0, rng);
    for (int v0 = 0; v0 < 2; ++v0)
      for (int v1 = 0; v1 < 2; ++v1)
        for (int h0 = 0; h0 < 2; ++h0)
          for (int h1 = 0; h1 < 2; ++h1) {
            const int v[2] = {v0, v1};
            const int h[2] = {h0, h1};
            double naive = 0.0;
            for (int i = 0; i < 2; ++i) naive -= p.a[i] * v[i];
            for (int j = 0; j < 2; ++j) naive -= p.b[j] * h[j];
            for (int i = 0; i < 2; ++i)
              for (int j = 0; j < 2; ++j) naive -= v[i] * p.W(i, j) * h[j];
            CHECK(energy(binary_record({v0, v1}), vec({double(h0), double(h1)}), p, s) ==
                  doctest::Approx(naive).epsilon(1e-13));
          }
  }
}

TEST_CASE("energy of a replicated-softmax block scales the hidden bias by D") {
  const VisibleSchema s({{"t", UnitType::replicated_softmax(3)}});
  Rng rng = make_rng(12, "test");
  const ModelParams p = random_params(s, 2, 1.0, rng);
  MixedRecord r;
  r.values = {TokenValue{{0, 2, 2, 1}}};
  const Eigen::VectorXd h = vec({1, 1});
  const double counts[3] = {1, 1, 2};
  double naive = -4.0 * (p.b[0] + p.b[1]);
  for (int i = 0; i < 3; ++i) naive -= counts[i] * (p.a[i] + p.W(i, 0) + p.W(i, 1));
  CHECK(energy(r, h, p, s) == doctest::Approx(naive).epsilon(1e-13));
}

TEST_CASE("energy ignores token order") {
  const VisibleSchema s({{"c", UnitType::categorical(3)}, {"t", UnitType::replicated_softmax(4)}});
  Rng rng = make_rng(13, "test");
  const ModelParams p = random_params(s, 3, 1.0, rng);
  MixedRecord r;
  r.values = {CategoricalValue{1}, TokenValue{{3, 0, 1, 3, 2}}};
  const double e = energy(r, vec({1, 0, 1}), p, s);
  for (int i = 0; i < 10; ++i) {
    auto& tokens = std::get<TokenValue>(r.values[1]).tokens;
    std::shuffle(tokens.begin(), tokens.end(), rng);
    CHECK(energy(r, vec({1, 0, 1}), p, s) == e);
  }
}

TEST_CASE("Gaussian energy is invariant under standardisation") {
  Rng rng = make_rng(14, "test");
  for (int trial = 0; trial < 20; ++trial) {
    const double sigma = std::uniform_real_distribution<double>(0.3, 3.0)(rng);
    const VisibleSchema general({{"g", UnitType::gaussian(sigma)}, {"x", UnitType::binary()}});
    const VisibleSchema unit({{"g", UnitType::gaussian(1.0)}, {"x", UnitType::binary()}});
    ModelParams p = random_params(general, 2, 1.0, rng);
    ModelParams q = p;
    q.a[0] = p.a[0] / sigma;
    MixedRecord r, rn;
    const double v = std::normal_distribution<double>(0.0, 2.0)(rng);
    r.values = {GaussianValue{v}, BinaryValue{1}};
    rn.values = {GaussianValue{v / sigma}, BinaryValue{1}};
    const Eigen::VectorXd h = vec({1, 0});
    CHECK(energy(r, h, p, general) == doctest::Approx(energy(rn, h, q, unit)).epsilon(1e-12));
  }
}

TEST_CASE("energy rejects mismatched shapes and non-finite input") {
  const VisibleSchema s = binary_schema(2);
  const ModelParams p = ModelParams::zeros(s, 2);
  CHECK_THROWS_AS(energy(binary_record({0, 1}), vec({0}), p, s), SchemaError);
  CHECK_THROWS_AS(energy(binary_record({0, 1}), vec({0, 1}), ModelParams::zeros(binary_schema(3), 2), s),
                  SchemaError);
  const VisibleSchema g({{"g", UnitType::gaussian(1.0)}});
  MixedRecord r;
  r.values = {GaussianValue{std::nan("")}};
  CHECK_THROWS_AS(energy(r, vec({0}), ModelParams::zeros(g, 1), g), ValidationError);
}

TEST_CASE("hidden conditional closed forms") {
  const VisibleSchema s = binary_schema(1);
  ModelParams p = ModelParams::zeros(s, 3);
  const Eigen::VectorXd zero = hidden_conditional(binary_record({1}), p, s);
  for (int j = 0; j < 3; ++j) CHECK(zero[j] == 0.5);

  ModelParams q = ModelParams::zeros(s, 1);
  q.W(0, 0) = std::log(3.0);
  CHECK(hidden_conditional(binary_record({1}), q, s)[0] == doctest::Approx(0.75).epsilon(1e-15));

  const VisibleSchema rs({{"t", UnitType::replicated_softmax(4)}});
  ModelParams r = ModelParams::zeros(rs, 1);
  r.b[0] = std::log(3.0) / 2.0;
  MixedRecord rec;
  rec.values = {TokenValue{{1, 3}}};
  CHECK(hidden_conditional(rec, r, rs)[0] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("hidden conditional uses v/sigma for Gaussian units") {
  const VisibleSchema s({{"g", UnitType::gaussian(2.0)}});
  ModelParams p = ModelParams::zeros(s, 1);
  p.W(0, 0) = 0.7;
  p.b[0] = -0.1;
  MixedRecord r;
  r.values = {GaussianValue{3.0}};
  CHECK(hidden_conditional(r, p, s)[0] == doctest::Approx(logistic(-0.1 + 0.7 * 1.5)).epsilon(1e-15));
}

TEST_CASE("visible conditional closed forms") {
  const VisibleSchema s({{"c", UnitType::categorical(4)},
                         {"n", UnitType::constrained_poisson(5)},
                         {"t", UnitType::replicated_softmax(3)}});
  ModelParams p = ModelParams::zeros(s, 2);
  p.a[s.offset(2)] = std::log(2.0);
  const auto d = visible_conditional(vec({1, 0}), p, s, {0.0, 10.0, 4.0});
  for (int m = 0; m < 4; ++m) CHECK(d.units[0].params[m] == doctest::Approx(0.25).epsilon(1e-15));
  for (int m = 0; m < 5; ++m) CHECK(d.units[1].params[m] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d.units[2].params[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.units[2].params[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(d.units[2].params[2] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("Gaussian visible conditional mean is a + sigma W h") {
  const VisibleSchema s({{"g", UnitType::gaussian(1.5)}});
  ModelParams p = ModelParams::zeros(s, 2);
  p.a[0] = 0.3;
  p.W(0, 0) = 0.4;
  p.W(0, 1) = -1.0;
  const auto d = visible_conditional(vec({1, 1}), p, s, {0.0});
  CHECK(d.units[0].params[0] == doctest::Approx(0.3 + 1.5 * (0.4 - 1.0)).epsilon(1e-15));
  CHECK(d.units[0].sigma == 1.5);
}

TEST_CASE("softmax conditionals are normalised for random parameters") {
  const VisibleSchema s({{"c", UnitType::categorical(7)},
                         {"n", UnitType::constrained_poisson(6)},
                         {"t", UnitType::replicated_softmax(9)}});
  Rng rng = make_rng(15, "test");
  for (int trial = 0; trial < 200; ++trial) {
    const ModelParams p = random_params(s, 4, 3.0, rng);
    Eigen::VectorXd h(4);
    for (int j = 0; j < 4; ++j) h[j] = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto d = visible_conditional(h, p, s, {0.0, 13.0, 5.0});
    CHECK(std::abs(d.units[0].params.sum() - 1.0) <= 1e-12);
    CHECK(std::abs(d.units[1].params.sum() - 13.0) <= 1e-9);
    CHECK(std::abs(d.units[2].params.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("hidden sampling") {
  Rng rng = make_rng(16, "test");
  const Eigen::VectorXd ones = sample_hidden(vec({1.0, 0.0}), rng);
  CHECK(ones[0] == 1.0);
  CHECK(ones[1] == 0.0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd h = sample_hidden(vec({1.0, 0.0}), rng);
    REQUIRE(h[0] == 1.0);
    REQUIRE(h[1] == 0.0);
  }
  Rng fixed = make_rng(17, "test");
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_hidden(vec({0.5}), fixed)[0];
  CHECK(std::abs(sum / n - 0.5) <= 0.01);
}

TEST_CASE("visible sampling keeps lengths and is seeded") {
  const VisibleSchema s({{"c", UnitType::categorical(3)},
                         {"n", UnitType::constrained_poisson(4)},
                         {"t", UnitType::replicated_softmax(5)},
                         {"g", UnitType::gaussian(1.0)}});
  Rng prng = make_rng(18, "test");
  const ModelParams p = random_params(s, 3, 1.0, prng);
  const auto d = visible_conditional(vec({1, 0, 1}), p, s, {0.0, 8.0, 6.0, 0.0});
  Rng a = make_rng(5, "x"), b = make_rng(5, "x");
  const VisibleState va = sample_visible(d, s, a);
  const VisibleState vb = sample_visible(d, s, b);
  CHECK(va.values == vb.values);
  CHECK(va.values.segment(s.offset(0), 3).sum() == 1.0);
  CHECK(va.values.segment(s.offset(2), 5).sum() == 6.0);
  // Mean rates by default for constrained-Poisson blocks, the mean for Gaussians.
  CHECK((va.values.segment(s.offset(1), 4) - d.units[1].params).norm() == 0.0);
  CHECK(va.values[s.offset(3)] == d.units[3].params[0]);
  CHECK(va.bias_scale == 6.0);
}

TEST_CASE("replicated-softmax token frequencies follow the softmax") {
  const VisibleSchema s({{"t", UnitType::replicated_softmax(3)}});
  ModelParams p = ModelParams::zeros(s, 1);
  p.a[0] = std::log(2.0);
  const auto d = visible_conditional(vec({0}), p, s, {10.0});
  Rng rng = make_rng(19, "test");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 10000; ++i) total += sample_visible(d, s, rng).values;
  total /= total.sum();
  CHECK(total[0] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(total[1] == doctest::Approx(0.25).epsilon(0.02));
}
