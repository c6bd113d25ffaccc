#include "doctest.h"

#include <limits>

#include "hycon/core.hpp"

using namespace hycon;

TEST_SUITE("core") {

TEST_CASE("sentiment labels accept the closed range and reject the rest") {
  CHECK(SentimentLabel(-3.0).score == -3.0);
  CHECK(SentimentLabel(3.0).score == 3.0);
  CHECK(SentimentLabel(0.0).score == 0.0);
  CHECK_THROWS_AS(SentimentLabel(3.0001), ConfigError);
  CHECK_THROWS_AS(SentimentLabel(-3.0001), ConfigError);
  CHECK_THROWS_AS(SentimentLabel(std::numeric_limits<double>::quiet_NaN()),
                  ConfigError);
  CHECK_THROWS_AS(SentimentLabel(std::numeric_limits<double>::infinity()),
                  ConfigError);
}

TEST_CASE("binarize is the sign rule with zero counted negative") {
  CHECK(binarize(SentimentLabel(0.001)) == BinaryClass::positive);
  CHECK(binarize(SentimentLabel(3.0)) == BinaryClass::positive);
  CHECK(binarize(SentimentLabel(0.0)) == BinaryClass::negative);
  CHECK(binarize(SentimentLabel(-0.001)) == BinaryClass::negative);
}

TEST_CASE("modalities have the fixed order and round-trip by name") {
  CHECK(index_of(Modality::language) == 0);
  CHECK(index_of(Modality::audio) == 1);
  CHECK(index_of(Modality::visual) == 2);
  for (Modality m : kModalities)
    CHECK(modality_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(modality_from_string("text"), ConfigError);
}

TEST_CASE("default hyperparameters match the documented values") {
  const HyperParams h = default_hyperparams();
  CHECK(h.alpha == 0.8);
  CHECK(h.lambda1 == 1.0);
  CHECK(h.lambda2 == 1.0);
  CHECK(h.lambda3 == 1.0);
  CHECK(h.d == 50);
  CHECK(h.batch_size == 32);
  CHECK(h.learning_rate == 1e-5);
  CHECK(h.violations().empty());
}

TEST_CASE("hyperparameter validation reports every violation at once") {
  HyperParams h;
  h.alpha = 1.5;
  h.lambda2 = -1.0;
  h.d = 0;
  h.batch_size = 1;
  h.learning_rate = 0.0;
  const auto v = h.violations();
  CHECK(v.size() == 5);
  CHECK_THROWS_AS(h.validate(), ConfigError);
  try {
    h.validate();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("lambda") != std::string::npos);
    CHECK(msg.find("batch_size") != std::string::npos);
    CHECK(msg.find("learning_rate") != std::string::npos);
  }
}

TEST_CASE("mini-batch construction validates shape and finiteness") {
  std::array<Matrix, 3> f = {Matrix(2, 4, 0.5), Matrix(2, 3, 0.5),
                             Matrix(2, 5, 0.5)};
  std::vector<SentimentLabel> labels = {SentimentLabel(1.2),
                                        SentimentLabel(-0.4)};

  MiniBatch b = MiniBatch::make(f, labels);
  CHECK(b.size() == 2);
  CHECK(b.classes[0] == BinaryClass::positive);
  CHECK(b.classes[1] == BinaryClass::negative);
  const auto s = scores(b);
  CHECK(s[0] == 1.2);
  CHECK(s[1] == -0.4);

  std::array<Matrix, 3> wrong_rows = f;
  wrong_rows[1] = Matrix(3, 3, 0.5);
  CHECK_THROWS_AS(MiniBatch::make(wrong_rows, labels), ConfigError);

  std::array<Matrix, 3> bad = f;
  bad[2](1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(MiniBatch::make(bad, labels), NumericalError);

  CHECK_THROWS_AS(MiniBatch::make(f, {}), ConfigError);
}

TEST_CASE("normalization invariant accepts unit and zero rows only") {
  EmbeddingMatrix e;
  e.values = Matrix(3, 2, 0.0);
  e.values(0, 0) = 1.0;           // unit row
  e.values(1, 0) = 0.6;           // unit row
  e.values(1, 1) = 0.8;
  CHECK(holds_normalization_invariant(e));  // third row is all zero
  e.values(2, 0) = 0.5;                     // norm 0.5: violates
  CHECK_FALSE(holds_normalization_invariant(e));
}

}  // TEST_SUITE
