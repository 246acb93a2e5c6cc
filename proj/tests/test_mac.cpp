#include <doctest.h>

#include "lfsal/mac.hpp"
#include "suites.hpp"

using namespace lfsal;

TEST_CASE("MAC-9x9 delta kernels select sub-aperture views") {
  for (Index a : {1, 3, 5, 9}) {
    CHECK(suite::view_selection_error(a, static_cast<std::uint64_t>(a)) == 0.0);
  }
}

TEST_CASE("MAC-9x9 output depends on one micro-lens image") {
  RngStream rng(2, Stream::weights);
  auto x = oracle::random_tensor({2, 27, 18}, rng);
  const auto w = oracle::random_tensor({4, 2, 9, 9}, rng);
  const auto b = oracle::random_tensor({4}, rng);
  const auto y = mac_forward_9x9(x, w, b);
  CHECK(y.shape() == Shape{4, 3, 2});
  x(1, 13, 10) += 1.0;  // inside micro-lens (y=1, x=1)
  const auto y2 = mac_forward_9x9(x, w, b);
  for (Index c = 0; c < 4; ++c)
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 2; ++j) {
        if (i == 1 && j == 1) continue;
        CHECK(y2(c, i, j) == y(c, i, j));
      }
  CHECK(y2(0, 1, 1) != y(0, 1, 1));
  Tensor<double> off({2, 26, 18});
  CHECK_THROWS(mac_forward_9x9(off, w, b));
}

TEST_CASE("MAC-3x3 sees the whole micro-lens image") {
  RngStream rng(3, Stream::weights);
  const auto x = oracle::random_tensor({1, 18, 18}, rng);
  const auto w1 = oracle::random_tensor({2, 1, 3, 3}, rng, 0.1, 1.0);
  const Tensor<double> b1({2}, 5.0);  // keeps the hidden ReLU active
  const auto w2 = oracle::random_tensor({1, 2, 3, 3}, rng, 0.1, 1.0);
  const Tensor<double> b2({1});
  Mac3x3Trace<double> trace;
  const auto y = mac_forward_3x3(x, 9, w1, b1, w2, b2, &trace);
  CHECK(y.shape() == Shape{1, 2, 2});
  CHECK(trace.hidden.shape() == Shape{2, 6, 6});
  Tensor<double> g(y.shape());
  g(0, 0, 1) = 1.0;
  const auto gi = mac_backward_3x3(trace, 9, w1, w2, g).input;
  for (Index yy = 0; yy < 18; ++yy)
    for (Index xx = 0; xx < 18; ++xx) {
      const bool inside = yy < 9 && xx >= 9;
      CHECK((gi(0, yy, xx) != 0.0) == inside);
    }
  CHECK_THROWS_AS(mac_forward_3x3(x, 8, w1, b1, w2, b2), ConfigError);
}

TEST_CASE("star block gradient support is the star set") {
  const std::vector<Index> rates{1, 2, 3, 4};
  CHECK(suite::star_set(rates).size() == 33);
  const auto support = suite::star_gradient_support(9, rates, 4);
  CHECK(support.size() == 33);
  CHECK(support == suite::star_set(rates));
  const auto taps = star_taps(StarGeometry{9, rates});
  CHECK(std::set<std::pair<Index, Index>>(taps.begin(), taps.end()) == suite::star_set(rates));

  CHECK(suite::star_gradient_support(5, {1, 2}, 5) == suite::star_set({1, 2}));
  CHECK(suite::star_gradient_support(7, {2}, 6) == suite::star_set({2}));
  CHECK_THROWS_AS(StarGeometry({9, {5}}).validate(), ConfigError);
  CHECK_THROWS_AS(StarGeometry({4, {1}}).validate(), ConfigError);
}

TEST_CASE("MAC gradients pass central differences") {
  CHECK(suite::mac9x9_gradient(20, 21) < 1e-4);
  CHECK(suite::mac3x3_gradient(20, 22) < 1e-4);
  CHECK(suite::star_gradient(20, 23) < 1e-4);
}

TEST_CASE("variant names round trip") {
  for (MacVariant v : {MacVariant::mac9x9, MacVariant::mac3x3, MacVariant::star}) {
    CHECK(parse_mac_variant(to_string(v)) == v);
  }
  CHECK_THROWS_AS(parse_mac_variant("mac5x5"), ConfigError);
}
