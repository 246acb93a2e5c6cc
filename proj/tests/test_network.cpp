#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lfsal/network.hpp"
#include "lfsal/optim.hpp"
#include "lfsal/synthetic.hpp"
#include "suites.hpp"

using namespace lfsal;

namespace {

Sample<double> scene(Index a, Index ny, Index nx, std::uint64_t id) {
  RngStream rng(1, Stream::weights, 100 + id);
  Image<double> mask;
  auto lf = rect_scene<double>(ny, nx, a, 1, rng, &mask);
  return to_sample(lf, mask);
}

Index backbone_extent(Index n, const BackboneConfig& bb) {
  for (Index s : bb.pool_strides) n = pool_extent(n, PoolParams{3, s, 1, false});
  return n;
}

}  // namespace

TEST_CASE("profiles") {
  const NetConfig paper = NetConfig::paper();
  CHECK_NOTHROW(paper.validate());
  CHECK(paper.backbone.channels == std::vector<Index>{64, 128, 256, 512, 512});
  CHECK(paper.aspp.rates == std::vector<Index>{6, 12, 18, 24});
  CHECK(paper.aspp.branch_channels == 1024);
  CHECK(paper.mac.out_channels == 64);
  CHECK(paper.output_stride() == 8);

  const NetConfig desk = NetConfig::desk(3);
  CHECK(desk.backbone.channels == std::vector<Index>{8, 16, 32, 64, 64});
  CHECK(desk.aspp.rates == std::vector<Index>{1, 2, 3, 4});
  CHECK(desk.mac.angular_res == 3);
  CHECK(desk.output_stride() == 8);
  CHECK(NetConfig::desk(9, MacVariant::star).mac.star_rates == std::vector<Index>{1, 2, 3, 4});
  CHECK(NetConfig::desk(5, MacVariant::star).mac.star_rates == std::vector<Index>{1, 2});
  CHECK_NOTHROW(NetConfig::desk(9, MacVariant::mac3x3).validate());
  CHECK_THROWS_AS(NetConfig::desk(5, MacVariant::mac3x3).validate(), ConfigError);
  CHECK_THROWS_AS(NetConfig::desk(4, MacVariant::star).validate(), ConfigError);

  NetConfig bad = desk;
  bad.mac.out_channels = 7;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = desk;
  bad.backbone.pool_strides = {2, 2, 1, 1, 1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = desk;
  bad.backbone.dropout = {0.1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const NetConfig base = baseline_2d(desk);
  CHECK(base.front_end == FrontEnd::central_view);
}

TEST_CASE("backbone resolution ledger") {
  const BackboneConfig bb;
  CHECK(pool_extent(135, PoolParams{3, 2, 1, true}) == 68);
  CHECK(backbone_extent(540, bb) == 68);
  CHECK(backbone_extent(375, bb) == 47);
  CHECK(backbone_extent(48, bb) == 6);
  CHECK(backbone_extent(32, bb) == 4);
}

TEST_CASE("forward shapes and the 2D baseline input") {
  const auto s = scene(3, 32, 48, 0);
  for (MacVariant v : {MacVariant::mac9x9, MacVariant::star}) {
    const SaliencyNet<double> net(NetConfig::desk(3, v), 1);
    NetTrace<double> trace;
    const auto logits = net.forward(net.prepare_input(s.array), Mode::eval, nullptr, &trace);
    CHECK(logits.shape() == Shape{2, 32, 48});
    CHECK(trace.features.shape() == Shape{8, 32, 48});
    CHECK(trace.score_shape == Shape{2, 4, 6});
  }
  const SaliencyNet<double> base(baseline_2d(NetConfig::desk(3)), 1);
  const auto x = base.prepare_input(s.array);
  CHECK(x.shape() == Shape{3, 32, 48});
  CHECK(x.values() == central_view(s.array).to_chw().values());
  CHECK(base.predict(s.array).shape() == Shape{32, 48});

  // mac3x3 at A = 9
  const auto s9 = scene(9, 8, 16, 1);
  const SaliencyNet<double> net9(NetConfig::desk(9, MacVariant::mac3x3), 2);
  CHECK(net9.predict(s9.array).shape() == Shape{8, 16});

  // paper spatial size with a one-view grid through the desk widths
  NetConfig wide = NetConfig::desk(1);
  SaliencyNet<float> big(wide, 3);
  NetTrace<float> trace;
  const Tensor<float> input({3, 375, 540}, 0.25f);
  const auto out = big.forward(input, Mode::eval, nullptr, &trace);
  CHECK(trace.score_shape == Shape{2, 47, 68});
  CHECK(out.shape() == Shape{2, 375, 540});

  const SaliencyNet<double> net(NetConfig::desk(3), 1);
  MicroLensArray<double> wrong_a{s.array.pixels, 1};
  CHECK_THROWS_AS(net.predict(wrong_a), ConfigError);
  MicroLensArray<double> ragged{Image<double>(31, 48, 3), 3};
  CHECK_THROWS_AS(net.predict(ragged), DataError);
}

TEST_CASE("initial loss is near ln 2 and zero scores give one half") {
  for (MacVariant v : {MacVariant::mac9x9, MacVariant::mac3x3, MacVariant::star}) {
    const Index a = v == MacVariant::mac3x3 ? 9 : 3;
    const auto s = scene(a, 32, 48, 2);
    SaliencyNet<double> net(NetConfig::desk(a, v), 7);
    const auto logits = net.forward(net.prepare_input(s.array), Mode::eval);
    const double loss = softmax_loss(logits, labels_from_mask(s.mask)).loss;
    CHECK(std::abs(loss - std::log(2.0)) < 0.05);

    for (std::size_t i = 0; i < net.parameter_names().size(); ++i) {
      const std::string& name = net.parameter_names()[i];
      if (name.find(".score.") != std::string::npos) net.parameters()[i].value.set_zero();
    }
    CHECK(net.predict(s.array).values().isConstant(0.5));
  }
}

TEST_CASE("parameters, initialisation and learning-rate multipliers") {
  const SaliencyNet<double> net(NetConfig::desk(3), 4);
  CHECK(net.parameter("mac.conv.w").value.shape() == Shape{8, 3, 3, 3});
  CHECK(net.parameter("block5.conv3.w").value.shape() == Shape{64, 64, 3, 3});
  CHECK(net.parameter("aspp4.score.w").value.shape() == Shape{2, 64, 1, 1});
  CHECK(net.parameter("mac.conv.w").lr_multiplier == 10.0);
  CHECK(net.parameter("block1.conv1.w").lr_multiplier == 10.0);
  CHECK(net.parameter("block1.conv2.w").lr_multiplier == 1.0);
  CHECK(net.parameter("aspp1.conv1.w").lr_multiplier == 1.0);
  CHECK(net.parameter("aspp1.score.b").lr_multiplier == 10.0);
  CHECK(net.parameter("block2.conv1.b").value.values().isZero());
  CHECK_THROWS_AS(net.parameter("block6.conv1.w"), ConfigError);
  Index total = 0;
  for (const auto& p : net.parameters()) total += p.value.size();
  CHECK(net.parameter_count() == total);

  const auto& w = net.parameter("block3.conv2.w").value;
  const double bound = std::sqrt(3.0 / (32 * 9));
  CHECK(w.values().cwiseAbs().maxCoeff() <= bound);
  const double var = w.values().squaredNorm() / static_cast<double>(w.size());
  CHECK(var == doctest::Approx(1.0 / (32 * 9)).epsilon(0.1));

  const SaliencyNet<double> star(NetConfig::desk(9, MacVariant::star), 4);
  CHECK(star.parameter("mac.branch0.w").value.shape() == Shape{4, 3, 1, 1});
  CHECK(star.parameter("mac.branch4.w").value.shape() == Shape{4, 3, 3, 3});
  CHECK(star.parameter("mac.fuse.w").value.shape() == Shape{8, 20, 1, 1});
  const SaliencyNet<double> base(baseline_2d(NetConfig::desk(3)), 4);
  CHECK(base.parameter("front.conv.w").value.shape() == Shape{8, 3, 3, 3});
  CHECK(base.parameter("front.conv.w").lr_multiplier == 10.0);
}

TEST_CASE("whole-network gradients pass central differences") {
  for (MacVariant v : {MacVariant::mac9x9, MacVariant::mac3x3, MacVariant::star}) {
    const auto [worst, checked] = suite::network_gradient(v, 11, 6);
    CAPTURE(to_string(v));
    CHECK(checked > 100);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("training is seeded and deterministic") {
  const auto s = scene(3, 32, 48, 3);
  NetConfig cfg = NetConfig::desk(3);
  cfg.backbone.dropout = {0.1, 0.1, 0.2, 0.2, 0.3, 0.5};  // exercise the dropout stream too
  TrainSchedule sched;
  sched.base_lr = 0.01;
  sched.max_iter = 100;
  auto run = [&](std::uint64_t seed) {
    SaliencyNet<double> net(cfg, seed);
    std::vector<double> losses;
    for (int it = 0; it < 5; ++it) losses.push_back(net.train_step(s.array, s.mask, sched, it, seed));
    return losses;
  };
  const auto a = run(5), b = run(5), c = run(6);
  CHECK(a == b);
  CHECK(a != c);
  SaliencyNet<double> x(cfg, 5), y(cfg, 5);
  CHECK(x.parameters()[3].value == y.parameters()[3].value);

  SaliencyNet<double> net(cfg, 5);
  Image<double> small(4, 4, 1);
  CHECK_THROWS_AS(net.train_step(s.array, small, sched, 0, 5), DataError);
}

TEST_CASE("repeated steps on one sample drive the loss down") {
  const auto s = scene(3, 32, 48, 0);
  NetConfig cfg = NetConfig::desk(3);
  double mean[3] = {0, 0, 0};
  const Index n = s.array.height() * s.array.width();
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) mean[c] += s.array.pixels.values()[i * 3 + c] / static_cast<double>(n);
  cfg.input_mean = {mean[0], mean[1], mean[2]};
  SaliencyNet<float> net(cfg, 1);
  const Sample<float> sf{{s.array.pixels.cast<float>(), 3}, s.mask.cast<float>()};
  TrainSchedule sched;
  sched.base_lr = 0.01;
  sched.max_iter = 200;
  float first = 0, last = 0;
  for (int it = 0; it < 200; ++it) {
    last = net.train_step(sf.array, sf.mask, sched, it, 1);
    if (it == 0) first = last;
  }
  CHECK(first == doctest::Approx(std::log(2.0)).epsilon(0.08));
  CHECK(last < 0.1f);
}

TEST_CASE("optimizer examples") {
  Parameter<double> p(Tensor<double>({3}, {1.0, 2.0, 3.0}));
  p.grad = Tensor<double>({3}, {0.5, -1.0, 0.0});
  std::vector<Parameter<double>> ps{p};
  sgd_step<double>(ps, SgdConfig{0.1, 0.0, 0.0});
  CHECK(ps[0].value[0] == doctest::Approx(0.95));
  CHECK(ps[0].value[1] == doctest::Approx(2.1));
  CHECK(ps[0].value[2] == 3.0);
  CHECK(ps[0].grad.values().isZero());
  sgd_step<double>(ps, SgdConfig{0.1, 0.0, 0.0});
  CHECK(ps[0].value[2] == 3.0);
  CHECK_THROWS_AS(sgd_step<double>(ps, SgdConfig{-1.0, 0.0, 0.0}), ConfigError);

  // momentum: v = 0.9 v - lr g
  std::vector<Parameter<double>> m{Parameter<double>(Tensor<double>({1}, {0.0}))};
  m[0].grad[0] = 1.0;
  sgd_step<double>(m, SgdConfig{0.1, 0.9, 0.0});
  m[0].grad[0] = 1.0;
  sgd_step<double>(m, SgdConfig{0.1, 0.9, 0.0});
  CHECK(m[0].value[0] == doctest::Approx(-0.1 - 0.19));

  CHECK(poly_lr(0.001, 0, 100, 0.9) == 0.001);
  CHECK(poly_lr(0.001, 100, 100, 0.9) == 0.0);
  CHECK(poly_lr(0.001, 50, 100, 0.9) == doctest::Approx(0.001 * std::pow(0.5, 0.9)));
  CHECK(poly_lr(0.001, 50, 100, 0.9) == doctest::Approx(0.000536).epsilon(1e-3));
  CHECK_THROWS_AS(poly_lr(0.001, 0, 0, 0.9), ConfigError);

  RngStream rng(1, Stream::weights);
  const auto w3 = xavier_init<double>({1, 3}, rng);
  CHECK(w3.values().cwiseAbs().maxCoeff() <= 1.0);
  const auto w = xavier_init<double>({4000, 3, 5, 5}, rng);
  CHECK(w.values().squaredNorm() / static_cast<double>(w.size()) == doctest::Approx(1.0 / 75).epsilon(0.1));
  CHECK_THROWS_AS(xavier_init<double>({}, rng), ConfigError);
}
