// Measurement routines shared by the unit tests and the acceptance binary.
// Each returns the worst observed error so callers pick the pass threshold.
#ifndef LFSAL_TESTS_SUITES_HPP
#define LFSAL_TESTS_SUITES_HPP

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "lfsal/mac.hpp"
#include "lfsal/metrics.hpp"
#include "lfsal/network.hpp"
#include "lfsal/ops.hpp"
#include "oracles.hpp"

namespace suite {

using lfsal::ConvParams;
using lfsal::Index;
using lfsal::RngStream;
using lfsal::Stream;
using lfsal::Tensor;

inline Index pick(RngStream& rng, Index lo, Index hi) { return lo + static_cast<Index>(rng.below(hi - lo + 1)); }

struct ConvCase {
  Index cin, cout, h, w, k;
  ConvParams p;
};

inline ConvCase random_conv_case(RngStream& rng) {
  for (;;) {
    ConvCase c{pick(rng, 1, 3), pick(rng, 1, 3), pick(rng, 3, 10), pick(rng, 3, 10), pick(rng, 1, 3),
               ConvParams{pick(rng, 1, 3), pick(rng, 1, 2), pick(rng, -1, 2)}};
    const Index span = c.p.dilation * (c.k - 1) + 1;
    if (c.h + 2 * c.p.pad >= span && c.w + 2 * c.p.pad >= span) return c;
  }
}

/// Max |conv2d - loop oracle| over `n` random configurations.
inline double conv_oracle_error(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    const ConvCase c = random_conv_case(rng);
    const auto x = oracle::random_tensor({c.cin, c.h, c.w}, rng);
    const auto w = oracle::random_tensor({c.cout, c.cin, c.k, c.k}, rng);
    const auto b = oracle::random_tensor({c.cout}, rng);
    const auto got = lfsal::conv2d(x, w, b, c.p);
    const auto want = oracle::conv2d(x, w, b, c.p.stride, c.p.dilation, c.p.pad);
    if (got.shape() != want.shape()) return 1e300;
    worst = std::max(worst, (got.values() - want.values()).cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---- finite-difference checks, one routine per op -------------------------

inline double conv_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    const ConvCase c = random_conv_case(rng);
    auto x = oracle::random_tensor({c.cin, c.h, c.w}, rng);
    auto w = oracle::random_tensor({c.cout, c.cin, c.k, c.k}, rng);
    auto b = oracle::random_tensor({c.cout}, rng);
    const auto r = oracle::random_tensor(lfsal::conv2d(x, w, b, c.p).shape(), rng);
    auto loss = [&] { return oracle::dot(r, lfsal::conv2d(x, w, b, c.p)); };
    const auto g = lfsal::conv2d_backward(x, w, r, c.p);
    worst = std::max({worst, oracle::gradient_error(x, g.input, loss), oracle::gradient_error(w, g.weights, loss),
                      oracle::gradient_error(b, g.bias, loss)});
  }
  return worst;
}

inline double relu_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    auto x = oracle::random_tensor({pick(rng, 1, 3), pick(rng, 2, 6), pick(rng, 2, 6)}, rng);
    for (Index j = 0; j < x.size(); ++j) x[j] += x[j] >= 0 ? 0.1 : -0.1;  // away from the kink
    const auto r = oracle::random_tensor(x.shape(), rng);
    auto loss = [&] { return oracle::dot(r, lfsal::relu(x)); };
    worst = std::max(worst, oracle::gradient_error(x, lfsal::relu_backward(x, r), loss));
  }
  return worst;
}

inline double pool_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    const Index c = pick(rng, 1, 2), h = pick(rng, 3, 8), w = pick(rng, 3, 8);
    // Distinct values 0.01 apart keep each window's max unique under +-h.
    RngStream shuffle = rng.fork(static_cast<std::uint64_t>(i));
    const auto perm = lfsal::shuffled_indices(static_cast<std::size_t>(c * h * w), shuffle);
    Tensor<double> x({c, h, w});
    for (Index j = 0; j < x.size(); ++j) x[j] = 0.01 * static_cast<double>(perm[static_cast<std::size_t>(j)]);
    const lfsal::PoolParams p{3, pick(rng, 1, 2), 1, true};
    const auto y = lfsal::max_pool(x, p);
    const auto r = oracle::random_tensor(y.output.shape(), rng);
    auto loss = [&] { return oracle::dot(r, lfsal::max_pool(x, p).output); };
    worst = std::max(worst,
                     oracle::gradient_error(x, lfsal::max_pool_backward(r, y.argmax, x.shape()), loss, 1e-4));
  }
  return worst;
}

inline double dropout_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    auto x = oracle::random_tensor({pick(rng, 1, 3), pick(rng, 2, 5), pick(rng, 2, 5)}, rng);
    const auto r = oracle::random_tensor(x.shape(), rng);
    RngStream m(seed, Stream::dropout, static_cast<std::uint64_t>(i));
    const auto mask = lfsal::dropout(x, 0.3, lfsal::Mode::train, m).mask;
    auto loss = [&] {
      Tensor<double> out(x.shape());
      out.values() = x.values().cwiseProduct(mask.values());
      return oracle::dot(r, out);
    };
    worst = std::max(worst, oracle::gradient_error(x, lfsal::dropout_backward(r, mask), loss));
  }
  return worst;
}

inline double bilinear_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    const Index h = pick(rng, 1, 4), w = pick(rng, 1, 4);
    const Index oh = h + pick(rng, 0, 8), ow = w + pick(rng, 0, 8);
    auto x = oracle::random_tensor({2, h, w}, rng);
    const auto r = oracle::random_tensor({2, oh, ow}, rng);
    auto loss = [&] { return oracle::dot(r, lfsal::bilinear_upsample(x, oh, ow)); };
    worst = std::max(worst, oracle::gradient_error(x, lfsal::bilinear_upsample_backward(r, h, w), loss));
  }
  return worst;
}

inline double softmax_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    const Index h = pick(rng, 1, 4), w = pick(rng, 1, 4);
    auto z = oracle::random_tensor({2, h, w}, rng, -3, 3);
    Tensor<double> lab({h, w});
    for (Index j = 0; j < lab.size(); ++j) lab[j] = static_cast<double>(rng.below(2));
    auto loss = [&] { return lfsal::softmax_loss(z, lab).loss; };
    worst = std::max(worst, oracle::gradient_error(z, lfsal::softmax_loss(z, lab).grad, loss));
  }
  return worst;
}

inline double mac9x9_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  const Index grids[] = {1, 3, 5, 9};
  for (int i = 0; i < n; ++i) {
    const Index a = grids[rng.below(4)], c = pick(rng, 1, 3), co = pick(rng, 1, 3);
    auto x = oracle::random_tensor({c, a * pick(rng, 1, 3), a * pick(rng, 1, 3)}, rng);
    auto w = oracle::random_tensor({co, c, a, a}, rng);
    auto b = oracle::random_tensor({co}, rng);
    const auto r = oracle::random_tensor(lfsal::mac_forward_9x9(x, w, b).shape(), rng);
    auto loss = [&] { return oracle::dot(r, lfsal::mac_forward_9x9(x, w, b)); };
    const auto g = lfsal::mac_backward_9x9(x, w, r);
    worst = std::max({worst, oracle::gradient_error(x, g.input, loss), oracle::gradient_error(w, g.weights, loss),
                      oracle::gradient_error(b, g.bias, loss)});
  }
  return worst;
}

inline double mac3x3_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    const Index s = pick(rng, 2, 3), a = s * s, c = pick(rng, 1, 3), hid = pick(rng, 1, 3), co = pick(rng, 1, 3);
    auto x = oracle::random_tensor({c, a * pick(rng, 1, 2), a * pick(rng, 1, 3)}, rng);
    auto w1 = oracle::random_tensor({hid, c, s, s}, rng);
    auto b1 = oracle::random_tensor({hid}, rng);
    auto w2 = oracle::random_tensor({co, hid, s, s}, rng);
    auto b2 = oracle::random_tensor({co}, rng);
    lfsal::Mac3x3Trace<double> trace;
    const auto y = lfsal::mac_forward_3x3(x, a, w1, b1, w2, b2, &trace);
    const auto r = oracle::random_tensor(y.shape(), rng);
    auto loss = [&] { return oracle::dot(r, lfsal::mac_forward_3x3(x, a, w1, b1, w2, b2)); };
    auto signs = [&] {
      lfsal::Mac3x3Trace<double> t;
      lfsal::mac_forward_3x3(x, a, w1, b1, w2, b2, &t);
      std::vector<bool> out(static_cast<std::size_t>(t.hidden.size()));
      for (Index j = 0; j < t.hidden.size(); ++j) out[static_cast<std::size_t>(j)] = t.hidden[j] > 0;
      return out;
    };
    // Skip coordinates whose +-h probes land on different linear pieces.
    auto kink = [&](Tensor<double>& t) {
      return [&t, &signs](Index j) {
        const double v = t[j];
        t[j] = v + 1e-3;
        const auto hi = signs();
        t[j] = v - 1e-3;
        const auto lo = signs();
        t[j] = v;
        return hi != lo;
      };
    };
    const auto g = lfsal::mac_backward_3x3(trace, a, w1, w2, r);
    worst = std::max({worst, oracle::gradient_error(x, g.input, loss, 1e-3, kink(x)),
                      oracle::gradient_error(w1, g.w1, loss, 1e-3, kink(w1)),
                      oracle::gradient_error(b1, g.b1, loss, 1e-3, kink(b1)),
                      oracle::gradient_error(w2, g.w2, loss), oracle::gradient_error(b2, g.b2, loss)});
  }
  return worst;
}

struct StarParams {
  lfsal::StarGeometry geometry;
  std::vector<Tensor<double>> w, b;
  Tensor<double> fuse_w, fuse_b;

  lfsal::StarWeights<double> view() const {
    lfsal::StarWeights<double> v;
    for (std::size_t i = 0; i < w.size(); ++i) {
      v.branch_w.push_back(&w[i]);
      v.branch_b.push_back(&b[i]);
    }
    v.fuse_w = &fuse_w;
    v.fuse_b = &fuse_b;
    return v;
  }
};

inline StarParams random_star(Index a, std::vector<Index> rates, Index c, Index branch, Index co, RngStream& rng) {
  StarParams p;
  p.geometry = {a, std::move(rates)};
  for (std::size_t i = 0; i < p.geometry.branch_count(); ++i) {
    const Index k = p.geometry.branch_kernel(i);
    p.w.push_back(oracle::random_tensor({branch, c, k, k}, rng));
    p.b.push_back(oracle::random_tensor({branch}, rng));
  }
  p.fuse_w = oracle::random_tensor({co, branch * static_cast<Index>(p.geometry.branch_count()), 1, 1}, rng);
  p.fuse_b = oracle::random_tensor({co}, rng);
  return p;
}

inline double star_gradient(int n, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    const Index a = 3 + 2 * pick(rng, 0, 3);
    std::vector<Index> rates;
    for (Index r = 1; r <= (a - 1) / 2; ++r)
      if (r == 1 || rng.below(2)) rates.push_back(r);
    StarParams p = random_star(a, rates, pick(rng, 1, 2), pick(rng, 1, 2), pick(rng, 1, 2), rng);
    auto x = oracle::random_tensor({p.w[0].dim(1), a * pick(rng, 1, 2), a * pick(rng, 1, 2)}, rng);
    lfsal::StarTrace<double> trace;
    const auto y = lfsal::mac_forward_star(x, p.view(), p.geometry, &trace);
    const auto r = oracle::random_tensor(y.shape(), rng);
    auto loss = [&] { return oracle::dot(r, lfsal::mac_forward_star(x, p.view(), p.geometry)); };
    const auto g = lfsal::mac_backward_star(trace, p.view(), p.geometry, r);
    worst = std::max({worst, oracle::gradient_error(x, g.input, loss), oracle::gradient_error(p.fuse_w, g.fuse_w, loss),
                      oracle::gradient_error(p.fuse_b, g.fuse_b, loss)});
    for (std::size_t k = 0; k < p.w.size(); ++k) {
      worst = std::max({worst, oracle::gradient_error(p.w[k], g.branch_w[k], loss),
                        oracle::gradient_error(p.b[k], g.branch_b[k], loss)});
    }
  }
  return worst;
}

/// Tiny network for end-to-end gradient checks.
inline lfsal::NetConfig micro_net(lfsal::MacVariant variant) {
  const Index a = variant == lfsal::MacVariant::mac3x3 ? 4 : 3;
  lfsal::NetConfig cfg = lfsal::NetConfig::desk(a, variant);
  cfg.backbone.channels = {3, 3, 4, 4, 4};
  cfg.mac.out_channels = 3;
  cfg.mac.branch_channels = 2;
  cfg.aspp.branch_channels = 4;
  cfg.aspp.rates = {1, 2};
  return cfg;
}

/// Whole-network check: d(loss)/d(theta) from backward() against central
/// differences on `per_tensor` random coordinates of every parameter and of
/// the input. Coordinates whose +-h probes change the activation pattern
/// (ReLU signs, pool argmax) are skipped; returns {worst error, coordinates
/// checked}.
inline std::pair<double, int> network_gradient(lfsal::MacVariant variant, std::uint64_t seed, int per_tensor,
                                               Index ny = 16, Index nx = 16) {
  const lfsal::NetConfig cfg = micro_net(variant);
  lfsal::SaliencyNet<double> net(cfg, seed);
  RngStream rng(seed, Stream::crop);
  const Index a = cfg.mac.angular_res;
  Tensor<double> x = oracle::random_tensor({3, ny * a, nx * a}, rng, -0.5, 0.5);
  Tensor<double> labels({ny, nx});
  for (Index i = 0; i < labels.size(); ++i) labels[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;

  auto run = [&](lfsal::NetTrace<double>* trace) {
    return lfsal::softmax_loss(net.forward(x, lfsal::Mode::eval, nullptr, trace), labels).loss;
  };
  lfsal::NetTrace<double> trace;
  const auto logits = net.forward(x, lfsal::Mode::eval, nullptr, &trace);
  net.zero_grad();
  const Tensor<double> gx = net.backward(trace, lfsal::softmax_loss(logits, labels).grad);

  double worst = 0;
  int checked = 0;
  const double h = 1e-3;
  auto probe = [&](double& v, double analytic) {
    const double orig = v;
    lfsal::NetTrace<double> tp, tm;
    v = orig + h;
    const double lp = run(&tp);
    v = orig - h;
    const double lm = run(&tm);
    v = orig;
    if (lfsal::activation_pattern(tp) != lfsal::activation_pattern(tm)) return;
    const double num = (lp - lm) / (2 * h);
    worst = std::max(worst, std::abs(analytic - num) / std::max({std::abs(analytic), std::abs(num), 1e-6}));
    ++checked;
  };
  for (auto& p : net.parameters()) {
    const Tensor<double> grad = p.grad;
    for (int k = 0; k < per_tensor; ++k) {
      const auto i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(p.value.size())));
      probe(p.value[i], grad[i]);
    }
  }
  for (int k = 0; k < per_tensor; ++k) {
    const auto i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(x.size())));
    probe(x[i], gx[i]);
  }
  return {worst, checked};
}

// ---- view selection -------------------------------------------------------

/// Max |MAC-9x9 with a delta kernel at (u, v) - sub-aperture view (u, v)| over
/// every view of an A x A grid.
inline double view_selection_error(Index a, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  const auto lf = fixture::random_lightfield<double>(a, 4, 5, 3, rng);
  const auto arr = lfsal::assemble_microlens_array(lf).pixels.to_chw();
  double worst = 0;
  for (Index v = 0; v < a; ++v)
    for (Index u = 0; u < a; ++u) {
      Tensor<double> w({3, 3, a, a}), b({3});
      for (Index c = 0; c < 3; ++c) w(c, c, v, u) = 1.0;
      const auto got = lfsal::mac_forward_9x9(arr, w, b);
      const auto want = lfsal::extract_subaperture(lf, u, v).image.to_chw();
      if (got.shape() != want.shape()) return 1e300;
      worst = std::max(worst, (got.values() - want.values()).cwiseAbs().maxCoeff());
    }
  return worst;
}

/// Pixels of one micro-lens image, as (du, dv) offsets from its centre, that
/// receive gradient from one star-block output pixel.
inline std::set<std::pair<Index, Index>> star_gradient_support(Index a, const std::vector<Index>& rates,
                                                                std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  StarParams p = random_star(a, rates, 2, 3, 1, rng);
  const auto x = oracle::random_tensor({2, 3 * a, 3 * a}, rng);
  lfsal::StarTrace<double> trace;
  const auto y = lfsal::mac_forward_star(x, p.view(), p.geometry, &trace);
  Tensor<double> g(y.shape());
  g(0, 1, 1) = 1.0;
  const auto gi = lfsal::mac_backward_star(trace, p.view(), p.geometry, g).input;
  std::set<std::pair<Index, Index>> support;
  const Index c = (a - 1) / 2;
  for (Index ch = 0; ch < gi.dim(0); ++ch)
    for (Index yy = 0; yy < gi.dim(1); ++yy)
      for (Index xx = 0; xx < gi.dim(2); ++xx)
        if (gi(ch, yy, xx) != 0.0) support.insert({xx - (a + c), yy - (a + c)});
  return support;
}

/// The star set straight from its definition: the centre plus the 8
/// neighbours at every rate.
inline std::set<std::pair<Index, Index>> star_set(const std::vector<Index>& rates) {
  std::set<std::pair<Index, Index>> s{{0, 0}};
  for (Index r : rates)
    for (Index dv : {-r, Index{0}, r})
      for (Index du : {-r, Index{0}, r}) s.insert({du, dv});
  return s;
}

// ---- metric oracles ---------------------------------------------------------

struct MetricErrors {
  double pr = 0;     // per-image and dataset curves
  double f = 0;      // adaptive F
  double mae = 0;
  double ap = 0;
  double wf = 0;
};

inline MetricErrors metric_oracle_errors(int n, Index size, std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  MetricErrors e;
  std::vector<lfsal::SaliencyMap> preds, gts;
  for (int i = 0; i < n; ++i) {
    lfsal::SaliencyMap p, g;
    oracle::random_pair(rng, size, p, g);
    preds.push_back(p);
    gts.push_back(g);
    oracle::PR want;
    oracle::pr_counts(p, g, want);
    const auto got = lfsal::pr_curve(p, g);
    if (!got) return {1e300, 1e300, 1e300, 1e300, 1e300};
    for (int t = 0; t < lfsal::kThresholds; ++t) {
      e.pr = std::max({e.pr, std::abs(got->precision[static_cast<std::size_t>(t)] - want.p[static_cast<std::size_t>(t)]),
                       std::abs(got->recall[static_cast<std::size_t>(t)] - want.r[static_cast<std::size_t>(t)])});
    }
    e.f = std::max(e.f, std::abs(*lfsal::adaptive_f_measure(p, g) - oracle::adaptive_f(p, g)));
    e.mae = std::max(e.mae, std::abs(lfsal::mae(p, g) - oracle::mae(p, g)));
    e.wf = std::max(e.wf, std::abs(*lfsal::weighted_f_measure(p, g) - oracle::weighted_f(p, g)));
  }
  const auto curve = lfsal::pr_curve(preds, gts);
  const auto want = oracle::dataset_pr(preds, gts);
  for (int t = 0; t < lfsal::kThresholds; ++t) {
    const auto k = static_cast<std::size_t>(t);
    e.pr = std::max({e.pr, std::abs(curve.precision[k] - want.p[k]), std::abs(curve.recall[k] - want.r[k])});
  }
  e.ap = std::abs(lfsal::average_precision(curve) - oracle::ap11(want));
  return e;
}

}  // namespace suite

#endif  // LFSAL_TESTS_SUITES_HPP
