#include "lfsal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace lfsal {
namespace {

using BoolMap = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

void require_same_dims(const SaliencyMap& pred, const SaliencyMap& gt, const char* what) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw DataError(std::string(what) + ": prediction " + std::to_string(pred.cols()) + "x" +
                    std::to_string(pred.rows()) + " vs ground truth " + std::to_string(gt.cols()) + "x" +
                    std::to_string(gt.rows()));
  }
}

void check_pair(const SaliencyMap& pred, const SaliencyMap& gt, const char* what) {
  require_same_dims(pred, gt, what);
  require_saliency_map(pred, what);
  require_binary_mask(gt, what);
}

SaliencyMap gaussian_filter_same(const SaliencyMap& in, Index window, double sigma) {
  const Index r = window / 2;
  Eigen::ArrayXd g(window);
  for (Index i = 0; i < window; ++i) {
    const double d = static_cast<double>(i - r);
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  g /= g.sum();
  const Index h = in.rows(), w = in.cols();
  SaliencyMap tmp = SaliencyMap::Zero(h, w), out = SaliencyMap::Zero(h, w);
  for (Index x = 0; x < w; ++x)
    for (Index y = 0; y < h; ++y) {
      double s = 0;
      for (Index k = 0; k < window; ++k) {
        const Index yy = y + k - r;
        if (yy >= 0 && yy < h) s += g[k] * in(yy, x);
      }
      tmp(y, x) = s;
    }
  for (Index x = 0; x < w; ++x)
    for (Index y = 0; y < h; ++y) {
      double s = 0;
      for (Index k = 0; k < window; ++k) {
        const Index xx = x + k - r;
        if (xx >= 0 && xx < w) s += g[k] * tmp(y, xx);
      }
      out(y, x) = s;
    }
  return out;
}

}  // namespace

template <typename T>
SaliencyMap to_map(const Image<T>& img) {
  if (img.channels() != 1) throw DataError("saliency map must have one channel");
  SaliencyMap m(img.height(), img.width());
  for (Index y = 0; y < img.height(); ++y)
    for (Index x = 0; x < img.width(); ++x) m(y, x) = static_cast<double>(img(y, x));
  return m;
}

template <typename T>
SaliencyMap to_map(const Tensor<T>& t) {
  require_rank(t, 2, "to_map");
  SaliencyMap m(t.dim(0), t.dim(1));
  for (Index y = 0; y < t.dim(0); ++y)
    for (Index x = 0; x < t.dim(1); ++x) m(y, x) = static_cast<double>(t[y * t.dim(1) + x]);
  return m;
}

template SaliencyMap to_map(const Image<float>&);
template SaliencyMap to_map(const Image<double>&);
template SaliencyMap to_map(const Tensor<float>&);
template SaliencyMap to_map(const Tensor<double>&);

void require_saliency_map(const SaliencyMap& pred, const char* what) {
  if (!pred.allFinite() || (pred.size() > 0 && (pred.minCoeff() < 0.0 || pred.maxCoeff() > 1.0))) {
    throw DataError(std::string(what) + ": saliency values must lie in [0, 1]");
  }
}

void require_binary_mask(const SaliencyMap& gt, const char* what) {
  if (!((gt == 0.0) || (gt == 1.0)).all()) throw DataError(std::string(what) + ": ground truth must be 0/1");
}

int quantize(double v) { return static_cast<int>(std::lround(v * 255.0)); }

BoolMap binarize(const SaliencyMap& pred, int t) {
  return pred.unaryExpr([t](double v) { return quantize(v) > t; });
}

PRPoint precision_recall(const BoolMap& predicted, const SaliencyMap& gt) {
  const BoolMap fg = gt > 0.5;
  const double tp = static_cast<double>((predicted && fg).count());
  const double positives = static_cast<double>(predicted.count());
  const double truth = static_cast<double>(fg.count());
  return {positives == 0 ? 1.0 : tp / positives, truth == 0 ? 0.0 : tp / truth};
}

std::optional<PRCurve> pr_curve(const SaliencyMap& pred, const SaliencyMap& gt) {
  check_pair(pred, gt, "pr_curve");
  std::array<long long, kThresholds> fg{}, bg{};
  for (Index i = 0; i < pred.size(); ++i) {
    const int q = quantize(pred(i));
    (gt(i) > 0.5 ? fg : bg)[static_cast<std::size_t>(q)]++;
  }
  long long truth = 0;
  for (long long c : fg) truth += c;
  if (truth == 0) return std::nullopt;
  PRCurve curve;
  curve.images = 1;
  long long tp = 0, fp = 0;
  // Walk thresholds downward; at t the positives are the bins above t.
  for (int t = kThresholds - 1; t >= 0; --t) {
    const auto s = static_cast<std::size_t>(t);
    curve.precision[s] = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.recall[s] = static_cast<double>(tp) / static_cast<double>(truth);
    tp += fg[s];
    fp += bg[s];
  }
  return curve;
}

PRCurve pr_curve(const std::vector<SaliencyMap>& preds, const std::vector<SaliencyMap>& gts,
                 std::vector<std::string>* warnings) {
  if (preds.size() != gts.size()) throw DataError("pr_curve: prediction and ground-truth counts differ");
  PRCurve sum;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto c = pr_curve(preds[i], gts[i]);
    if (!c) {
      if (warnings) warnings->push_back("image " + std::to_string(i) + ": empty ground truth, skipped");
      continue;
    }
    for (std::size_t t = 0; t < kThresholds; ++t) {
      sum.precision[t] += c->precision[t];
      sum.recall[t] += c->recall[t];
    }
    ++sum.images;
  }
  if (sum.images > 0) {
    for (std::size_t t = 0; t < kThresholds; ++t) {
      sum.precision[t] /= static_cast<double>(sum.images);
      sum.recall[t] /= static_cast<double>(sum.images);
    }
  }
  return sum;
}

double f_measure(double precision, double recall, double beta2) {
  const double denom = beta2 * precision + recall;
  return denom == 0.0 ? 0.0 : (1.0 + beta2) * precision * recall / denom;
}

std::optional<double> adaptive_f_measure(const SaliencyMap& pred, const SaliencyMap& gt, double beta2) {
  check_pair(pred, gt, "adaptive_f_measure");
  if ((gt > 0.5).count() == 0) return std::nullopt;
  const double tau = std::min(2.0 * pred.mean(), 1.0);
  const PRPoint pr = precision_recall(pred >= tau, gt);
  return f_measure(pr.precision, pr.recall, beta2);
}

double max_f_measure(const PRCurve& curve, double beta2) {
  double best = 0;
  for (std::size_t t = 0; t < kThresholds; ++t) {
    best = std::max(best, f_measure(curve.precision[t], curve.recall[t], beta2));
  }
  return best;
}

double mae(const SaliencyMap& pred, const SaliencyMap& gt) {
  require_same_dims(pred, gt, "mae");
  if (pred.size() == 0) throw DataError("mae: empty map");
  return (pred - gt).abs().mean();
}

double average_precision(const PRCurve& curve) {
  double sum = 0;
  for (int k = 0; k <= 10; ++k) {
    const double r = k / 10.0;
    double best = 0;
    for (std::size_t t = 0; t < kThresholds; ++t) {
      if (curve.recall[t] >= r) best = std::max(best, curve.precision[t]);
    }
    sum += best;
  }
  return sum / 11.0;
}

NearestForeground nearest_foreground(const SaliencyMap& gt) {
  const Index h = gt.rows(), w = gt.cols();
  constexpr Index kNone = -1;
  // Column pass: nearest foreground row in each column, ties to the upper one.
  Eigen::Array<Index, Eigen::Dynamic, Eigen::Dynamic> row(h, w);
  for (Index x = 0; x < w; ++x) {
    Index last = kNone;
    for (Index y = 0; y < h; ++y) {
      if (gt(y, x) > 0.5) last = y;
      row(y, x) = last;
    }
    Index next = kNone;
    for (Index y = h - 1; y >= 0; --y) {
      if (gt(y, x) > 0.5) next = y;
      if (next != kNone && (row(y, x) == kNone || next - y < y - row(y, x))) row(y, x) = next;
    }
  }
  NearestForeground out{SaliencyMap::Constant(h, w, std::numeric_limits<double>::infinity()),
                        Eigen::Array<Index, Eigen::Dynamic, Eigen::Dynamic>::Constant(h, w, kNone)};
  // Row pass: exact minimum of dx^2 + dy^2 over columns, ties to the leftmost.
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      long long best = std::numeric_limits<long long>::max();
      Index best_col = kNone;
      for (Index xx = 0; xx < w; ++xx) {
        const Index r = row(y, xx);
        if (r == kNone) continue;
        const long long d = (xx - x) * (xx - x) + (r - y) * (r - y);
        if (d < best) {
          best = d;
          best_col = xx;
        }
      }
      if (best_col != kNone) {
        out.distance(y, x) = std::sqrt(static_cast<double>(best));
        out.index(y, x) = row(y, best_col) * w + best_col;
      }
    }
  }
  return out;
}

std::optional<double> weighted_f_measure(const SaliencyMap& pred, const SaliencyMap& gt,
                                         const WeightedFParams& params) {
  check_pair(pred, gt, "weighted_f_measure");
  if (params.window < 1 || params.window % 2 == 0 || !(params.sigma > 0)) {
    throw ConfigError("weighted_f_measure: window must be odd and sigma positive");
  }
  const BoolMap fg = gt > 0.5;
  if (fg.count() == 0) return std::nullopt;
  const Index h = gt.rows(), w = gt.cols();
  const SaliencyMap e = (pred - gt).abs();
  const NearestForeground nf = nearest_foreground(gt);

  SaliencyMap et = e;
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      if (!fg(y, x)) {
        const Index idx = nf.index(y, x);
        et(y, x) = e(idx / w, idx % w);
      }
    }
  const SaliencyMap ea = gaussian_filter_same(et, params.window, params.sigma);

  double sum_fg = 0, sum_bg = 0;
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      if (fg(y, x)) {
        sum_fg += std::min(e(y, x), ea(y, x));
      } else {
        sum_bg += e(y, x) * (2.0 - std::exp(params.alpha * nf.distance(y, x)));
      }
    }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double n_fg = static_cast<double>(fg.count());
  const double tp = n_fg - sum_fg;
  const double recall = 1.0 - sum_fg / n_fg;
  const double precision = tp / (eps + tp + sum_bg);
  return (1.0 + params.beta2) * recall * precision / (eps + recall + params.beta2 * precision);
}

MetricsReport evaluate_dataset(const std::vector<SaliencyMap>& preds, const std::vector<SaliencyMap>& gts,
                               const MetricsConfig& config) {
  if (preds.size() != gts.size()) throw DataError("evaluate_dataset: prediction and ground-truth counts differ");
  if (preds.empty()) throw DataError("evaluate_dataset: no images");
  MetricsReport r;
  r.curve = pr_curve(preds, gts, &r.warnings);
  double f_sum = 0, wf_sum = 0, mae_sum = 0;
  Index scored = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    mae_sum += mae(preds[i], gts[i]);
    const auto f = adaptive_f_measure(preds[i], gts[i], config.beta2);
    const auto wf = weighted_f_measure(preds[i], gts[i], config.wf);
    if (!f || !wf) continue;
    f_sum += *f;
    wf_sum += *wf;
    ++scored;
  }
  r.images = static_cast<Index>(preds.size());
  r.mae = mae_sum / static_cast<double>(preds.size());
  if (scored > 0) {
    r.f_adaptive = f_sum / static_cast<double>(scored);
    r.wf_measure = wf_sum / static_cast<double>(scored);
    r.f_max = max_f_measure(r.curve, config.beta2);
    r.ap = average_precision(r.curve);
  } else {
    r.warnings.push_back("no image has a non-empty ground truth; F, WF and AP are 0");
  }
  r.f_measure = r.f_adaptive;
  return r;
}

std::string report_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["f_measure"] = report.f_measure;
  j["f_adaptive"] = report.f_adaptive;
  j["f_max"] = report.f_max;
  j["wf_measure"] = report.wf_measure;
  j["mae"] = report.mae;
  j["ap"] = report.ap;
  j["images"] = report.images;
  j["scored_images"] = report.curve.images;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string pr_curve_csv(const PRCurve& curve) {
  std::ostringstream os;
  os << "threshold,precision,recall\n" << std::setprecision(17);
  for (std::size_t t = 0; t < kThresholds; ++t) {
    os << t << ',' << curve.precision[t] << ',' << curve.recall[t] << '\n';
  }
  return os.str();
}

}  // namespace lfsal
