#ifndef LFSAL_METRICS_HPP
#define LFSAL_METRICS_HPP

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lfsal/image.hpp"
#include "lfsal/tensor.hpp"

namespace lfsal {

/// Per-pixel values indexed (y, x). Predictions lie in [0,1]; masks are 0/1.
using SaliencyMap = Eigen::ArrayXXd;

inline constexpr int kThresholds = 256;

template <typename T>
SaliencyMap to_map(const Image<T>& img);
/// Rank-2 [H,W] tensor.
template <typename T>
SaliencyMap to_map(const Tensor<T>& t);

void require_saliency_map(const SaliencyMap& pred, const char* what);
void require_binary_mask(const SaliencyMap& gt, const char* what);

/// 8-bit quantization used by every threshold sweep.
int quantize(double v);

/// Salient iff round(v * 255) > t.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> binarize(const SaliencyMap& pred, int t);

struct PRCurve {
  std::array<double, kThresholds> precision{};
  std::array<double, kThresholds> recall{};
  Index images = 0;  // images that contributed (non-empty ground truth)
};

struct PRPoint {
  double precision;
  double recall;
};

/// Precision 1 when nothing is predicted.
PRPoint precision_recall(const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& predicted, const SaliencyMap& gt);

/// Per-threshold curve of one image; nullopt if gt is empty.
std::optional<PRCurve> pr_curve(const SaliencyMap& pred, const SaliencyMap& gt);

/// Dataset curve: per-threshold mean over images with non-empty ground truth.
PRCurve pr_curve(const std::vector<SaliencyMap>& preds, const std::vector<SaliencyMap>& gts,
                 std::vector<std::string>* warnings = nullptr);

double f_measure(double precision, double recall, double beta2 = 0.3);

/// tau = min(2 mean(pred), 1), salient iff pred >= tau. nullopt for empty gt.
std::optional<double> adaptive_f_measure(const SaliencyMap& pred, const SaliencyMap& gt, double beta2 = 0.3);

double max_f_measure(const PRCurve& curve, double beta2 = 0.3);

double mae(const SaliencyMap& pred, const SaliencyMap& gt);

/// 11-point interpolated average precision.
double average_precision(const PRCurve& curve);

struct WeightedFParams {
  double sigma = 5.0;   // Gaussian dependency kernel
  Index window = 7;     // kernel side
  double alpha = -0.13862943611198905;  // ln(0.5) / 5
  double beta2 = 1.0;
};

/// Euclidean distance to the nearest foreground pixel and that pixel's
/// row-major index. Ties go to the smallest column, then the smallest row.
struct NearestForeground {
  SaliencyMap distance;
  Eigen::Array<Index, Eigen::Dynamic, Eigen::Dynamic> index;
};
NearestForeground nearest_foreground(const SaliencyMap& gt);

std::optional<double> weighted_f_measure(const SaliencyMap& pred, const SaliencyMap& gt,
                                         const WeightedFParams& params = {});

struct MetricsConfig {
  double beta2 = 0.3;
  WeightedFParams wf;
};

struct MetricsReport {
  double f_measure = 0;   // the adaptive-threshold score
  double f_adaptive = 0;
  double f_max = 0;
  double wf_measure = 0;
  double mae = 0;
  double ap = 0;
  PRCurve curve;
  Index images = 0;
  std::vector<std::string> warnings;
};

MetricsReport evaluate_dataset(const std::vector<SaliencyMap>& preds, const std::vector<SaliencyMap>& gts,
                               const MetricsConfig& config = {});

/// JSON object with the scalar scores.
std::string report_json(const MetricsReport& report);
/// `threshold,precision,recall` header plus 256 rows.
std::string pr_curve_csv(const PRCurve& curve);

}  // namespace lfsal

#endif  // LFSAL_METRICS_HPP
