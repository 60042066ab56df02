#ifndef FRT_DNI_HPP
#define FRT_DNI_HPP

#include <string>
#include <utility>
#include <vector>

#include "frt/checkpoint.hpp"
#include "frt/image.hpp"

namespace frt {

// Deep network interpolation in parameter space. Interpolation weights are
// snapped to a 2^-26 dyadic grid: this makes 1-alpha exact, so endpoint and
// symmetry identities hold bitwise, and f32-parameter x weight products are
// exact in double.

// theta = alpha * A + (1 - alpha) * B for every parameter, biases included.
// Running statistics (if present under a *.running_* name) interpolate
// linearly as well; callers can inspect names to flag them.
Checkpoint interpolate(const Checkpoint& a, const Checkpoint& b, double alpha);

// convex combination of N checkpoints; weights must be >= 0 and sum to 1
// within 1e-6
Checkpoint interpolate_multi(const std::vector<Checkpoint>& models,
                             const std::vector<double>& alphas);

struct CorrEntry {
  std::string layer;
  std::vector<double> per_filter;  // Pearson index per output filter
  double median = 0.0;
};

struct CorrReport {
  std::vector<CorrEntry> entries;
  // CSV: layer,filter_index,corr
  std::string to_csv() const;
};

// Pearson correlation of corresponding flattened filters of one rank-4 conv
// layer. A constant filter on either side yields index 0.
CorrEntry filter_correlation(const Checkpoint& a, const Checkpoint& b,
                             const std::string& layer_name);

// all rank-4 layers common to both checkpoints
CorrReport filter_correlation_all(const Checkpoint& a, const Checkpoint& b);

struct SweepRow {
  double alpha = 0.0;
  double psnr_db = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double best_alpha = 0.0;  // smallest alpha attaining the maximum PSNR
  double best_psnr = 0.0;
  // CSV: alpha,psnr
  std::string to_csv() const;
};

using ValPairs = std::vector<std::pair<Image, Image>>;  // (input, reference)

// Evaluates mean PSNR of the interpolated network over the grid
// {0, interval, ..., 1}; interval must divide 1 into a whole number of
// steps. Ties break toward the smallest alpha.
SweepReport sweep_alpha(const Checkpoint& a, const Checkpoint& b, const ValPairs& val,
                        double interval);

struct AlphaFit {
  double alpha = 0.0;          // clamped to [0,1]
  double alpha_raw = 0.0;      // unclamped least-squares coefficient
  double residual = 0.0;       // rms distance of target from the A-B segment
  std::vector<std::pair<std::string, double>> per_layer;  // unclamped, per parameter
};

// Least-squares fit of target onto the segment between A and B over all
// concatenated parameters: alpha = <T-B, A-B> / |A-B|^2.
AlphaFit alpha_by_fit(const Checkpoint& a, const Checkpoint& b, const Checkpoint& target);

// out = M * f_fg(x) + (1-M) * f_bg(x) where f_t runs the architecture with
// interpolate(A, B, t). Mask pixels exactly 0 or 1 copy the corresponding
// branch bitwise.
Image spatial_blend(const Checkpoint& a, const Checkpoint& b, double alpha_fg, double alpha_bg,
                    const Image& mask, const Image& x);

// Tiled PGM of the filters of one conv layer: each output filter is reduced
// over input channels by mean, min-max normalized on its own (constant tiles
// map to 0.5), laid out on a ceil(sqrt(Cout)) grid with 1-pixel separators.
Image filter_grid(const Checkpoint& ckpt, const std::string& layer_name);
void export_filters(const Checkpoint& ckpt, const std::string& layer_name,
                    const std::string& out_path);

}  // namespace frt

#endif  // FRT_DNI_HPP
