#include "frt/dni.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "frt/config.hpp"
#include "frt/metrics.hpp"

namespace frt {

namespace {

// snap to the 2^-26 dyadic grid (see header)
double snap_weight(double w) { return std::round(w * 67108864.0) / 67108864.0; }

void require_compatible(const Checkpoint& a, const Checkpoint& b, const char* op) {
  CompatReport report = compat_check(a, b);
  if (!report.compatible())
    throw std::invalid_argument(std::string(op) + ": incompatible checkpoints\n" +
                                report.to_string());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Checkpoint interpolate(const Checkpoint& a, const Checkpoint& b, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("interpolate: alpha must be in [0,1]");
  require_compatible(a, b, "interpolate");
  const double wa = snap_weight(alpha);
  const double wb = 1.0 - wa;  // exact: wa is dyadic with 26 mantissa bits
  Checkpoint out;
  out.meta_json = a.meta_json;
  char prov[64];
  std::snprintf(prov, sizeof prov, "dni(%.6g)", wa);
  out.set_provenance(a.provenance() + "|" + b.provenance() + "|" + prov);
  for (const auto& [name, ta] : a.params) {
    const Tensor& tb = b.params.at(name);
    if (wa == 1.0) {
      out.params.emplace(name, ta.detach());
      continue;
    }
    if (wa == 0.0) {
      out.params.emplace(name, tb.detach());
      continue;
    }
    Tensor t = Tensor::zeros(ta.shape());
    for (size_t i = 0; i < t.data().size(); ++i)
      t.data()[i] = float(wa * double(ta.data()[i]) + wb * double(tb.data()[i]));
    out.params.emplace(name, std::move(t));
  }
  return out;
}

Checkpoint interpolate_multi(const std::vector<Checkpoint>& models,
                             const std::vector<double>& alphas) {
  if (models.empty() || models.size() != alphas.size())
    throw std::invalid_argument("interpolate_multi: one weight per model required");
  double sum = 0.0;
  for (double a : alphas) {
    if (a < 0.0) throw std::invalid_argument("interpolate_multi: weights must be >= 0");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("interpolate_multi: weights must sum to 1, got " + fmt(sum));
  for (size_t i = 1; i < models.size(); ++i)
    require_compatible(models[0], models[i], "interpolate_multi");

  std::vector<double> w(alphas.size());
  for (size_t i = 0; i < alphas.size(); ++i) w[i] = snap_weight(alphas[i]);

  Checkpoint out;
  out.meta_json = models[0].meta_json;
  for (const auto& [name, t0] : models[0].params) {
    Tensor t = Tensor::zeros(t0.shape());
    for (size_t i = 0; i < t.data().size(); ++i) {
      double acc = 0.0;
      for (size_t m = 0; m < models.size(); ++m)
        acc += w[m] * double(models[m].params.at(name).data()[i]);
      t.data()[i] = float(acc);
    }
    out.params.emplace(name, std::move(t));
  }
  return out;
}

CorrEntry filter_correlation(const Checkpoint& a, const Checkpoint& b,
                             const std::string& layer_name) {
  auto ia = a.params.find(layer_name);
  auto ib = b.params.find(layer_name);
  if (ia == a.params.end() || ib == b.params.end())
    throw std::invalid_argument("filter_correlation: layer '" + layer_name +
                                "' missing from a checkpoint");
  const Tensor& ta = ia->second;
  const Tensor& tb = ib->second;
  if (ta.rank() != 4 || ta.shape() != tb.shape())
    throw std::invalid_argument("filter_correlation: '" + layer_name +
                                "' must be a rank-4 conv weight of equal shape");
  const int cout = ta.dim(0);
  const int64_t flen = ta.numel() / cout;
  CorrEntry entry;
  entry.layer = layer_name;
  for (int f = 0; f < cout; ++f) {
    const float* fa = ta.data().data() + int64_t(f) * flen;
    const float* fb = tb.data().data() + int64_t(f) * flen;
    double ma = 0, mb = 0;
    for (int64_t i = 0; i < flen; ++i) {
      ma += fa[i];
      mb += fb[i];
    }
    ma /= double(flen);
    mb /= double(flen);
    double saa = 0, sbb = 0, sab = 0;
    for (int64_t i = 0; i < flen; ++i) {
      const double da = fa[i] - ma, db = fb[i] - mb;
      saa += da * da;
      sbb += db * db;
      sab += da * db;
    }
    // constant filter -> defined as 0
    const double denom = std::sqrt(saa) * std::sqrt(sbb);
    entry.per_filter.push_back(denom > 0.0 ? sab / denom : 0.0);
  }
  std::vector<double> sorted = entry.per_filter;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  entry.median = n == 0 ? 0.0
                        : (n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]));
  return entry;
}

CorrReport filter_correlation_all(const Checkpoint& a, const Checkpoint& b) {
  CorrReport report;
  for (const auto& [name, t] : a.params)
    if (t.rank() == 4 && b.params.count(name) && b.params.at(name).shape() == t.shape())
      report.entries.push_back(filter_correlation(a, b, name));
  return report;
}

std::string CorrReport::to_csv() const {
  std::string out = "layer,filter_index,corr\n";
  for (const auto& e : entries)
    for (size_t f = 0; f < e.per_filter.size(); ++f)
      out += e.layer + "," + std::to_string(f) + "," + fmt(e.per_filter[f]) + "\n";
  return out;
}

SweepReport sweep_alpha(const Checkpoint& a, const Checkpoint& b, const ValPairs& val,
                        double interval) {
  if (val.empty()) throw std::invalid_argument("sweep_alpha: validation pairs required");
  if (!(interval > 0.0 && interval <= 1.0))
    throw std::invalid_argument("sweep_alpha: interval must be in (0,1]");
  const double steps_f = 1.0 / interval;
  const int steps = int(std::lround(steps_f));
  if (std::abs(steps_f - steps) > 1e-9)
    throw std::invalid_argument("sweep_alpha: interval must divide 1 evenly");
  require_compatible(a, b, "sweep_alpha");

  SweepReport report;
  for (int i = 0; i <= steps; ++i) {
    const double alpha = double(i) / steps;
    Checkpoint mixed = interpolate(a, b, alpha);
    auto eval = make_evaluator(mixed);
    double sum = 0.0;
    for (const auto& [input, ref] : val) sum += psnr(eval(input), ref);
    report.rows.push_back({alpha, sum / double(val.size())});
  }
  report.best_alpha = report.rows[0].alpha;
  report.best_psnr = report.rows[0].psnr_db;
  for (const auto& row : report.rows)
    if (row.psnr_db > report.best_psnr) {  // ties keep the smallest alpha
      report.best_psnr = row.psnr_db;
      report.best_alpha = row.alpha;
    }
  return report;
}

std::string SweepReport::to_csv() const {
  std::string out = "alpha,psnr\n";
  for (const auto& row : rows) out += fmt(row.alpha) + "," + fmt(row.psnr_db) + "\n";
  return out;
}

AlphaFit alpha_by_fit(const Checkpoint& a, const Checkpoint& b, const Checkpoint& target) {
  require_compatible(a, b, "alpha_by_fit");
  require_compatible(a, target, "alpha_by_fit");
  AlphaFit fit;
  double dot = 0.0, norm2 = 0.0;
  int64_t count = 0;
  for (const auto& [name, ta] : a.params) {
    const Tensor& tb = b.params.at(name);
    const Tensor& tt = target.params.at(name);
    double layer_dot = 0.0, layer_norm2 = 0.0;
    for (size_t i = 0; i < ta.data().size(); ++i) {
      const double d = double(ta.data()[i]) - double(tb.data()[i]);
      const double t = double(tt.data()[i]) - double(tb.data()[i]);
      layer_dot += t * d;
      layer_norm2 += d * d;
    }
    dot += layer_dot;
    norm2 += layer_norm2;
    count += ta.numel();
    fit.per_layer.emplace_back(name, layer_norm2 > 0.0 ? layer_dot / layer_norm2
                                                       : 0.0);
  }
  if (norm2 == 0.0)
    throw std::invalid_argument("alpha_by_fit: endpoints are identical, fit undefined");
  fit.alpha_raw = dot / norm2;
  fit.alpha = std::min(1.0, std::max(0.0, fit.alpha_raw));
  // rms distance from the segment point at alpha_raw
  double resid2 = 0.0;
  for (const auto& [name, ta] : a.params) {
    const Tensor& tb = b.params.at(name);
    const Tensor& tt = target.params.at(name);
    for (size_t i = 0; i < ta.data().size(); ++i) {
      const double proj = fit.alpha_raw * double(ta.data()[i]) +
                          (1.0 - fit.alpha_raw) * double(tb.data()[i]);
      const double d = double(tt.data()[i]) - proj;
      resid2 += d * d;
    }
  }
  fit.residual = std::sqrt(resid2 / double(count));
  return fit;
}

Image spatial_blend(const Checkpoint& a, const Checkpoint& b, double alpha_fg, double alpha_bg,
                    const Image& mask, const Image& x) {
  if (mask.h != x.h || mask.w != x.w)
    throw std::invalid_argument("spatial_blend: mask extents must match the input");
  for (float v : mask.data)
    if (v < 0.f || v > 1.f)
      throw std::invalid_argument("spatial_blend: mask values must lie in [0,1]");
  auto f_fg = make_evaluator(interpolate(a, b, alpha_fg));
  auto f_bg = make_evaluator(interpolate(a, b, alpha_bg));
  Image fg = f_fg(x);
  Image bg = f_bg(x);
  Image out(x.h, x.w, x.c);
  for (int ch = 0; ch < x.c; ++ch)
    for (int y = 0; y < x.h; ++y)
      for (int xx = 0; xx < x.w; ++xx) {
        const float m = mask.at(mask.c == x.c ? ch : 0, y, xx);
        // exact copy at the mask extremes so binary masks blend bitwise
        if (m == 1.f) out.at(ch, y, xx) = fg.at(ch, y, xx);
        else if (m == 0.f) out.at(ch, y, xx) = bg.at(ch, y, xx);
        else out.at(ch, y, xx) = m * fg.at(ch, y, xx) + (1.f - m) * bg.at(ch, y, xx);
      }
  return out;
}

Image filter_grid(const Checkpoint& ckpt, const std::string& layer_name) {
  auto it = ckpt.params.find(layer_name);
  if (it == ckpt.params.end())
    throw std::invalid_argument("export_filters: layer '" + layer_name + "' not found");
  const Tensor& w = it->second;
  if (w.rank() != 4)
    throw std::invalid_argument("export_filters: '" + layer_name + "' is not a conv weight");
  const int cout = w.dim(0), cin = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const int grid = int(std::ceil(std::sqrt(double(cout))));
  const int cell_h = kh + 1, cell_w = kw + 1;
  Image out(grid * cell_h + 1, grid * cell_w + 1, 1, 0.f);  // separators stay black
  for (int f = 0; f < cout; ++f) {
    // reduce over input channels by mean, then min-max normalize per filter
    std::vector<float> tile(size_t(kh) * kw, 0.f);
    for (int ci = 0; ci < cin; ++ci)
      for (int i = 0; i < kh * kw; ++i)
        tile[size_t(i)] += w.data()[size_t(((f * cin + ci) * kh * kw) + i)] / float(cin);
    float lo = tile[0], hi = tile[0];
    for (float v : tile) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const int gy = f / grid, gx = f % grid;
    for (int y = 0; y < kh; ++y)
      for (int x = 0; x < kw; ++x) {
        const float v = tile[size_t(y * kw + x)];
        const float norm = hi > lo ? (v - lo) / (hi - lo) : 0.5f;  // constant -> mid gray
        out.at(0, gy * cell_h + 1 + y, gx * cell_w + 1 + x) = norm;
      }
  }
  return out;
}

void export_filters(const Checkpoint& ckpt, const std::string& layer_name,
                    const std::string& out_path) {
  write_image(filter_grid(ckpt, layer_name), out_path);
}

}  // namespace frt
