// frt: toy face restoration with a generative prior, plus a network
// interpolation toolkit. Batch commands only; every command that takes a
// seed or a config is byte-reproducible.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frt/config.hpp"
#include "frt/degrade.hpp"
#include "frt/dni.hpp"
#include "frt/gradcheck_suite.hpp"
#include "frt/metrics.hpp"
#include "frt/parallel.hpp"
#include "frt/toyfaces.hpp"
#include "frt/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace frt;

namespace {

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::string item;
  for (std::stringstream ss(csv); std::getline(ss, item, ',');)
    out.push_back(std::stod(item));
  return out;
}

std::vector<std::string> parse_paths(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  for (std::stringstream ss(csv); std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

std::vector<std::string> sorted_images(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string ext = e.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

ValPairs load_val_pairs(const std::string& dir) {
  const fs::path input_dir = fs::path(dir) / "input";
  const fs::path ref_dir = fs::path(dir) / "ref";
  if (!fs::is_directory(input_dir) || !fs::is_directory(ref_dir))
    throw std::runtime_error("validation directory needs input/ and ref/ subdirectories");
  ValPairs pairs;
  for (const auto& name : sorted_images(input_dir.string())) {
    const fs::path ref = ref_dir / name;
    if (!fs::exists(ref)) throw std::runtime_error("no reference for " + name);
    pairs.emplace_back(read_image((input_dir / name).string()), read_image(ref.string()));
  }
  if (pairs.empty()) throw std::runtime_error("no image pairs in " + dir);
  return pairs;
}

DegradationSpec spec_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  DegradationSpec spec;
  spec.sigma = j.value("sigma", spec.sigma);
  spec.scale = j.value("scale", spec.scale);
  spec.noise = j.value("noise", spec.noise);
  spec.quality = j.value("quality", spec.quality);
  spec.jitter_brightness = j.value("jitter_brightness", spec.jitter_brightness);
  spec.jitter_contrast = j.value("jitter_contrast", spec.jitter_contrast);
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toy face restoration and network interpolation toolkit"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (1 = deterministic serial mode)");

  // gen-toyfaces
  auto* gen_cmd = app.add_subcommand("gen-toyfaces", "generate a procedural face corpus");
  int gen_count = 100, gen_size = 32;
  uint64_t gen_seed = 1;
  std::string gen_out;
  gen_cmd->add_option("--count", gen_count)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--size", gen_size);
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--out", gen_out)->required();

  // degrade
  auto* deg_cmd = app.add_subcommand("degrade", "apply the synthetic degradation chain");
  std::string deg_in, deg_out, deg_spec;
  DegradationSpec deg;
  bool keep_size = false;
  deg_cmd->add_option("--in", deg_in)->required();
  deg_cmd->add_option("--out", deg_out)->required();
  deg_cmd->add_option("--spec", deg_spec, "JSON file with the degradation spec");
  deg_cmd->add_option("--sigma", deg.sigma);
  deg_cmd->add_option("--scale", deg.scale);
  deg_cmd->add_option("--noise", deg.noise);
  deg_cmd->add_option("--quality", deg.quality);
  deg_cmd->add_option("--jitter-brightness", deg.jitter_brightness);
  deg_cmd->add_option("--jitter-contrast", deg.jitter_contrast);
  deg_cmd->add_option("--seed", deg.seed);
  deg_cmd->add_flag("--keep-size", keep_size, "re-upsample back to the input size");

  // pretrain-prior
  auto* prior_cmd = app.add_subcommand("pretrain-prior", "pretrain the generative prior");
  std::string prior_cfg, prior_out;
  prior_cmd->add_option("--config", prior_cfg)->required();
  prior_cmd->add_option("--out", prior_out)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a restorer or denoiser");
  std::string train_cfg, train_dir;
  train_cmd->add_option("--config", train_cfg)->required();
  train_cmd->add_option("--out-dir", train_dir)->required();

  // finetune
  auto* ft_cmd = app.add_subcommand("finetune", "continue training from a checkpoint");
  std::string ft_base, ft_cfg, ft_out;
  ft_cmd->add_option("--base", ft_base)->required();
  ft_cmd->add_option("--config", ft_cfg)->required();
  ft_cmd->add_option("--out", ft_out)->required();

  // restore
  auto* rest_cmd = app.add_subcommand("restore", "run a checkpoint on one image");
  std::string rest_ckpt, rest_in, rest_out;
  rest_cmd->add_option("--ckpt", rest_ckpt)->required();
  rest_cmd->add_option("--in", rest_in)->required();
  rest_cmd->add_option("--out", rest_out)->required();

  // dni
  auto* dni_cmd = app.add_subcommand("dni", "two-end parameter interpolation");
  std::string dni_a, dni_b, dni_out;
  double dni_alpha = 0.5;
  dni_cmd->add_option("--a", dni_a)->required();
  dni_cmd->add_option("--b", dni_b)->required();
  dni_cmd->add_option("--alpha", dni_alpha)->required();
  dni_cmd->add_option("--out", dni_out)->required();

  // dni-multi
  auto* multi_cmd = app.add_subcommand("dni-multi", "convex combination of N checkpoints");
  std::string multi_ckpts, multi_alphas, multi_out;
  multi_cmd->add_option("--ckpts", multi_ckpts, "comma-separated checkpoint paths")->required();
  multi_cmd->add_option("--alphas", multi_alphas, "comma-separated weights")->required();
  multi_cmd->add_option("--out", multi_out)->required();

  // sweep-alpha
  auto* sweep_cmd = app.add_subcommand("sweep-alpha", "PSNR over the interpolation grid");
  std::string sweep_a, sweep_b, sweep_val, sweep_report;
  double sweep_interval = 0.05;
  sweep_cmd->add_option("--a", sweep_a)->required();
  sweep_cmd->add_option("--b", sweep_b)->required();
  sweep_cmd->add_option("--val", sweep_val, "directory with input/ and ref/ image pairs")
      ->required();
  sweep_cmd->add_option("--interval", sweep_interval);
  sweep_cmd->add_option("--report", sweep_report)->required();

  // corr
  auto* corr_cmd = app.add_subcommand("corr", "filter correlation between checkpoints");
  std::string corr_a, corr_b, corr_layer, corr_report;
  corr_cmd->add_option("--a", corr_a)->required();
  corr_cmd->add_option("--b", corr_b)->required();
  corr_cmd->add_option("--layer", corr_layer, "restrict to one conv layer");
  corr_cmd->add_option("--report", corr_report)->required();

  // alpha-fit
  auto* fit_cmd = app.add_subcommand("alpha-fit", "least-squares alpha from a target checkpoint");
  std::string fit_a, fit_b, fit_target;
  fit_cmd->add_option("--a", fit_a)->required();
  fit_cmd->add_option("--b", fit_b)->required();
  fit_cmd->add_option("--target", fit_target)->required();

  // spatial-blend
  auto* blend_cmd = app.add_subcommand("spatial-blend", "mask-controlled two-strength inference");
  std::string blend_a, blend_b, blend_mask, blend_in, blend_out;
  double blend_fg = 1.0, blend_bg = 0.0;
  blend_cmd->add_option("--a", blend_a)->required();
  blend_cmd->add_option("--b", blend_b)->required();
  blend_cmd->add_option("--alpha-fg", blend_fg)->required();
  blend_cmd->add_option("--alpha-bg", blend_bg)->required();
  blend_cmd->add_option("--mask", blend_mask)->required();
  blend_cmd->add_option("--in", blend_in)->required();
  blend_cmd->add_option("--out", blend_out)->required();

  // export-filters
  auto* exp_cmd = app.add_subcommand("export-filters", "tile conv filters into a PGM grid");
  std::string exp_ckpt, exp_layer, exp_out;
  exp_cmd->add_option("--ckpt", exp_ckpt)->required();
  exp_cmd->add_option("--layer", exp_layer)->required();
  exp_cmd->add_option("--out", exp_out)->required();

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "PSNR/SSIM for an image or directory pair");
  std::string met_ref, met_test, met_csv;
  met_cmd->add_option("--ref", met_ref)->required();
  met_cmd->add_option("--test", met_test)->required();
  met_cmd->add_option("--csv", met_csv, "write a CSV report");

  // gradcheck
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  std::string gc_module;
  gc_cmd->add_option("--module", gc_module, "run only checks whose name contains this");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      std::vector<ToyFace> faces;
      faces.resize(size_t(gen_count));
      parallel_for(gen_count, threads, [&](int64_t i) {
        faces[size_t(i)] = gen_toyface(gen_size, mix_seed(gen_seed, uint64_t(i)));
      });
      write_corpus(faces, gen_seed, gen_out);
      std::printf("wrote %d faces to %s\n", gen_count, gen_out.c_str());
    } else if (*deg_cmd) {
      if (!deg_spec.empty()) deg = spec_from_json_file(deg_spec);
      Image img = read_image(deg_in);
      write_image(keep_size ? degrade_keep_size(img, deg) : degrade(img, deg), deg_out);
    } else if (*prior_cmd) {
      RunConfig cfg = parse_run_config_file(prior_cfg);
      TrainArtifacts art = pretrain_prior(cfg);
      save_checkpoint(art.checkpoint, prior_out);
      std::printf("prior reconstruction val_psnr=%.2f\n", art.final_val_psnr);
    } else if (*train_cmd) {
      RunConfig cfg = parse_run_config_file(train_cfg);
      TrainArtifacts art;
      if (cfg.task == "restore") {
        if (cfg.prior.checkpoint.empty())
          throw std::runtime_error("train: restore task requires prior.checkpoint");
        art = train_restorer(cfg, load_checkpoint(cfg.prior.checkpoint), train_dir);
      } else {
        art = train_denoiser(cfg, nullptr, train_dir);
      }
      std::printf("final val_psnr=%.3f baseline_psnr=%.3f\n", art.final_val_psnr,
                  art.baseline_val_psnr);
    } else if (*ft_cmd) {
      RunConfig cfg = parse_run_config_file(ft_cfg);
      Checkpoint base = load_checkpoint(ft_base);
      TrainArtifacts art = finetune_checkpoint(base, cfg);
      save_checkpoint(art.checkpoint, ft_out);
      std::printf("finetuned '%s' val_psnr=%.3f\n", art.checkpoint.provenance().c_str(),
                  art.final_val_psnr);
    } else if (*rest_cmd) {
      auto eval = make_evaluator(load_checkpoint(rest_ckpt));
      write_image(eval(read_image(rest_in)), rest_out);
    } else if (*dni_cmd) {
      save_checkpoint(interpolate(load_checkpoint(dni_a), load_checkpoint(dni_b), dni_alpha),
                      dni_out);
    } else if (*multi_cmd) {
      std::vector<Checkpoint> models;
      for (const auto& p : parse_paths(multi_ckpts)) models.push_back(load_checkpoint(p));
      save_checkpoint(interpolate_multi(models, parse_list(multi_alphas)), multi_out);
    } else if (*sweep_cmd) {
      SweepReport report = sweep_alpha(load_checkpoint(sweep_a), load_checkpoint(sweep_b),
                                       load_val_pairs(sweep_val), sweep_interval);
      atomic_write_file(sweep_report, report.to_csv());
      std::printf("best alpha=%.6g psnr=%.3f (%zu grid points)\n", report.best_alpha,
                  report.best_psnr, report.rows.size());
    } else if (*corr_cmd) {
      Checkpoint a = load_checkpoint(corr_a), b = load_checkpoint(corr_b);
      CorrReport report;
      if (corr_layer.empty()) report = filter_correlation_all(a, b);
      else report.entries.push_back(filter_correlation(a, b, corr_layer));
      atomic_write_file(corr_report, report.to_csv());
      for (const auto& e : report.entries)
        std::printf("%s median=%.4f\n", e.layer.c_str(), e.median);
    } else if (*fit_cmd) {
      AlphaFit fit = alpha_by_fit(load_checkpoint(fit_a), load_checkpoint(fit_b),
                                  load_checkpoint(fit_target));
      std::printf("alpha=%.6f alpha_raw=%.6f residual=%.6g\n", fit.alpha, fit.alpha_raw,
                  fit.residual);
      for (const auto& [layer, alpha] : fit.per_layer)
        std::printf("  %s %.6f\n", layer.c_str(), alpha);
    } else if (*blend_cmd) {
      Image out = spatial_blend(load_checkpoint(blend_a), load_checkpoint(blend_b), blend_fg,
                                blend_bg, read_image(blend_mask), read_image(blend_in));
      write_image(out, blend_out);
    } else if (*exp_cmd) {
      export_filters(load_checkpoint(exp_ckpt), exp_layer, exp_out);
    } else if (*met_cmd) {
      std::string csv = "ref,test,psnr_db,ssim\n";
      if (fs::is_directory(met_ref)) {
        auto names = sorted_images(met_ref);
        std::vector<MetricResult> results(names.size());
        parallel_for(int64_t(names.size()), threads, [&](int64_t i) {
          Image ref = read_image((fs::path(met_ref) / names[size_t(i)]).string());
          Image test = read_image((fs::path(met_test) / names[size_t(i)]).string());
          results[size_t(i)] = compare(ref, test);
        });
        for (size_t i = 0; i < names.size(); ++i) {
          std::printf("%s psnr_db=%.4f ssim=%.6f\n", names[i].c_str(), results[i].psnr_db,
                      results[i].ssim);
          char row[256];
          std::snprintf(row, sizeof row, "%s,%s,%.4f,%.6f\n", names[i].c_str(), names[i].c_str(),
                        results[i].psnr_db, results[i].ssim);
          csv += row;
        }
      } else {
        MetricResult r = compare(read_image(met_ref), read_image(met_test));
        std::printf("psnr_db=%.4f ssim=%.6f\n", r.psnr_db, r.ssim);
        char row[256];
        std::snprintf(row, sizeof row, "%s,%s,%.4f,%.6f\n", met_ref.c_str(), met_test.c_str(),
                      r.psnr_db, r.ssim);
        csv += row;
      }
      if (!met_csv.empty()) atomic_write_file(met_csv, csv);
    } else if (*gc_cmd) {
      bool all_pass = true;
      for (const auto& check : gradcheck_suite()) {
        if (!gc_module.empty() && check.name.find(gc_module) == std::string::npos) continue;
        GradCheckReport report = check.run();
        const bool pass = report.pass(1e-4);
        all_pass = all_pass && pass;
        std::printf("%-22s max_rel_err=%.3e %s\n", check.name.c_str(), report.worst(),
                    pass ? "PASS" : "FAIL");
      }
      if (!all_pass) return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
