// spr: structured prototype regularization pipeline driver.
//
// Subcommands: gen-data, train-source, train-spr, self-train, filter,
// structure, losses, eval, acceptance. Exit codes: 0 success, 1 usage error,
// 2 numeric/contract failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spr/acceptance.hpp"
#include "spr/log.hpp"
#include "spr/spr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<long long> seed_override;
};

struct HyperOverrides {
  std::optional<double> gamma, lambda_e, lambda_a, alpha, tau, epsilon;
  std::optional<bool> decoupled;
};

void add_hyper_flags(CLI::App* cmd, HyperOverrides& h) {
  cmd->add_option("--gamma", h.gamma, "source/target prototype blend weight (γ)");
  cmd->add_option("--lambda-e", h.lambda_e, "inter-class regularization strength (λ_e)");
  cmd->add_option("--lambda-a", h.lambda_a, "intra-class regularization strength (λ_a)");
  cmd->add_option("--alpha", h.alpha, "reliable low-entropy fraction (α)");
  cmd->add_option("--tau", h.tau, "similarity temperature (τ)");
  cmd->add_option("--epsilon", h.epsilon, "normalization guard constant (ε)");
  cmd->add_flag("--decoupled,!--no-decoupled", h.decoupled,
                "use the decoupled global correlation matrices");
}

void apply_overrides(spr::toy::SprParams& p, const HyperOverrides& h) {
  if (h.gamma) p.gamma = static_cast<float>(*h.gamma);
  if (h.lambda_e) p.lambda_e = static_cast<float>(*h.lambda_e);
  if (h.lambda_a) p.lambda_a = static_cast<float>(*h.lambda_a);
  if (h.alpha) p.alpha = *h.alpha;
  if (h.tau) p.tau = static_cast<float>(*h.tau);
  if (h.epsilon) p.epsilon = static_cast<float>(*h.epsilon);
  if (h.decoupled) p.decoupled = *h.decoupled;
  p.validate();
}

spr::ConfigFile load_config(const CommonOpts& opts) {
  if (opts.config_path.empty()) throw spr::IoError("missing --config");
  return spr::ConfigFile::parse_file(opts.config_path);
}

spr::toy::ToyDomainConfig domain_config(const spr::ConfigFile& cfg, const CommonOpts& opts) {
  spr::toy::ToyDomainConfig domain = spr::toy::domain_config_from(cfg);
  if (opts.seed_override) domain.seed = static_cast<uint64_t>(*opts.seed_override);
  return domain;
}

std::string joined(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_run_outputs(const std::string& out_dir, const spr::toy::TrainResult& result) {
  spr::toy::write_trace_csv(joined(out_dir, "metrics.csv"), result.trace);
  spr::toy::write_params(joined(out_dir, "params.json"), result.params);
  spr::toy::write_json(joined(out_dir, "final_metrics.json"), spr::toy::result_json(result));
}

void dump_prototypes(const std::string& out_dir, const spr::toy::TrainResult& result) {
  if (result.regularized_protos.size() == 0) return;
  spr::write_prototypes(joined(out_dir, "ps.sprt"), joined(out_dir, "ps.valid"),
                        result.source_protos);
  spr::write_prototypes(joined(out_dir, "pt.sprt"), joined(out_dir, "pt.valid"),
                        result.target_protos);
  spr::write_prototypes(joined(out_dir, "ph.sprt"), joined(out_dir, "ph.valid"),
                        result.blended_protos);
  spr::write_tensor(joined(out_dir, "pr.sprt"), result.regularized_protos);
}

int cmd_gen_data(const CommonOpts& opts) {
  const spr::ConfigFile cfg = load_config(opts);
  const spr::toy::ToyDomainConfig domain = domain_config(cfg, opts);
  const spr::toy::DomainPair pair = spr::toy::generate_domain_pair(domain);

  spr::write_tensor(joined(opts.out_dir, "source_features.sprt"), pair.source.features);
  spr::write_labels(joined(opts.out_dir, "source_labels.sprt"), pair.source.labels);
  spr::write_tensor(joined(opts.out_dir, "target_features.sprt"), pair.target.features);
  spr::write_labels(joined(opts.out_dir, "target_labels_hidden.sprt"), pair.target.labels);
  spr::write_tensor(joined(opts.out_dir, "class_means.sprt"), pair.class_means);

  json manifest;
  manifest["num_classes"] = domain.num_classes;
  manifest["feature_dim"] = domain.feature_dim;
  manifest["grid"] = {domain.grid_h, domain.grid_w};
  manifest["seed"] = domain.seed;
  spr::toy::write_json(joined(opts.out_dir, "manifest.json"), manifest);
  spr::log_info("gen-data: wrote domain pair to " + opts.out_dir);
  return 0;
}

int cmd_train_source(const CommonOpts& opts) {
  const spr::ConfigFile cfg = load_config(opts);
  const spr::toy::ToyDomainConfig domain = domain_config(cfg, opts);
  const spr::toy::DomainPair pair = spr::toy::generate_domain_pair(domain);
  const spr::toy::ClassifierParams init =
      spr::toy::classifier_from(cfg, domain.feature_dim, domain.num_classes);
  const spr::toy::Schedule sched = spr::toy::schedule_from(cfg, "source", {250, 1e-3});

  const spr::toy::TrainResult result = spr::toy::train_source_only(pair, init, sched);
  write_run_outputs(opts.out_dir, result);
  std::cout << spr::toy::result_json(result).dump(2) << "\n";
  return 0;
}

int cmd_train_spr(const CommonOpts& opts, const HyperOverrides& hyper,
                  const std::string& params_path, bool dump_protos_flag) {
  const spr::ConfigFile cfg = load_config(opts);
  const spr::toy::ToyDomainConfig domain = domain_config(cfg, opts);
  const spr::toy::DomainPair pair = spr::toy::generate_domain_pair(domain);

  spr::toy::SprParams params = spr::toy::spr_params_from(cfg);
  apply_overrides(params, hyper);
  const spr::toy::Schedule sched = spr::toy::schedule_from(cfg, "adapt", {150, 4e-4});

  spr::toy::ClassifierParams init =
      params_path.empty()
          ? spr::toy::classifier_from(cfg, domain.feature_dim, domain.num_classes)
          : spr::toy::read_params(params_path);
  const spr::toy::TrainResult result = spr::toy::train_spr(pair, init, sched, params);
  write_run_outputs(opts.out_dir, result);
  if (dump_protos_flag) dump_prototypes(opts.out_dir, result);
  std::cout << spr::toy::result_json(result).dump(2) << "\n";
  return 0;
}

int cmd_self_train(const CommonOpts& opts, const HyperOverrides& hyper,
                   const std::string& params_path) {
  const spr::ConfigFile cfg = load_config(opts);
  const spr::toy::ToyDomainConfig domain = domain_config(cfg, opts);
  const spr::toy::DomainPair pair = spr::toy::generate_domain_pair(domain);

  spr::toy::SprParams params = spr::toy::spr_params_from(cfg);
  apply_overrides(params, hyper);
  const spr::toy::SelfTrainSchedule sched = spr::toy::selftrain_schedule_from(cfg);
  const spr::toy::ClassifierParams init = spr::toy::read_params(params_path);

  const spr::toy::TrainResult result = spr::toy::self_training_stage(pair, init, sched, params);
  write_run_outputs(opts.out_dir, result);
  std::cout << spr::toy::result_json(result).dump(2) << "\n";
  return 0;
}

int cmd_filter(const std::string& logits_path, const std::string& protos_path, double alpha,
               const std::string& out_labels, const std::string& out_entropy,
               const std::string& out_weights) {
  spr::Tensor logits = spr::read_tensor(logits_path);
  int h = 0, w = 0;
  if (logits.rank() == 3) {
    h = logits.dim(0);
    w = logits.dim(1);
    logits = spr::flatten_pixels(logits);
  } else if (logits.rank() == 2) {
    h = logits.dim(0);
    w = 1;
  } else {
    throw spr::DimensionError("filter: logits must be rank 2 (NxD) or rank 3 (HxWxD)");
  }
  const spr::Tensor protos = spr::read_tensor(protos_path);
  const spr::PixelStats stats = spr::compute_pixel_stats(logits, protos, alpha);
  const spr::LabelMap labels = spr::pseudo_labels(stats.q, stats.mask, h, w);

  if (!out_labels.empty()) spr::write_labels(out_labels, labels);
  if (!out_entropy.empty()) spr::write_tensor(out_entropy, stats.h);
  if (!out_weights.empty()) spr::write_tensor(out_weights, stats.w);

  json summary;
  summary["pixels"] = labels.size();
  summary["retained"] = labels.labeled_count();
  summary["alpha"] = alpha;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_structure(const std::string& protos_path, const std::string& valid_path, double eps,
                  double lambda_e, double lambda_a, bool decoupled, const std::string& out_path) {
  spr::Tensor ph = spr::read_tensor(protos_path);
  std::vector<bool> valid;
  if (!valid_path.empty()) {
    valid = spr::read_prototypes(protos_path, valid_path).valid;
  }
  const spr::RegularizedPrototypes reg =
      spr::regularize(ph, valid, static_cast<float>(lambda_e), static_cast<float>(lambda_a),
                      static_cast<float>(eps), decoupled);
  if (!out_path.empty()) spr::write_tensor(out_path, reg.p_r);

  json diag;
  diag["frobenius_pe"] = reg.frobenius_pe();
  diag["frobenius_pa"] = reg.frobenius_pa();
  diag["invalid_classes"] = reg.invalid_classes;
  diag["interaction_bytes"] = reg.interaction_bytes;
  diag["decoupled"] = decoupled;
  std::cout << diag.dump(2) << "\n";
  return 0;
}

int cmd_losses(const std::string& source_logits_path, const std::string& source_labels_path,
               const std::string& target_logits_path, const std::string& protos_path,
               const std::string& source_embed_path, const std::string& target_embed_path,
               double tau, double alpha) {
  const spr::Tensor source_logits = spr::read_tensor(source_logits_path);
  const spr::Tensor target_logits = spr::read_tensor(target_logits_path);
  const spr::LabelMap source_labels = spr::read_labels(source_labels_path);
  const spr::Tensor protos = spr::read_tensor(protos_path);
  const spr::Tensor source_embed =
      source_embed_path.empty() ? source_logits : spr::read_tensor(source_embed_path);
  const spr::Tensor target_embed =
      target_embed_path.empty() ? target_logits : spr::read_tensor(target_embed_path);

  spr::LossReport report;
  report.l_ce = spr::cross_entropy(source_logits, source_labels);

  // attention weights from each domain's own entropy map
  const spr::PixelStats stats_s =
      spr::compute_pixel_stats(spr::flatten_pixels(source_embed), protos, 1.0);
  const spr::PixelStats stats_t =
      spr::compute_pixel_stats(spr::flatten_pixels(target_embed), protos, alpha);
  const int th = target_embed.dim(0), tw = target_embed.dim(1);
  const spr::LabelMap pseudo = spr::pseudo_labels(stats_t.q, stats_t.mask, th, tw);

  const spr::Tensor w_s = stats_s.w.reshaped({source_embed.dim(0), source_embed.dim(1)});
  const spr::Tensor w_t = stats_t.w.reshaped({th, tw});
  const auto sim_s =
      spr::prototype_similarity(source_embed, protos, w_s, static_cast<float>(tau));
  const auto sim_t =
      spr::prototype_similarity(target_embed, protos, w_t, static_cast<float>(tau));
  report.l_s = spr::contrastive_loss(sim_s, source_labels);
  report.l_t = spr::contrastive_loss(sim_t, pseudo);
  report.l_c = spr::total_contrastive(report.l_s, report.l_t);
  report.pixel_count = source_labels.size() + pseudo.size();
  report.masked_count = pseudo.labeled_count();
  const size_t source_count = source_labels.labeled_count();
  report.l_ce_mean = source_count ? report.l_ce / static_cast<double>(source_count) : 0.0;
  report.l_s_mean = source_count ? report.l_s / static_cast<double>(source_count) : 0.0;
  report.l_t_mean =
      report.masked_count ? report.l_t / static_cast<double>(report.masked_count) : 0.0;

  json out;
  out["l_ce"] = report.l_ce;
  out["l_s"] = report.l_s;
  out["l_t"] = report.l_t;
  out["l_c"] = report.l_c;
  out["l_ce_mean"] = report.l_ce_mean;
  out["l_s_mean"] = report.l_s_mean;
  out["l_t_mean"] = report.l_t_mean;
  out["pixel_count"] = report.pixel_count;
  out["masked_count"] = report.masked_count;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& params_path, const std::string& domain_name) {
  const spr::ConfigFile cfg = load_config(opts);
  const spr::toy::ToyDomainConfig domain = domain_config(cfg, opts);
  const spr::toy::DomainPair pair = spr::toy::generate_domain_pair(domain);
  const spr::toy::ClassifierParams params = spr::toy::read_params(params_path);
  const spr::toy::DomainData& data =
      (domain_name == "source") ? pair.source : pair.target;
  const spr::toy::Metrics metrics = spr::toy::evaluate(params, data);
  std::cout << spr::toy::metrics_json(metrics).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured prototype regularization toolkit"};
  app.require_subcommand(1);

  CommonOpts gen_opts, src_opts, spr_opts, st_opts, eval_opts;
  HyperOverrides spr_hyper, st_hyper;

  auto add_common = [](CLI::App* cmd, CommonOpts& opts, bool needs_out) {
    cmd->add_option("--config", opts.config_path, "experiment config file")->required();
    if (needs_out) cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed_override, "dataset seed override (all randomness)");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic domain pair");
  add_common(gen, gen_opts, true);

  CLI::App* train_source =
      app.add_subcommand("train-source", "supervised training on the source domain");
  add_common(train_source, src_opts, true);

  CLI::App* train_spr = app.add_subcommand(
      "train-spr", "adaptation with structured prototype regularization");
  add_common(train_spr, spr_opts, true);
  std::string spr_params_path;
  bool spr_dump_protos = false;
  train_spr->add_option("--params", spr_params_path,
                        "initial classifier parameters (train-source output)");
  train_spr->add_flag("--dump-protos", spr_dump_protos,
                      "write final P_s/P_t/P_h/P_r tensors");
  add_hyper_flags(train_spr, spr_hyper);

  CLI::App* self_train = app.add_subcommand("self-train", "self-training refinement stage");
  add_common(self_train, st_opts, true);
  std::string st_params_path;
  self_train->add_option("--params", st_params_path, "classifier parameters (train-spr output)")
      ->required();
  add_hyper_flags(self_train, st_hyper);

  CLI::App* filter = app.add_subcommand(
      "filter", "entropy-based reliability filtering and pseudo labels");
  std::string filter_logits, filter_protos, filter_out_labels, filter_out_entropy,
      filter_out_weights;
  double filter_alpha = 0.8;
  filter->add_option("--logits", filter_logits, "pixel logits tensor (SPRT)")->required();
  filter->add_option("--protos", filter_protos, "prototype matrix P_r (SPRT)")->required();
  filter->add_option("--alpha", filter_alpha, "reliable low-entropy fraction (α)");
  filter->add_option("--out-labels", filter_out_labels, "pseudo-label map output");
  filter->add_option("--out-entropy", filter_out_entropy, "entropy map output");
  filter->add_option("--out-weights", filter_out_weights, "attention weight output");

  CLI::App* structure = app.add_subcommand(
      "structure", "inter/intra-class regularization of a prototype matrix");
  std::string structure_protos, structure_valid, structure_out;
  double structure_eps = spr::kDefaultEpsilon, structure_le = 0.1, structure_la = 0.1;
  bool structure_decoupled = false;
  structure->add_option("--protos", structure_protos, "blended prototype matrix P_h (SPRT)")
      ->required();
  structure->add_option("--valid", structure_valid, "validity sidecar for P_h");
  structure->add_option("--eps", structure_eps, "normalization guard constant (ε)");
  structure->add_option("--lambda-e", structure_le, "inter-class strength (λ_e)");
  structure->add_option("--lambda-a", structure_la, "intra-class strength (λ_a)");
  structure->add_flag("--decoupled", structure_decoupled,
                      "use global CxC and DxD correlation matrices");
  structure->add_option("--out", structure_out, "regularized prototypes P_r output");

  CLI::App* losses = app.add_subcommand("losses", "loss report for a fixture");
  std::string losses_src, losses_src_labels, losses_tgt, losses_protos, losses_src_embed,
      losses_tgt_embed;
  double losses_tau = 1.0, losses_alpha = 0.8;
  losses->add_option("--source-logits", losses_src, "source logits (SPRT)")->required();
  losses->add_option("--source-labels", losses_src_labels, "source label map")->required();
  losses->add_option("--target-logits", losses_tgt, "target logits (SPRT)")->required();
  losses->add_option("--protos", losses_protos, "prototype matrix P_r")->required();
  losses->add_option("--source-embedding", losses_src_embed,
                     "optional source embedding when prototypes are not in logit space");
  losses->add_option("--target-embedding", losses_tgt_embed, "optional target embedding");
  losses->add_option("--tau", losses_tau, "similarity temperature (τ)");
  losses->add_option("--alpha", losses_alpha, "reliable fraction for pseudo labels (α)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate saved parameters on a domain");
  add_common(eval, eval_opts, false);
  std::string eval_params, eval_domain = "target";
  eval->add_option("--params", eval_params, "classifier parameters (JSON)")->required();
  eval->add_option("--domain", eval_domain, "source or target")
      ->check(CLI::IsMember({"source", "target"}));

  CLI::App* acceptance = app.add_subcommand("acceptance", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_opts);
    if (train_source->parsed()) return cmd_train_source(src_opts);
    if (train_spr->parsed())
      return cmd_train_spr(spr_opts, spr_hyper, spr_params_path, spr_dump_protos);
    if (self_train->parsed()) return cmd_self_train(st_opts, st_hyper, st_params_path);
    if (filter->parsed())
      return cmd_filter(filter_logits, filter_protos, filter_alpha, filter_out_labels,
                        filter_out_entropy, filter_out_weights);
    if (structure->parsed())
      return cmd_structure(structure_protos, structure_valid, structure_eps, structure_le,
                           structure_la, structure_decoupled, structure_out);
    if (losses->parsed())
      return cmd_losses(losses_src, losses_src_labels, losses_tgt, losses_protos,
                        losses_src_embed, losses_tgt_embed, losses_tau, losses_alpha);
    if (eval->parsed()) return cmd_eval(eval_opts, eval_params, eval_domain);
    if (acceptance->parsed()) return spr::acceptance::run_acceptance(std::cout) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    spr::log_error(e.what());
    return 2;
  }
  return 1;
}
