#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ncn/boundary.hpp"
#include "ncn/checkpoint.hpp"
#include "ncn/config.hpp"
#include "ncn/dataset.hpp"
#include "ncn/error.hpp"
#include "ncn/format.hpp"
#include "ncn/network.hpp"
#include "ncn/oracle.hpp"

namespace ncn::cli {

/// Flag values kept as text so they go through the same validation as
/// config-file values.
struct Overrides {
  std::optional<std::string> topology, learning_rate, momentum, epochs, seed, dataset,
      channel_semantics, out, grid_min, grid_max, resolution;

  void add_train_flags(CLI::App& cmd) {
    cmd.add_option("--topology", topology, "layer sizes, e.g. 2,4,2");
    cmd.add_option("--learning-rate", learning_rate, "SGD learning rate");
    cmd.add_option("--momentum", momentum, "momentum coefficient in [0, 1)");
    cmd.add_option("--epochs", epochs, "full-batch epochs");
    cmd.add_option("--seed", seed, "initialisation seed");
    cmd.add_option("--dataset", dataset, "xor, majority<k> or csv:<path>");
    cmd.add_option("--channel-semantics", channel_semantics, "algorithm1 or equation1");
    cmd.add_option("--out", out, "checkpoint path");
  }

  void add_grid_flags(CLI::App& cmd) {
    cmd.add_option("--grid-min", grid_min, "lower grid bound (both axes)");
    cmd.add_option("--grid-max", grid_max, "upper grid bound (both axes)");
    cmd.add_option("--resolution", resolution, "lattice points per axis");
  }

  void apply(RunConfig& cfg) const {
    const std::pair<const char*, const std::optional<std::string>*> entries[] = {
        {"topology", &topology},   {"learning_rate", &learning_rate},
        {"momentum", &momentum},   {"epochs", &epochs},
        {"seed", &seed},           {"dataset", &dataset},
        {"channel_semantics", &channel_semantics},
        {"out", &out},             {"grid_min", &grid_min},
        {"grid_max", &grid_max},   {"resolution", &resolution}};
    for (const auto& [key, value] : entries)
      if (*value) apply_config_value(cfg, key, **value);
  }
};

inline RunConfig resolve_config(const std::string& config_path, const Overrides& overrides) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  overrides.apply(cfg);
  return cfg;
}

inline std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

inline void write_history(const std::string& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "epoch,loss,accuracy\n";
  for (const auto& h : history)
    out << h.epoch << ',' << format_exact(h.loss) << ',' << format_short(h.accuracy) << '\n';
  if (!out) throw IoError("failed writing history '" + path + "'");
}

inline int cmd_train(const RunConfig& cfg, const std::string& history_path, std::ostream& out,
                     std::ostream& err) {
  cfg.train.validate();
  const Dataset ds = resolve_dataset(cfg.train.dataset);
  const TrainResult result = train(cfg.train, ds);
  save_checkpoint(result.net, cfg.out);
  const std::string history = history_path.empty() ? cfg.out + ".history.csv" : history_path;
  write_history(history, result.history);
  err << "trained " << topology_to_string(cfg.train.topology) << " on " << cfg.train.dataset
      << " for " << cfg.train.epochs << " epochs (seed " << cfg.train.seed << "); checkpoint "
      << cfg.out << ", history " << history << '\n';
  out << "final_loss=" << format_exact(result.history.back().loss) << '\n';
  out << "accuracy=" << fixed4(result.final_accuracy) << '\n';
  return 0;
}

inline int cmd_eval(const std::string& model_path, const std::string& selector, std::ostream& out,
                    std::ostream& err) {
  const Network net = load_checkpoint(model_path);
  const Dataset ds = resolve_dataset(selector);
  if (ds.input_dim != net.input_dim())
    throw ShapeError("model " + model_path + " takes " + std::to_string(net.input_dim()) +
                     " inputs but dataset " + selector + " has " + std::to_string(ds.input_dim));
  out << "row,input,target,predicted,p1\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const auto logits = forward_logits(net, ds.inputs[r]);
    out << r << ',';
    for (std::size_t i = 0; i < ds.input_dim; ++i)
      out << (i ? " " : "") << format_short(ds.inputs[r][i]);
    out << ',' << ds.targets[r] << ',' << argmax(logits) << ','
        << (logits.size() > 1 ? fixed4(softmax(logits)[1]) : std::string("nan")) << '\n';
  }
  const double acc = oracle::exhaustive_eval(net, ds);
  err << "evaluated " << ds.size() << " rows of " << selector << '\n';
  out << "accuracy=" << fixed4(acc) << '\n';
  return 0;
}

inline int cmd_count_ops(const std::string& topology_text, const std::string& model_path,
                         std::ostream& out, std::ostream& err) {
  if (topology_text.empty() == model_path.empty())
    throw ConfigError("count-ops needs exactly one of --topology or --model");
  const Network net = model_path.empty() ? init_network(parse_topology(topology_text), 0)
                                         : load_checkpoint(model_path);
  const Topology topology = net.topology();
  const Table1Counts predicted = oracle::predict_op_budget(topology, oracle::Arch::ncn).as_table1();
  const Table1Counts live = oracle::measure_forward(net).table1_view();
  const Table1Counts ffnn_predicted =
      oracle::predict_op_budget(topology, oracle::Arch::ffnn).as_table1();
  OpTally ffnn_tally;
  {
    const auto dense = oracle::make_dense_reference(topology, 0);
    std::vector<double> x(topology.front(), 1.0);
    (void)oracle::dense_forward(dense, x, ffnn_tally);
  }
  const Table1Counts ffnn_live = ffnn_tally.table1_view();

  out << "topology=" << topology_to_string(topology) << '\n';
  out << "op,ncn_predicted,ncn_live,ffnn\n";
  auto row = [&](const char* name, auto member) {
    out << name << ',' << predicted.*member << ',' << live.*member << ',' << ffnn_live.*member
        << '\n';
  };
  row("fmul", &Table1Counts::fmul);
  row("fadd", &Table1Counts::fadd);
  row("compare", &Table1Counts::compare);
  row("mux", &Table1Counts::mux);
  row("bias_add", &Table1Counts::bias_add);
  row("scaling", &Table1Counts::scaling);

  if (!(predicted == live))
    throw AuditError("audit failed: live NCN tally does not match the predicted budget");
  if (!(ffnn_predicted == ffnn_live))
    throw AuditError("audit failed: dense reference tally does not match its predicted budget");
  err << "audit ok: live tally matches the predicted budget\n";
  out << "audit=ok\n";
  return 0;
}

inline int cmd_boundary(const std::string& model_path, const RunConfig& cfg,
                        const std::string& csv_path, const std::string& svg_path,
                        std::ostream& out, std::ostream& err) {
  const Network net = load_checkpoint(model_path);
  const auto points = boundary_scan(net, cfg.grid);
  {
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw IoError("cannot open '" + csv_path + "' for writing");
    write_boundary_csv(csv, points);
    if (!csv) throw IoError("failed writing '" + csv_path + "'");
  }
  if (!svg_path.empty()) {
    std::ofstream svg(svg_path, std::ios::trunc);
    if (!svg) throw IoError("cannot open '" + svg_path + "' for writing");
    write_boundary_svg(svg, points, cfg.grid, make_xor());
    if (!svg) throw IoError("failed writing '" + svg_path + "'");
  }
  err << "wrote " << points.size() << " lattice points to " << csv_path << '\n';
  out << "points=" << points.size() << '\n';
  return 0;
}

/// Test fixture: a backward pass with a wrong neurotransmitter gradient.
inline NetworkGrads faulty_backward(const Network& net, const std::vector<ForwardTrace>& traces,
                                    std::span<const double> dlogits) {
  NetworkGrads g = backward_full(net, traces, dlogits);
  for (auto& l : g)
    for (double& v : l.d_neuro.flat()) v *= 1.5;
  return g;
}

inline int cmd_gradcheck(const oracle::GradcheckOptions& opt, double tolerance, bool inject_fault,
                         std::ostream& out, std::ostream& err) {
  if (!(tolerance > 0.0)) throw ConfigError("--tolerance must be positive");
  const auto report = inject_fault ? oracle::gradcheck(opt, faulty_backward)
                                   : oracle::gradcheck(opt);
  err << "compared " << report.compared << " coordinates over " << report.networks
      << " networks (" << report.rejected << " rejected inside the exclusion zone)\n";
  out << "max_rel_error=" << format_exact(report.max_rel_error) << '\n';
  if (report.max_rel_error >= tolerance) {
    out << "worst=" << report.worst.to_string() << " analytic=" << format_exact(report.worst_analytic)
        << " numeric=" << format_exact(report.worst_numeric) << '\n';
    throw AuditError("gradcheck failed: max relative error " + format_exact(report.max_rel_error) +
                     " at " + report.worst.to_string());
  }
  return 0;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neuro-Channel Network trainer and auditor", "ncn"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string config_path, history_path, model_path, dataset_sel, topology_text, csv_path,
      svg_path;
  oracle::GradcheckOptions gc;
  std::string gc_topology = "2,4,2";
  std::string gc_semantics = "algorithm1";
  double tolerance = 1e-4;
  bool inject_fault = false;

  auto* train_cmd = app.add_subcommand("train", "train a network and write a checkpoint");
  train_cmd->add_option("--config", config_path, "key = value config file");
  train_cmd->add_option("--history", history_path, "history CSV path (default <out>.history.csv)");
  overrides.add_train_flags(*train_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--model", model_path, "checkpoint path")->required();
  eval_cmd->add_option("--dataset", dataset_sel, "xor, majority<k> or csv:<path>")->required();

  auto* ops_cmd = app.add_subcommand("count-ops", "audit forward-pass operation counts");
  ops_cmd->add_option("--topology", topology_text, "layer sizes, e.g. 2,4,2");
  ops_cmd->add_option("--model", model_path, "checkpoint path");

  auto* boundary_cmd = app.add_subcommand("boundary", "sample the decision boundary of a 2-input model");
  boundary_cmd->add_option("--model", model_path, "checkpoint path")->required();
  boundary_cmd->add_option("--config", config_path, "key = value config file (grid keys)");
  boundary_cmd->add_option("--out", csv_path, "boundary CSV path")->required();
  boundary_cmd->add_option("--svg", svg_path, "optional SVG raster path");
  overrides.add_grid_flags(*boundary_cmd);

  auto* gc_cmd = app.add_subcommand("gradcheck", "compare backprop against finite differences");
  gc_cmd->add_option("--topology", gc_topology, "layer sizes, e.g. 2,4,2");
  gc_cmd->add_option("--seed", gc.seed, "sampling seed");
  gc_cmd->add_option("--tolerance", tolerance, "maximum allowed relative error");
  gc_cmd->add_option("--networks", gc.networks, "random networks to sample");
  gc_cmd->add_option("--channel-semantics", gc_semantics, "algorithm1 or equation1");
  gc_cmd->add_flag("--inject-backward-fault", inject_fault, "use a deliberately wrong backward")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::config);
  }

  try {
    if (train_cmd->parsed())
      return cmd_train(resolve_config(config_path, overrides), history_path, out, err);
    if (eval_cmd->parsed()) return cmd_eval(model_path, dataset_sel, out, err);
    if (ops_cmd->parsed()) return cmd_count_ops(topology_text, model_path, out, err);
    if (boundary_cmd->parsed())
      return cmd_boundary(model_path, resolve_config(config_path, overrides), csv_path, svg_path,
                          out, err);
    if (gc_cmd->parsed()) {
      gc.topology = parse_topology(gc_topology);
      gc.semantics = parse_channel_semantics(gc_semantics);
      if (gc.networks == 0) throw ConfigError("--networks must be at least 1");
      return cmd_gradcheck(gc, tolerance, inject_fault, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  }
  return static_cast<int>(ExitCode::config);
}

}  // namespace ncn::cli
