// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ncn/boundary.hpp"
#include "ncn/checkpoint.hpp"
#include "ncn/kernel.hpp"
#include "ncn/layer.hpp"
#include "ncn/network.hpp"
#include "ncn/oracle.hpp"
#include "ncn_cli.hpp"

namespace {

using namespace ncn;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ". " << name << " - " << o.detail
            << std::endl;
  if (!o.pass) ++failures;
}

constexpr int kSeeds = 10;
constexpr int kRequiredSeeds = 5;
constexpr double kMaxSecondsPerSeed = 5.0;

Outcome seed_ensemble(const TrainConfig& base, const Dataset& ds, std::uint64_t* first_success) {
  int successes = 0;
  double slowest = 0.0;
  std::ostringstream per_seed;
  for (int seed = 0; seed < kSeeds; ++seed) {
    TrainConfig c = base;
    c.seed = static_cast<std::uint64_t>(seed);
    const auto start = std::chrono::steady_clock::now();
    const TrainResult r = train(c, ds);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    slowest = std::max(slowest, secs);
    const bool ok = oracle::exhaustive_eval(r.net, ds) == 1.0;
    if (ok && successes++ == 0 && first_success) *first_success = c.seed;
    per_seed << (ok ? '1' : '0');
  }
  std::ostringstream d;
  d << successes << "/" << kSeeds << " seeds at accuracy 1.0 (need >= " << kRequiredSeeds
    << "), per-seed " << per_seed.str() << ", slowest seed " << slowest << " s (limit "
    << kMaxSecondsPerSeed << " s)";
  return {successes >= kRequiredSeeds && slowest < kMaxSecondsPerSeed, d.str()};
}

Outcome xor_reproduction(std::uint64_t* converged_seed) {
  TrainConfig c;
  c.topology = {2, 4, 2};
  c.learning_rate = 0.001;
  c.momentum = 0.9;
  c.epochs = 1000;
  c.channel_semantics = ChannelSemantics::algorithm1;
  return seed_ensemble(c, make_xor(), converged_seed);
}

Outcome majority_reproduction() {
  TrainConfig c;
  c.topology = {3, 8, 2};
  c.learning_rate = 0.001;
  c.momentum = 0.9;
  c.epochs = 200;
  c.channel_semantics = ChannelSemantics::algorithm1;
  return seed_ensemble(c, make_majority(3), nullptr);
}

Outcome table1_audit() {
  bool ok = true;
  std::ostringstream d;
  for (const Topology& t : {Topology{1, 1}, Topology{2, 4, 2}, Topology{3, 8, 2}, Topology{1024, 1}}) {
    const Network net = init_network(t, 0);
    const Table1Counts live = oracle::measure_forward(net).table1_view();
    const Table1Counts predicted = oracle::predict_op_budget(t, oracle::Arch::ncn).as_table1();
    OpTally dense;
    (void)oracle::dense_forward(oracle::make_dense_reference(t, 0),
                                std::vector<double>(t.front(), 1.0), dense);
    std::uint64_t dm = 0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) dm += t[k] * t[k + 1];
    const bool row_ok = live == predicted && live.fmul == 0 && dense.fmul == dm &&
                        dense.table1_view() ==
                            oracle::predict_op_budget(t, oracle::Arch::ffnn).as_table1();
    ok = ok && row_ok;
    d << topology_to_string(t) << (row_ok ? " ok" : " MISMATCH") << " (live " << live
      << ", ffnn fmul " << dense.fmul << "); ";
  }
  return {ok, d.str()};
}

Outcome gradient_oracle() {
  constexpr std::size_t kTriples = 1000;
  constexpr double kTolerance = 1e-4;
  std::size_t compared = 0, rejected = 0;
  double worst = 0.0;
  std::string where;
  std::uint64_t seed = 100;
  const std::vector<Topology> topologies{{2, 4, 2}, {3, 8, 2}, {4, 5, 3}, {2, 3, 3, 2}};
  for (std::size_t k = 0; compared < kTriples; ++k) {
    oracle::GradcheckOptions opt;
    opt.topology = topologies[k % topologies.size()];
    opt.seed = seed++;
    opt.networks = 3;
    opt.semantics = k % 5 == 4 ? ChannelSemantics::equation1 : ChannelSemantics::algorithm1;
    const auto rep = oracle::gradcheck(opt);
    compared += rep.compared;
    rejected += rep.rejected;
    if (rep.max_rel_error > worst) {
      worst = rep.max_rel_error;
      where = topology_to_string(opt.topology) + " " + rep.worst.to_string();
    }
  }
  std::ostringstream d;
  d << compared << " triples (" << rejected << " networks rejected in exclusion zone r=1e-3, h=1e-5)"
    << ", max relative error " << worst << " at " << where << " (limit " << kTolerance << ")";
  return {compared >= kTriples && worst < kTolerance, d.str()};
}

Outcome dead_gradient_escape() {
  bool ok = true;
  std::ostringstream d;
  for (std::size_t dim : {1u, 4u, 9u}) {
    LayerParams p(dim, 1);
    for (std::size_t i = 0; i < dim; ++i) {
      p.widths(0, i) = i == 0 ? 1e-6 : 0.7;
      p.neuro(0, i) = i == 0 ? 2.0 : -0.3;
    }
    std::vector<double> x(dim, 0.5);
    x[0] = 1.0;
    OpTally t;
    const auto trace = layer_forward(p, x, t).second;
    const auto g = layer_backward(p, trace, std::vector<double>{1.0});
    const double expected = 1.0 / std::sqrt(static_cast<double>(dim));
    const double err = std::fabs(g.d_input[0] - expected);
    const bool row_ok = g.d_input[0] != 0.0 && err <= 1e-9;
    ok = ok && row_ok;
    d << "d=" << dim << " dy/dx=" << g.d_input[0] << " (1/sqrt(d)=" << expected << ", err " << err
      << "); ";
  }
  return {ok, d.str()};
}

Outcome kernel_properties() {
  constexpr int kPairs = 100000;
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::uniform_int_distribution<int> pick(0, 19);
  auto draw = [&] {
    switch (pick(rng)) {
      case 0: return 0.0;
      case 1: return std::ldexp(gauss(rng), -40);
      case 2: return std::ldexp(gauss(rng), 40);
      default: return gauss(rng);
    }
  };
  std::map<std::string, int> violations{{"ZERO-MUL", 0}, {"CLAMP", 0}, {"SIGN-PRESERVATION", 0},
                                        {"W-SIGN-INVARIANCE", 0}, {"EXCITATORY-ONLY-WHEN-ALIGNED", 0}};
  OpTally tally;
  for (int k = 0; k < kPairs; ++k) {
    const double x = draw();
    const double p = (k % 50 == 0) ? std::fabs(x) : draw();  // exercise ties
    const double lim = std::min(std::fabs(x), std::fabs(p));
    const double c = channel_transmit(x, p, tally);
    const double b = bypass_transmit(x, p, tally);
    if (std::fabs(c) != lim || std::fabs(b) != lim) ++violations["CLAMP"];
    if (lim > 0 && (b > 0) != (x > 0)) ++violations["SIGN-PRESERVATION"];
    if (bypass_transmit(x, -p, tally) != b) ++violations["W-SIGN-INVARIANCE"];
    if ((c > 0) != (x > 0 && p > 0)) ++violations["EXCITATORY-ONLY-WHEN-ALIGNED"];
  }
  if (tally.fmul != 0) violations["ZERO-MUL"] = static_cast<int>(tally.fmul);
  bool ok = true;
  std::ostringstream d;
  d << kPairs << " pairs:";
  for (const auto& [name, count] : violations) {
    ok = ok && count == 0;
    d << ' ' << name << '=' << (count == 0 ? "ok" : std::to_string(count) + " violations");
  }
  return {ok, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ncn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism(const fs::path& dir) {
  const std::string a = (dir / "det_a.ckpt").string();
  const std::string b = (dir / "det_b.ckpt").string();
  const std::vector<std::string> common{"train", "--topology", "2,4,2", "--learning-rate", "0.001",
                                        "--momentum", "0.9", "--epochs", "1000", "--seed", "7"};
  auto with_out = [&](const std::string& path) {
    auto v = common;
    v.push_back("--out");
    v.push_back(path);
    return v;
  };
  const int ca = run_cli(with_out(a));
  const int cb = run_cli(with_out(b));
  const bool same_files = ca == 0 && cb == 0 && slurp(a) == slurp(b) && !slurp(a).empty();

  const Network net = load_checkpoint(a);
  const std::string c = (dir / "det_c.ckpt").string();
  save_checkpoint(net, c);
  const Network back = load_checkpoint(c);
  bool bit_exact = net.topology() == back.topology();
  for (std::size_t k = 0; bit_exact && k < net.layers.size(); ++k) {
    auto same = [](std::span<const double> x, std::span<const double> y) {
      return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
    };
    bit_exact = same(net.layers[k].widths.flat(), back.layers[k].widths.flat()) &&
                same(net.layers[k].neuro.flat(), back.layers[k].neuro.flat()) &&
                same(net.layers[k].bias, back.layers[k].bias);
  }
  std::ostringstream d;
  d << "two train runs " << (same_files ? "byte-identical" : "DIFFER") << ", save/load "
    << (bit_exact ? "bit-exact" : "NOT bit-exact");
  return {same_files && bit_exact, d.str()};
}

Outcome boundary_artifact(const fs::path& dir, std::uint64_t seed) {
  const std::string model = (dir / "boundary_xor.ckpt").string();
  const std::string csv = (dir / "boundary.csv").string();
  constexpr std::size_t kResolution = 201;  // puts 0 and 1 on the [-0.5, 1.5] lattice
  if (run_cli({"train", "--dataset", "xor", "--seed", std::to_string(seed), "--out", model}) != 0)
    return {false, "training the XOR model failed"};
  if (oracle::exhaustive_eval(load_checkpoint(model), make_xor()) != 1.0)
    return {false, "seed " + std::to_string(seed) + " did not converge"};
  if (run_cli({"boundary", "--model", model, "--grid-min", "-0.5", "--grid-max", "1.5",
               "--resolution", std::to_string(kResolution), "--out", csv}) != 0)
    return {false, "boundary command failed"};

  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  std::map<std::pair<double, double>, int> corners;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string x1, x2, cls;
    std::getline(cells, x1, ',');
    std::getline(cells, x2, ',');
    std::getline(cells, cls, ',');
    const double a = std::stod(x1), b = std::stod(x2);
    if ((a == 0.0 || a == 1.0) && (b == 0.0 || b == 1.0)) corners[{a, b}] = std::stoi(cls);
  }
  const std::map<std::pair<double, double>, int> expected{
      {{0.0, 0.0}, 0}, {{0.0, 1.0}, 1}, {{1.0, 0.0}, 1}, {{1.0, 1.0}, 0}};
  std::ostringstream d;
  d << "seed " << seed << ", " << rows << " rows (expected " << kResolution * kResolution
    << "), corners";
  for (const auto& [pt, cls] : corners) d << " (" << pt.first << "," << pt.second << ")->" << cls;
  return {rows == kResolution * kResolution && corners == expected, d.str()};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "ncn_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::uint64_t xor_seed = 0;
  bool xor_any = false;
  {
    const Outcome o = xor_reproduction(&xor_seed);
    xor_any = o.detail.rfind("0/", 0) != 0;
    report(1, "XOR reproduction (2-4-2, lr 0.001, momentum 0.9, 1000 epochs)", o);
  }
  report(2, "Majority reproduction (3-8-2, 200 epochs)", majority_reproduction());
  report(3, "Table 1 audit, exact", table1_audit());
  report(4, "Gradient oracle (>=1000 triples, rel err < 1e-4)", gradient_oracle());
  report(5, "Dead-gradient escape through the bypass", dead_gradient_escape());
  report(6, "Kernel property suite (1e5 pairs)", kernel_properties());
  report(7, "Determinism and bit-exact checkpoints", determinism(dir));
  if (xor_any)
    report(8, "Boundary artifact corners", boundary_artifact(dir, xor_seed));
  else
    report(8, "Boundary artifact corners", {false, "no converged XOR seed available"});

  fs::remove_all(dir);
  std::cout << (failures == 0 ? "all acceptance criteria passed" : "acceptance FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
