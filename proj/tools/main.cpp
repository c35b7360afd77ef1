// bnem: discrete Bayesian-network parameter estimation from incomplete
// data. Subcommands wrap the library one-to-one; no numerics live here.

#include <cinttypes>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bnem/bounds.hpp"
#include "bnem/dataio.hpp"
#include "bnem/em.hpp"
#include "bnem/errors.hpp"
#include "bnem/estimators.hpp"
#include "bnem/inference.hpp"
#include "bnem/model.hpp"
#include "bnem/oracle.hpp"

namespace {

struct LearnOptions {
  std::string algo = "em";
  std::string network_path;
  std::string data_path;
  std::string out_path;
  std::string trace_path;
  std::string init = "random";
  std::string mstep = "ml";
  double alpha = 1.0;
  int max_iters = 200;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

bnem::ParsedNetwork load_network(const std::string& path) {
  return bnem::parse_network(bnem::read_file(path));
}

bnem::Dataset load_dataset(const std::string& path,
                           const bnem::NetworkStructure& structure) {
  return bnem::parse_dataset(bnem::read_file(path), structure);
}

const bnem::ParameterSet& require_cpts(const bnem::ParsedNetwork& net,
                                       const std::string& path) {
  if (!net.params)
    throw bnem::Error(bnem::ErrorKind::kConfig,
                      "'" + path + "' has no cpt blocks");
  return *net.params;
}

int run_learn(const LearnOptions& opt) {
  const bnem::ParsedNetwork net = load_network(opt.network_path);
  const bnem::Dataset data = load_dataset(opt.data_path, net.structure);
  const bnem::PriorSpec prior =
      bnem::PriorSpec::uniform(net.structure, opt.alpha);

  bnem::ParameterSet learned;
  std::vector<bnem::TraceRow> trace;
  std::string status;

  if (opt.algo == "ml" || opt.algo == "map") {
    const bnem::SufficientStatistics stats =
        bnem::count_complete(net.structure, data);
    const bnem::Estimate estimate = opt.algo == "ml"
                                        ? bnem::ml_estimate(stats)
                                        : bnem::map_estimate(stats, prior);
    learned = estimate.params;
    status = opt.algo + " estimate from " +
             std::to_string(data.record_count()) + " complete records";
    if (!estimate.uniform_rows.empty())
      status += " (" + std::to_string(estimate.uniform_rows.size()) +
                " unsupported rows set uniform)";
  } else {
    bnem::LearnConfig config;
    config.algorithm = opt.algo == "them" ? bnem::Algorithm::kThresholdEm
                                          : bnem::Algorithm::kEm;
    config.max_iterations = opt.max_iters;
    config.param_tolerance = opt.tol;
    config.init = opt.init == "uniform" ? bnem::InitMode::kUniform
                                        : bnem::InitMode::kRandomSimplex;
    config.seed = opt.seed;
    config.m_step = opt.mstep == "pmean" ? bnem::MStepKind::kPosteriorMean
                                         : bnem::MStepKind::kMaximumLikelihood;
    config.prior = prior;

    bnem::LearnResult result;
    if (config.algorithm == bnem::Algorithm::kThresholdEm) {
      const bnem::ParameterBounds bounds =
          bnem::compute_bounds(net.structure, data, prior);
      result = bnem::run(net.structure, data, config, &bounds);
    } else {
      result = bnem::run(net.structure, data, config);
    }
    learned = std::move(result.params);
    trace = std::move(result.trace);
    status = opt.algo + (result.converged ? " converged after "
                                          : " stopped unconverged after ") +
             std::to_string(result.iterations_used) + " iterations";
  }

  std::vector<std::string> comments = {
      "learned by: bnem learn --algo " + opt.algo + " --alpha " +
      bnem::format_double(opt.alpha) + " --seed " + std::to_string(opt.seed)};
  bnem::write_file_atomic(
      opt.out_path, bnem::serialize_network(net.structure, &learned, comments));
  if (!opt.trace_path.empty())
    bnem::write_file_atomic(opt.trace_path, bnem::serialize_trace(trace));

  const bnem::DatasetLogLikelihood ll =
      bnem::dataset_log_likelihood(net.structure, learned, data);
  std::printf("%s\n", status.c_str());
  std::printf("observed-data log-likelihood: %.17g\n", ll.value);
  std::printf("parameters written to %s\n", opt.out_path.c_str());
  if (!opt.trace_path.empty())
    std::printf("trace written to %s\n", opt.trace_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete Bayesian-network parameter learning from incomplete data"};
  app.require_subcommand(1);

  LearnOptions learn_opt;
  CLI::App* learn = app.add_subcommand(
      "learn", "estimate parameters (em, them, ml or map)");
  learn->add_option("--algo", learn_opt.algo, "algorithm")
      ->check(CLI::IsMember({"em", "them", "ml", "map"}))
      ->capture_default_str();
  learn->add_option("--network", learn_opt.network_path, "network file")
      ->required();
  learn->add_option("--data", learn_opt.data_path, "dataset CSV")->required();
  learn->add_option("--alpha", learn_opt.alpha,
                    "uniform Dirichlet hyperparameter")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  learn->add_option("--max-iters", learn_opt.max_iters, "iteration cap")
      ->capture_default_str();
  learn->add_option("--tol", learn_opt.tol, "parameter-change tolerance")
      ->capture_default_str();
  learn->add_option("--init", learn_opt.init, "initialization")
      ->check(CLI::IsMember({"random", "uniform"}))
      ->capture_default_str();
  learn->add_option("--mstep", learn_opt.mstep, "m-step estimator")
      ->check(CLI::IsMember({"ml", "pmean"}))
      ->capture_default_str();
  learn->add_option("--seed", learn_opt.seed, "PRNG seed")
      ->capture_default_str();
  learn->add_option("--out", learn_opt.out_path, "output network file")
      ->required();
  learn->add_option("--trace", learn_opt.trace_path, "per-iteration trace CSV");

  struct {
    std::string network_path, data_path, out_path;
    double alpha = 1.0;
  } bounds_opt;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "per-parameter probability intervals from the data");
  bounds->add_option("--network", bounds_opt.network_path)->required();
  bounds->add_option("--data", bounds_opt.data_path)->required();
  bounds->add_option("--alpha", bounds_opt.alpha)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  bounds->add_option("--out", bounds_opt.out_path)->required();

  struct {
    std::string network_path, out_path;
    int n = 0;
    std::uint64_t seed = 0;
  } sample_opt;
  CLI::App* sample =
      app.add_subcommand("sample", "forward-sample complete records");
  sample->add_option("--network", sample_opt.network_path)->required();
  sample->add_option("--n", sample_opt.n, "record count")->required();
  sample->add_option("--seed", sample_opt.seed)->capture_default_str();
  sample->add_option("--out", sample_opt.out_path)->required();

  struct {
    std::string network_path, data_path, out_path;
    double rate = 0.0;
    std::uint64_t seed = 0;
  } mask_opt;
  CLI::App* mask =
      app.add_subcommand("mask", "hide cells completely at random");
  mask->add_option("--data", mask_opt.data_path)->required();
  mask->add_option("--network", mask_opt.network_path)->required();
  mask->add_option("--rate", mask_opt.rate, "per-cell missingness probability")
      ->required();
  mask->add_option("--seed", mask_opt.seed)->capture_default_str();
  mask->add_option("--out", mask_opt.out_path)->required();

  struct {
    std::string network_path, data_path;
  } loglik_opt;
  CLI::App* loglik = app.add_subcommand(
      "loglik", "observed-data log-likelihood of a dataset");
  loglik->add_option("--network", loglik_opt.network_path)->required();
  loglik->add_option("--data", loglik_opt.data_path)->required();

  struct {
    std::string network_path, out_path;
    int records = 200;
    double rate = 0.3716;
    int trials = 20;
    std::uint64_t seed = 0;
  } compare_opt;
  CLI::App* compare = app.add_subcommand(
      "compare", "paired EM vs threshold-EM trials on sampled data");
  compare->add_option("--network", compare_opt.network_path)->required();
  compare->add_option("--records", compare_opt.records)->capture_default_str();
  compare->add_option("--rate", compare_opt.rate)->capture_default_str();
  compare->add_option("--trials", compare_opt.trials)->capture_default_str();
  compare->add_option("--seed", compare_opt.seed)->capture_default_str();
  compare->add_option("--out", compare_opt.out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    std::fprintf(stderr, "%s", app.help().c_str());
    return 2;
  }

  try {
    if (learn->parsed()) return run_learn(learn_opt);

    if (bounds->parsed()) {
      const bnem::ParsedNetwork net = load_network(bounds_opt.network_path);
      const bnem::Dataset data = load_dataset(bounds_opt.data_path, net.structure);
      const bnem::ParameterBounds computed = bnem::compute_bounds(
          net.structure, data,
          bnem::PriorSpec::uniform(net.structure, bounds_opt.alpha));
      std::vector<std::string> comments = {
          "bounds from " + std::to_string(data.record_count()) +
          " records, alpha " + bnem::format_double(bounds_opt.alpha)};
      bnem::write_file_atomic(
          bounds_opt.out_path,
          bnem::serialize_bounds(net.structure, computed, comments));
      std::printf("bounds written to %s\n", bounds_opt.out_path.c_str());
      return 0;
    }

    if (sample->parsed()) {
      const bnem::ParsedNetwork net = load_network(sample_opt.network_path);
      const bnem::Dataset data =
          bnem::forward_sample(net.structure,
                               require_cpts(net, sample_opt.network_path),
                               sample_opt.n, sample_opt.seed);
      std::vector<std::string> comments = {
          "forward_sample n=" + std::to_string(sample_opt.n) + " seed=" +
          std::to_string(sample_opt.seed) +
          "; record l drawn from splitmix64 stream (seed, l)"};
      bnem::write_file_atomic(
          sample_opt.out_path,
          bnem::serialize_dataset(net.structure, data, comments));
      std::printf("%d records written to %s\n", data.record_count(),
                  sample_opt.out_path.c_str());
      return 0;
    }

    if (mask->parsed()) {
      const bnem::ParsedNetwork net = load_network(mask_opt.network_path);
      const bnem::Dataset data = load_dataset(mask_opt.data_path, net.structure);
      const bnem::Dataset masked =
          bnem::mask_mcar(data, mask_opt.rate, mask_opt.seed);
      std::vector<std::string> comments = {
          "mask_mcar rate=" + bnem::format_double(mask_opt.rate) + " seed=" +
          std::to_string(mask_opt.seed) +
          "; record l masked from splitmix64 stream (seed, l)"};
      bnem::write_file_atomic(
          mask_opt.out_path,
          bnem::serialize_dataset(net.structure, masked, comments));
      std::printf("masked dataset written to %s (missingness %.17g)\n",
                  mask_opt.out_path.c_str(), bnem::missingness_rate(masked));
      return 0;
    }

    if (loglik->parsed()) {
      const bnem::ParsedNetwork net = load_network(loglik_opt.network_path);
      const bnem::Dataset data = load_dataset(loglik_opt.data_path, net.structure);
      const bnem::DatasetLogLikelihood ll = bnem::dataset_log_likelihood(
          net.structure, require_cpts(net, loglik_opt.network_path), data);
      std::printf("%.17g\n", ll.value);
      return 0;
    }

    if (compare->parsed()) {
      const bnem::ParsedNetwork net = load_network(compare_opt.network_path);
      bnem::CompareConfig config;
      config.record_count = compare_opt.records;
      config.mask_rate = compare_opt.rate;
      config.trials = compare_opt.trials;
      config.seed = compare_opt.seed;
      const std::vector<bnem::TrialSummary> summary = bnem::compare_runs(
          net.structure, require_cpts(net, compare_opt.network_path), config);
      bnem::write_file_atomic(compare_opt.out_path,
                              bnem::serialize_summary(summary));
      int faster = 0;
      for (const bnem::TrialSummary& row : summary)
        if (row.them_iters < row.em_iters) ++faster;
      std::printf("%d trials written to %s\n", compare_opt.trials,
                  compare_opt.out_path.c_str());
      if (!summary.empty())
        std::printf("threshold-EM converged in fewer iterations in %d/%zu trials\n",
                    faster, summary.size());
      return 0;
    }
  } catch (const bnem::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
