#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "bnem/bounds.hpp"
#include "bnem/dataio.hpp"
#include "bnem/em.hpp"
#include "bnem/inference.hpp"
#include "test_support.hpp"

using namespace bnem;

namespace {

const std::string kCli = BNEM_CLI_PATH;
const std::string kFixtures = BNEM_FIXTURE_DIR;

std::string work_dir() {
  static const std::string dir = [] {
    std::string d = "/tmp/bnem_cli_test_" + std::to_string(::getpid());
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

struct CommandResult {
  int exit_code;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  const std::string out_path = work_dir() + "/stdout.txt";
  const std::string command = kCli + " " + args + " >" + out_path + " 2>&1";
  const int status = std::system(command.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.output = read_file(out_path);
  return result;
}

}  // namespace

TEST_CASE("learn them writes normalized parameters and a trace") {
  const std::string params_path = work_dir() + "/params.net";
  const std::string trace_path = work_dir() + "/trace.csv";
  const CommandResult result = run_cli(
      "learn --algo them --network " + kFixtures + "/ab.net --data " +
      kFixtures + "/d4.csv --alpha 1 --seed 7 --out " + params_path +
      " --trace " + trace_path);
  REQUIRE(result.exit_code == 0);

  const ParsedNetwork net = parse_network(read_file(params_path));
  REQUIRE(net.params.has_value());
  for (const Eigen::ArrayXXd& table : net.params->tables)
    for (Eigen::Index j = 0; j < table.rows(); ++j)
      CHECK(table.row(j).sum() == doctest::Approx(1.0).epsilon(1e-9));

  const std::string trace = read_file(trace_path);
  CHECK(trace.find("iteration,observed_loglik") == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') >= 2);  // header + 1 row
}

TEST_CASE("bounds reproduces the D4 interval and matches the library bytes") {
  const std::string out_path = work_dir() + "/bounds.txt";
  const CommandResult result =
      run_cli("bounds --network " + kFixtures + "/ab.net --data " + kFixtures +
              "/d4.csv --alpha 1 --out " + out_path);
  REQUIRE(result.exit_code == 0);

  const ParsedNetwork net = parse_network(read_file(kFixtures + "/ab.net"));
  const ParameterBounds parsed =
      parse_bounds(read_file(out_path), net.structure);
  CHECK(parsed.lower[1](0, 0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(parsed.upper[1](0, 0) == doctest::Approx(0.75).epsilon(1e-12));

  // Same inputs through the library produce the identical file.
  const Dataset d4 =
      parse_dataset(read_file(kFixtures + "/d4.csv"), net.structure);
  const ParameterBounds direct =
      compute_bounds(net.structure, d4, PriorSpec::uniform(net.structure, 1.0));
  const std::vector<std::string> comments = {"bounds from 4 records, alpha 1"};
  CHECK(read_file(out_path) ==
        serialize_bounds(net.structure, direct, comments));
}

TEST_CASE("usage errors exit with status 2") {
  const CommandResult missing_required = run_cli("learn --algo them");
  CHECK(missing_required.exit_code == 2);
  CHECK(missing_required.output.find("--network") != std::string::npos);

  const CommandResult no_subcommand = run_cli("");
  CHECK(no_subcommand.exit_code == 2);

  const CommandResult bad_value = run_cli(
      "learn --algo nonsense --network x --data y --out z");
  CHECK(bad_value.exit_code == 2);
}

TEST_CASE("domain errors exit with status 1") {
  const CommandResult incomplete = run_cli(
      "learn --algo ml --network " + kFixtures + "/ab.net --data " + kFixtures +
      "/d4.csv --out " + work_dir() + "/unused.net");
  CHECK(incomplete.exit_code == 1);
  CHECK(incomplete.output.find("missing") != std::string::npos);

  const CommandResult no_file = run_cli(
      "loglik --network /nonexistent.net --data " + kFixtures + "/d4.csv");
  CHECK(no_file.exit_code == 1);
}

TEST_CASE("loglik prints the library value at 17 significant digits") {
  const std::string data_path = work_dir() + "/complete.csv";
  const CommandResult sampled =
      run_cli("sample --network " + kFixtures + "/ab.net --n 25 --seed 9 --out " +
              data_path);
  REQUIRE(sampled.exit_code == 0);

  const CommandResult result = run_cli(
      "loglik --network " + kFixtures + "/ab.net --data " + data_path);
  REQUIRE(result.exit_code == 0);

  const ParsedNetwork net = parse_network(read_file(kFixtures + "/ab.net"));
  const Dataset data = parse_dataset(read_file(data_path), net.structure);
  const DatasetLogLikelihood expected =
      dataset_log_likelihood(net.structure, *net.params, data);
  CHECK(std::stod(result.output) == expected.value);
}

TEST_CASE("sample and mask are byte-identical across identical invocations") {
  const std::string first = work_dir() + "/s1.csv";
  const std::string second = work_dir() + "/s2.csv";
  REQUIRE(run_cli("sample --network " + kFixtures +
                  "/ab.net --n 40 --seed 21 --out " + first)
              .exit_code == 0);
  REQUIRE(run_cli("sample --network " + kFixtures +
                  "/ab.net --n 40 --seed 21 --out " + second)
              .exit_code == 0);
  CHECK(read_file(first) == read_file(second));

  const std::string masked1 = work_dir() + "/m1.csv";
  const std::string masked2 = work_dir() + "/m2.csv";
  REQUIRE(run_cli("mask --data " + first + " --network " + kFixtures +
                  "/ab.net --rate 0.4 --seed 3 --out " + masked1)
              .exit_code == 0);
  REQUIRE(run_cli("mask --data " + first + " --network " + kFixtures +
                  "/ab.net --rate 0.4 --seed 3 --out " + masked2)
              .exit_code == 0);
  CHECK(read_file(masked1) == read_file(masked2));
}

TEST_CASE("sample output is byte-identical to the library serialization") {
  const std::string out_path = work_dir() + "/parity.csv";
  REQUIRE(run_cli("sample --network " + kFixtures +
                  "/ab.net --n 12 --seed 5 --out " + out_path)
              .exit_code == 0);
  const ParsedNetwork net = parse_network(read_file(kFixtures + "/ab.net"));
  const Dataset direct = forward_sample(net.structure, *net.params, 12, 5);
  const std::vector<std::string> comments = {
      "forward_sample n=12 seed=5; record l drawn from splitmix64 stream "
      "(seed, l)"};
  CHECK(read_file(out_path) ==
        serialize_dataset(net.structure, direct, comments));
}

TEST_CASE("learn is byte-identical across identical invocations") {
  const std::string first = work_dir() + "/learn1.net";
  const std::string second = work_dir() + "/learn2.net";
  const std::string args = "learn --algo them --network " + kFixtures +
                           "/ab.net --data " + kFixtures +
                           "/d4.csv --seed 7 --out ";
  REQUIRE(run_cli(args + first).exit_code == 0);
  REQUIRE(run_cli(args + second).exit_code == 0);
  CHECK(read_file(first) == read_file(second));
}

TEST_CASE("compare writes one summary row per trial") {
  const std::string out_path = work_dir() + "/summary.csv";
  const CommandResult result =
      run_cli("compare --network " + kFixtures +
              "/ab.net --records 40 --rate 0.3 --trials 2 --seed 4 --out " +
              out_path);
  REQUIRE(result.exit_code == 0);
  const std::string summary = read_file(out_path);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);
  CHECK(summary.find("trial,em_iters") == 0);
}

TEST_CASE("learn ml on complete data matches the closed-form estimate") {
  const std::string data_path = work_dir() + "/ml_data.csv";
  REQUIRE(run_cli("sample --network " + kFixtures +
                  "/ab.net --n 60 --seed 13 --out " + data_path)
              .exit_code == 0);
  const std::string out_path = work_dir() + "/ml.net";
  REQUIRE(run_cli("learn --algo ml --network " + kFixtures + "/ab.net --data " +
                  data_path + " --out " + out_path)
              .exit_code == 0);

  const ParsedNetwork net = parse_network(read_file(kFixtures + "/ab.net"));
  const Dataset data = parse_dataset(read_file(data_path), net.structure);
  const Estimate direct = ml_estimate(count_complete(net.structure, data));
  const ParsedNetwork learned = parse_network(read_file(out_path));
  REQUIRE(learned.params.has_value());
  CHECK(max_abs_diff(*learned.params, direct.params) == 0.0);
}
