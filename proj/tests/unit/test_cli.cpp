#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "disent/cli.hpp"

using namespace disent;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST_CASE("measure Bell: one bit of entanglement, two bits of correlation") {
  const Run r = run({"measure", "--state", "bell", "--eps", "0.1", "--threads", "1"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out)[0];
  CHECK(j["mutual_info"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(j["ree_ppt"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(j["ree_ensemble"].get<double>() == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("measure a classically correlated bit") {
  const Run r = run({"measure", "--state", "maxcorr:2", "--approx", "ppt"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out)[0];
  CHECK(j["ree_ppt"].get<double>() <= 1e-6);
  CHECK(j["mutual_info"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(j["ree_ensemble"].is_null());
}

TEST_CASE("bad state files exit 1 with a field diagnostic") {
  const std::string path = "disent_cli_bad.json";
  {
    std::ofstream f(path);
    f << R"({"dims": [{"label": "A", "dim": 2}], "matrix_re": [[1, 0], [0, 0]]})";
  }
  const Run r = run({"measure", "--state", "file:" + path});
  std::remove(path.c_str());
  CHECK(r.code == 1);
  CHECK(r.err.find("InvalidFile") != std::string::npos);
  CHECK(run({"measure", "--state", "nosuch"}).code == 1);
  CHECK(run({"measure", "--state", "bell", "--eps", "2"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
}

TEST_CASE("protocol on Bell and on a separable input") {
  const Run bell = run({"protocol", "--state", "bell", "--eps", "0.2", "--delta", "0.1", "--approx", "ppt"});
  CHECK(bell.code == 0);
  CHECK(nlohmann::json::parse(bell.out)["pass"].get<bool>());

  const Run sep = run({"protocol", "--state", "maxcorr:2", "--eps", "0.1", "--delta", "0.05", "--approx", "ppt"});
  CHECK(sep.code == 0);
  CHECK(nlohmann::json::parse(sep.out)["M"].get<int>() == 1);
}

TEST_CASE("protocol on Werner 0.9 satisfies the sandwich") {
  const Run r = run({"protocol", "--state", "werner:0.9", "--eps", "0.25", "--delta", "0.1", "--approx", "ppt"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["lower_bound_bits"].get<double>() <= j["log2_M"].get<double>() + 1e-6);
  CHECK(j["log2_M"].get<double>() <= j["upper_bound_bits"].get<double>() + 1e-3);
}

TEST_CASE("verify appendix on GHZ") {
  const Run r = run({"verify", "appendix", "--state", "ghz3", "--M", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("ghz3,2,") != std::string::npos);
  CHECK(r.out.find("true") != std::string::npos);
}

TEST_CASE("sweeps are deterministic and empty grids are rejected") {
  const std::vector<std::string> args = {"sweep", "--grid", "werner:0:1:0.25", "--approx", "ppt", "--threads", "2"};
  const Run a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  std::istringstream lines(a.out);
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 5);
  CHECK(run({"sweep", "--grid", "werner:1:0:0.1"}).code == 1);
  CHECK(run({"sweep", "--grid", "werner:0:1"}).code == 1);
}

TEST_CASE("eps sweep of smooth max-entropy is non-increasing") {
  const Run r = run({"sweep", "--state", "bell", "--grid", "eps:0.05:0.3:0.05", "--approx", "ppt", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 6);
  for (std::size_t i = 1; i < j.size(); ++i)
    CHECK(j[i]["e_max_smooth"].get<double>() <= j[i - 1]["e_max_smooth"].get<double>() + 1e-9);
}

TEST_CASE("linspace includes both ends") {
  CHECK(linspace_step(0, 1, 0.05).size() == 21);
  CHECK(linspace_step(0, 1, 0.05).back() == 1.0);
  CHECK(linspace_step(1, 0, 0.1).empty());
}

TEST_CASE("the installed binary maps bad input to exit status 1") {
  const char* exe = std::getenv("DISENT_CLI");
  if (!exe) return;
  const int status = std::system((std::string(exe) + " measure --state nosuch 2>/dev/null").c_str());
  CHECK(WEXITSTATUS(status) == 1);
  const int help = std::system((std::string(exe) + " --help >/dev/null").c_str());
  CHECK(WEXITSTATUS(help) == 0);
}
