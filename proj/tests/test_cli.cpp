#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lfrg/cli.hpp"

using namespace lfrg;
using namespace lfrg::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "lfrg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "lfrg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_config(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "lfrg_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("flags land in the run config") {
  const auto cfg = parse({"flow", "--background", "thermal", "--beta", "2.5", "--couplings",
                          "U0=0,m2=0.1,lambda=0.2", "--t1", "-0.5", "--rel-tol", "1e-9"});
  CHECK(cfg.command == Command::Flow);
  CHECK(cfg.background.kind == "thermal");
  CHECK(cfg.background.beta == 2.5);
  CHECK(cfg.couplings.m2 == 0.1);
  CHECK(cfg.couplings.lambda == 0.2);
  CHECK(cfg.solver.t1 == -0.5);
  CHECK(cfg.solver.rel_tol == 1e-9);
  CHECK(cfg.effective_format() == Format::Csv);
}

TEST_CASE("reports default to JSON") {
  const auto cfg = parse({"fixed-point", "--background", "thermal-high-t", "--guess", "m2=-0.3,lambda=10"});
  CHECK(cfg.effective_format() == Format::Json);
  CHECK(cfg.couplings.U0 == 0.0);
}

TEST_CASE("scan grid syntax") {
  const auto cfg = parse({"scan", "--background", "thermal-high-t", "--grid", "m2=-0.5:1:4,lambda=1:40:6"});
  CHECK(cfg.solver.grid.m2.lo == -0.5);
  CHECK(cfg.solver.grid.m2.hi == 1.0);
  CHECK(cfg.solver.grid.m2.count == 4);
  CHECK(cfg.solver.grid.lambda.count == 6);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(call({"flow", "--couplings", "m2=0.1"}).code == kUsage);
  CHECK(call({"flow", "--background", "anti-de-sitter"}).code == kUsage);
  CHECK(call({"flow", "--background", "thermal", "--couplings", "m2=abc"}).code == kUsage);
  CHECK(call({"flow", "--background", "thermal", "--couplings", "kappa=1"}).code == kUsage);
  CHECK(call({"tadpole", "--background", "thermal-high-t"}).code == kUsage);
  CHECK(call({}).code == kUsage);
}

TEST_CASE("help is not an error") { CHECK(call({"--help"}).code == kOk); }

TEST_CASE("a config file is read and flags override it") {
  const auto path = scratch_dir() / "cfg.json";
  {
    std::ofstream f(path);
    f << R"({"command": "flow", "background": {"kind": "thermal-high-t"},
             "couplings": {"U0": 0.05, "m2": -0.3, "lambda": 10.0},
             "solver": {"t1": 1.0}})";
  }
  const auto from_file = parse({"flow", "--config", path.string()});
  CHECK(from_file.background.kind == "thermal-high-t");
  CHECK(from_file.couplings.lambda == 10.0);
  CHECK(from_file.solver.t1 == 1.0);
  const auto overridden = parse({"flow", "--config", path.string(), "--couplings", "lambda=0.2"});
  CHECK(overridden.couplings.lambda == 0.2);
  CHECK(overridden.couplings.m2 == -0.3);
}

TEST_CASE("unknown config keys are rejected by name") {
  const auto path = scratch_dir() / "bad.json";
  {
    std::ofstream f(path);
    f << R"({"background": {"kind": "thermal", "temprature": 3}})";
  }
  const auto r = call({"flow", "--config", path.string()});
  CHECK(r.code == kUsage);
  CHECK(r.err.find("temprature") != std::string::npos);
}

TEST_CASE("a config round-trips through JSON") {
  const auto cfg = parse({"potential-flow", "--background", "minkowski-vacuum", "--mu-mode", "fixed", "--mu2",
                          "2", "--couplings", "m2=0.01,lambda=0.05", "--N", "64", "--t1", "-0.2"});
  RunConfig back;
  back.command = cfg.command;
  apply_json(to_json(cfg), back);
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.solver.N == 64);
  CHECK(back.background.mu2 == 2.0);
}

TEST_CASE("flow CSV has one row per accepted step plus the start") {
  const auto dir = scratch_dir();
  const auto out = dir / "traj.csv";
  const auto r = call({"flow", "--background", "thermal-high-t", "--couplings", "U0=0.05,m2=-0.3,lambda=10",
                       "--t1", "2", "--out", out.string(), "--quiet"});
  REQUIRE(r.code == kOk);
  const auto csv = slurp(out);
  CHECK(csv.rfind("t,k,U0,m2,lambda\n", 0) == 0);
  const auto meta = nlohmann::json::parse(slurp(fs::path(out.string() + ".meta.json")));
  CHECK(meta["exit_code"] == 0);
  CHECK(meta["termination"]["kind"] == "reached-end");
  const long accepted = meta["stats"]["accepted"];
  CHECK(count_lines(csv) == static_cast<std::size_t>(accepted + 2));  // header + start + steps
  CHECK(meta["rows"] == accepted + 1);
}

TEST_CASE("a domain stop exits with 2 and keeps the partial trajectory") {
  const auto out = scratch_dir() / "stop.csv";
  const auto r = call({"flow", "--background", "thermal-high-t", "--couplings", "m2=-0.9,lambda=1", "--t1",
                       "-5", "--out", out.string(), "--quiet"});
  CHECK(r.code == kNumerical);
  CHECK(count_lines(slurp(out)) >= 2);
  const auto meta = nlohmann::json::parse(slurp(fs::path(out.string() + ".meta.json")));
  CHECK(meta["termination"]["kind"] == "domain-stop");
}

TEST_CASE("an unwritable output path exits with 3") {
  const auto r = call({"tadpole", "--background", "minkowski-vacuum", "--out",
                       (scratch_dir() / "no" / "such" / "dir" / "x.csv").string()});
  CHECK(r.code == kIo);
}

TEST_CASE("tadpole row") {
  const auto r = call({"tadpole", "--background", "minkowski-vacuum", "--M2", "1", "--k", "1", "--mu-mode",
                       "fixed", "--mu2", "1"});
  REQUIRE(r.code == kOk);
  CHECK(r.out == "M2,k,value\n1,1,0\n");
}

TEST_CASE("fixed-point report and replay") {
  const auto r = call({"fixed-point", "--background", "thermal-high-t", "--guess", "U0=0.05,m2=-0.3,lambda=10"});
  REQUIRE(r.code == kOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(std::abs(doc["result"]["fixed_point"]["location"]["m2"].get<double>() + 0.4) < 1e-10);
  const auto path = scratch_dir() / "fp.json";
  {
    std::ofstream f(path);
    f << r.out;
  }
  const auto again = call({"fixed-point", "--config", path.string()});
  CHECK(again.code == kOk);
  CHECK(again.out == r.out);
}

TEST_CASE("identical runs give identical bytes") {
  const std::vector<std::string> args{"potential-flow", "--background", "thermal", "--beta", "1",
                                      "--couplings", "m2=0.05,lambda=0.2", "--N", "48", "--rho-max", "40",
                                      "--t1", "-0.3", "--checkpoints", "-0.1,-0.2"};
  const auto a = call(args);
  const auto b = call(args);
  REQUIRE(a.code == kOk);
  CHECK(a.out == b.out);
  CHECK(count_lines(a.out) == 1 + 4 * 48);
}
