#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string corpus(const std::string& name) { return oracle::corpus_dir() + "/" + name + ".pd"; }

fs::path scratch() {
  fs::path dir = fs::temp_directory_path() / ("pdemand-cli-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

Run run(const std::string& args) {
  fs::path err = scratch() / "stderr.txt";
  std::string cmd = std::string(PDEMAND_CLI) + " " + args + " 2>" + err.string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = oracle::read_file(err.string());
  return r;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("interp prints the forced value") {
    Run a = run("interp " + corpus("fig4"));
    CHECK(a.status == 0);
    CHECK(a.out == "1\n");
    Run b = run("interp " + corpus("fact4") + " --semantics env");
    CHECK(b.status == 0);
    CHECK(b.out == "24\n");
  }

  TEST_CASE("divergence and parse errors") {
    Run a = run("interp " + corpus("omega") + " --fuel 1000");
    CHECK(a.status == 2);
    CHECK(a.err.find("fuel exhausted") != std::string::npos);
    fs::path bad = scratch() / "bad.pd";
    std::ofstream(bad) << "fun x -> (x";
    CHECK(run("interp " + bad.string()).status == 1);
    CHECK(run("analyze " + bad.string()).status == 1);
  }

  TEST_CASE("check agrees and catches an injected fault") {
    CHECK(run("check " + corpus("fig4")).status == 0);
    Run m = run("check " + corpus("map"));
    CHECK(m.status == 0);
    CHECK(m.out.find("agree") != std::string::npos);
    CHECK(run("check " + corpus("arith") + " --inject-fault").status == 4);
    CHECK(run("check " + corpus("fact4") + " --inject-fault").status == 4);
  }

  TEST_CASE("analyze writes dot and chc files") {
    fs::path dot = scratch() / "r.dot";
    fs::path smt = scratch() / "r.smt2";
    Run a = run("analyze " + corpus("fig17") + " --dot " + dot.string() + " --chc " + smt.string());
    CHECK(a.status == 0);
    CHECK(a.out.find("letassert r: ") != std::string::npos);
    CHECK(oracle::read_file(dot.string()).rfind("digraph result {", 0) == 0);
    CHECK(oracle::read_file(smt.string()).rfind("(set-logic HORN)", 0) == 0);
  }

  TEST_CASE("analyze budget") {
    Run a = run("analyze " + corpus("map") + " --budget 10");
    CHECK(a.status == 3);
  }

  TEST_CASE("json report feeds the dot subcommand") {
    Run a = run("analyze " + corpus("arith") + " --json");
    REQUIRE(a.status == 0);
    auto j = nlohmann::json::parse(a.out);
    CHECK(j["schema"] == "pdemand-report/1");
    CHECK(j["exit_code"] == 0);
    CHECK(j["result_json"].is_array());
    fs::path report = scratch() / "report.json";
    std::ofstream(report) << a.out;
    Run d = run("dot " + report.string());
    CHECK(d.status == 0);
    CHECK(d.out.rfind("digraph result {", 0) == 0);
  }

  TEST_CASE("dump-ast") {
    Run a = run("dump-ast " + corpus("fig4"));
    CHECK(a.status == 0);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 7);
  }
}
