#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli_path() {
  const char* p = std::getenv("IDLA_CLI");
  REQUIRE(p != nullptr);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("grow command writes a reproducible cluster dump") {
  REQUIRE(run("grow --dim 2 --n 6 --seed 42 --out cli_a.json") == 0);
  const std::string first = slurp("cli_a.json");
  REQUIRE(run("grow --dim 2 --n 6 --seed 42 --out cli_a.json") == 0);
  CHECK(first == slurp("cli_a.json"));  // identical command, identical bytes
  // |A| = |B(0,6)| entries: count settle records
  std::size_t settles = 0;
  for (std::size_t pos = first.find("\"explorer\""); pos != std::string::npos;
       pos = first.find("\"explorer\"", pos + 1))
    ++settles;
  CHECK(settles == 109);  // |B(0,6)| in d=2
  REQUIRE(run("grow --dim 2 --n 6 --seed 43 --out cli_c.json") == 0);
  const std::string other = slurp("cli_c.json");
  CHECK(first.substr(first.find("settle_order")) != other.substr(other.find("settle_order")));
}

TEST_CASE("dimension 1 is a usage error") {
  CHECK(run("grow --dim 1 --n 5 --seed 1 --out cli_d1.json") == 2);
}

TEST_CASE("precondition failures exit with code 3") {
  CHECK(run("probe covering --dim 2 --radius 4 --amplitudes 0.5 --trials 5 --seed 1 "
            "--out cli_cov_bad.csv") == 3);
}

TEST_CASE("budget failures exit with code 4") {
  CHECK(run("greens green --dim 3 --n 40 --budget 1000 --source 0,0,0 --target 1,0,0") == 4);
}

TEST_CASE("tails lower reproduces the worked optimization") {
  REQUIRE(run("tails lower --mu 100 --xi 50 --c 0 --kappa 2 --s2 10 --optimize") == 0);
  const std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("0.4166") != std::string::npos);
  CHECK(out.find("2.9929") != std::string::npos);
}

TEST_CASE("scan emits one row per (n, trial)") {
  REQUIRE(run("scan --dim 2 --n-list 3,4 --trials 5 --seed 7 --out cli_scan.csv") == 0);
  const std::string csv = slurp("cli_scan.csv");
  std::size_t rows = 0;
  std::istringstream ss(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      CHECK(line.find("delta_i") != std::string::npos);
      continue;
    }
    ++rows;
  }
  CHECK(rows == 10);
  // report consumes the scan
  CHECK(run("report --scan cli_scan.csv --out cli_report.csv") == 0);
}

TEST_CASE("probe traps writes frequencies with halfwidths") {
  REQUIRE(run("probe traps --dim 2 --radius 6 --densities 0.5,1 --trials 40 --seed 9 "
              "--out cli_traps.csv") == 0);
  const std::string csv = slurp("cli_traps.csv");
  CHECK(csv.find("wilson_halfwidth") != std::string::npos);
  CHECK(csv.find("containment_violations") != std::string::npos);
}

TEST_CASE("results are independent of the thread count") {
  REQUIRE(run("--threads 1 scan --dim 2 --n-list 5 --trials 16 --seed 3 --out cli_t1.csv") == 0);
  REQUIRE(run("--threads 4 scan --dim 2 --n-list 5 --trials 16 --seed 3 --out cli_t4.csv") == 0);
  auto payload = [](const std::string& text) {
    std::istringstream ss(text);
    std::string line, acc;
    while (std::getline(ss, line))
      if (line.rfind("# command=", 0) != 0) acc += line + "\n";
    return acc;
  };
  CHECK(payload(slurp("cli_t1.csv")) == payload(slurp("cli_t4.csv")));
}

TEST_CASE("config file supplies defaults that flags override") {
  {
    std::ofstream cfg("cli.cfg");
    cfg << "[grow]\ndim=2\nn=4\nseed=5\nout=cli_cfg_a.json\n";
  }
  REQUIRE(run("--config cli.cfg grow") == 0);
  REQUIRE(run("--config cli.cfg grow --out cli_cfg_b.json") == 0);
  const std::string a = slurp("cli_cfg_a.json");
  std::string b = slurp("cli_cfg_b.json");
  // identical payload apart from the embedded command line / output name
  CHECK(a.find("\"settle_order\"") != std::string::npos);
  CHECK(b.find("\"settle_order\"") != std::string::npos);
  CHECK(a.substr(a.find("\"settle_order\"")) == b.substr(b.find("\"settle_order\"")));
}
