#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + RTD_CLI + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const char* name) { return std::string(RTD_DATA_DIR) + "/" + name; }

}  // namespace

TEST_CASE("exit 0 and JSON output") {
  const auto r = run("--theory coherence --state " + data("plus.json") + " --json gmin");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == "rtd-report/1");
  CHECK(j["value"].get<double>() == doctest::Approx(1.0));

  const auto f = run("--theory coherence --state " + data("plus.json") + " --json robustness --kind free");
  REQUIRE(f.code == 0);
  CHECK(nlohmann::json::parse(f.out)["value"] == "inf");

  const auto b = run("--theory entanglement --state " + data("flat4.json") + " --json bound");
  REQUIRE(b.code == 0);
  const auto jb = nlohmann::json::parse(b.out);
  CHECK(jb["lower"] == 2);
  CHECK(jb["upper"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("exit 1: verify failure under a faulty tolerance") {
  CHECK(run("verify --suite tensor-rule --dim-max 2 --trials 2 --seed 1").code == 0);
  CHECK(run("verify --suite tensor-rule --dim-max 2 --trials 2 --seed 1 --tol -1e-9").code == 1);
  CHECK(run("verify --suite tensor-rule --dim-max 2 --trials 2 --seed 1", "RTD_TOL=-1").code == 1);
}

TEST_CASE("exit 2: parse and validation errors") {
  const std::string plus = " --state " + data("plus.json");
  CHECK(run("--theory coherence" + plus + " --delta -1 bound").code == 2);
  CHECK(run("--theory coherence" + plus + " --epsilon 1.5 bound").code == 2);
  CHECK(run("verify --suite all").code == 2);
  CHECK(run("--theory coherence gmin").code == 2);
  CHECK(run("--state " + data("plus.json") + " gmin").code == 2);
  CHECK(run("--theory magic" + plus + " gmin").code == 2);
  CHECK(run("--theory coherence --state /nonexistent.json gmin").code == 2);
  CHECK(run("--theory coherence" + plus + " sweep --delta-grid 0 --epsilon-grid ''").code == 2);
  CHECK(run("--theory coherence" + plus + " gmin", "RTD_TOL=abc").code == 2);
  CHECK(run("--theory coherence" + plus + " frobnicate").code == 2);
}

TEST_CASE("exit 3: unsupported input") {
  CHECK(run("--theory entanglement --state " + data("mixed22.json") + " robustness --kind global").code == 3);
}

TEST_CASE("exit 4: --exact-only on a heuristic result") {
  const std::string mixed = " --state " + data("qubit_mixed.json") + " --seed 1";
  CHECK(run("--theory coherence" + mixed + " gmin --smooth 0.05").code == 0);
  CHECK(run("--theory coherence" + mixed + " --exact-only gmin --smooth 0.05").code == 4);
  CHECK(run("--theory coherence --state " + data("plus.json") + " --exact-only gmin").code == 0);
}

TEST_CASE("exit 5: hypothesis not met") {
  const std::string flat = "--theory entanglement --state " + data("flat4.json") + " --seed 3 distill";
  CHECK(run(flat + " -m 2").code == 0);
  const auto r = run("--json " + flat + " -m 3");
  CHECK(r.code == 5);
}

TEST_CASE("sweep CSV") {
  const auto r = run("--theory coherence --state " + data("plus2.json") +
                     " sweep --delta-grid 0,0.5,1 --epsilon-grid 0,0.1 --robustness-column");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("delta,epsilon,upper,lower,c_phi,g_min_smoothed,flags,r_delta\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : r.out) lines += c == '\n';
  CHECK(lines == 7);
  CHECK(r.out.find("\n0.5,0.1,") != std::string::npos);
}

TEST_CASE("distill writes the output state") {
  const std::string out = "rtd_cli_test_output.json";
  std::remove(out.c_str());
  REQUIRE(run("--theory entanglement --state " + data("flat4.json") + " --seed 3 distill -m 2 --out " + out).code == 0);
  FILE* f = std::fopen(out.c_str(), "r");
  REQUIRE(f != nullptr);
  std::fclose(f);
  CHECK(run("--theory entanglement --state " + out + " gmin").code == 0);
  std::remove(out.c_str());
}
