#include <doctest.h>

#include "toric/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "toric-tool");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = toric::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("toric_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("check prints unimodular vertex determinants") {
  const Run r = run({"check", "--polytope", "square"});
  CHECK(r.code == 0);
  CHECK(r.out.find("vertex determinants: 1 1 1 1") != std::string::npos);
}

TEST_CASE("extremal-k on the simplex prints 6") {
  const Run r = run({"extremal-k", "--polytope", "simplex"});
  CHECK(r.code == 0);
  CHECK(r.out.find("extremal affine K: 6 + ") != std::string::npos);
}

TEST_CASE("stability on the square") {
  const fs::path dir = scratch("stab");
  fs::create_directories(dir);
  const fs::path cfg = write(dir / "cfg.json", R"({"K": 4, "angles": 30, "offsets": 30, "surface": true})");
  const Run r = run({"stability", "--polytope", "square", "--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("lambda_est: ") != std::string::npos);
  CHECK(r.out.find("verdict: no destabilizer found") != std::string::npos);
  CHECK(fs::exists(dir / "o" / "scan.csv"));
}

TEST_CASE("usage errors exit 2 and write nothing") {
  const fs::path dir = scratch("usage");
  CHECK(run({"frobnicate", "--polytope", "square", "--out", dir.string()}).code == 2);
  CHECK(run({"check"}).code == 2);
  CHECK(run({"check", "--polytope", "square", "--bogus", "1"}).code == 2);
  CHECK(run({"check", "--polytope", "square", "--config", "/nonexistent/cfg.json", "--out", dir.string()}).code == 2);
  CHECK(run({"check", "--polytope", "/nonexistent/p.json"}).code == 2);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("domain and parse errors exit 1 with diagnostics") {
  const fs::path dir = scratch("domain");
  fs::create_directories(dir);
  const fs::path bad_poly = write(dir / "p.json", R"({"facets":[{"normal":[1,0],"offset":0},{"normal":[-1,2],"offset":0},
    {"normal":[0,-1],"offset":-1}]})");
  CHECK(run({"check", "--polytope", bad_poly.string()}).code == 1);

  const fs::path broken = write(dir / "broken.json", "{\n  \"K\": 4,\n  oops\n}");
  Run r = run({"stability", "--polytope", "square", "--config", broken.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 3") != std::string::npos);

  const fs::path typo = write(dir / "typo.json", R"({"K": 4, "angels": 10})");
  r = run({"stability", "--polytope", "square", "--config", typo.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("'angels'") != std::string::npos);

  const fs::path expr = write(dir / "expr.json", R"({"K": "4 + xi3"})");
  r = run({"stability", "--polytope", "square", "--config", expr.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("column") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o"));
}

TEST_CASE("analyze exports fields deterministically") {
  const fs::path dir = scratch("analyze");
  fs::create_directories(dir);
  const fs::path cfg = write(dir / "cfg.json", R"({"cells": 8, "x_cells": 9})");
  REQUIRE(run({"analyze", "--polytope", "square", "--config", cfg.string(), "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"analyze", "--polytope", "square", "--config", cfg.string(), "--out", (dir / "b").string()}).code == 0);
  for (const char* f : {"S.csv", "det.csv", "theta.csv", "W.csv", "H.csv"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(slurp(dir / "a" / f).rfind("xi1,xi2,value\n", 0) == 0);
  }
  std::istringstream s(slurp(dir / "a" / "S.csv"));
  std::string line;
  std::getline(s, line);
  int finite = 0;
  while (std::getline(s, line)) {
    const std::string v = line.substr(line.rfind(',') + 1);
    if (v == "NaN") continue;
    CHECK(std::stod(v) == doctest::Approx(4.0).epsilon(1e-9));
    ++finite;
  }
  CHECK(finite > 0);
}

TEST_CASE("solve, continuity, construct-k and verify") {
  const fs::path dir = scratch("solve");
  fs::create_directories(dir);
  const fs::path cfg = write(dir / "s.json", R"({"K": 4, "cells": 16})");
  Run r = run({"solve", "--polytope", "square", "--config", cfg.string(), "--out", (dir / "s").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("converged: yes") != std::string::npos);
  for (const char* f : {"psi.json", "residual.csv", "history.csv"}) CHECK(fs::exists(dir / "s" / f));

  const fs::path warm = write(dir / "w.json", "{\"K\": 4, \"cells\": 16, \"psi0\": \"" +
                                                  (dir / "s" / "psi.json").string() + "\"}");
  CHECK(run({"solve", "--polytope", "square", "--config", warm.string()}).code == 0);

  const fs::path cc = write(dir / "c.json", R"({"K1": 4, "steps": 2, "cells": 16})");
  r = run({"continuity", "--polytope", "square", "--config", cc.string(), "--out", (dir / "c").string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "c" / "continuity.csv"));

  const fs::path raw = write(dir / "b.json", R"j({"K": "4 + 0.05*bump(0.5, 0.5, 0.15)", "cells": 32, "newton": true})j");
  r = run({"solve", "--polytope", "square", "--config", raw.string()});
  CHECK(r.code == 1);
  CHECK(r.out.find("violated affine balance") != std::string::npos);
  const fs::path bal = write(dir / "bb.json",
                             R"j({"K": "4 + 0.05*bump(0.5, 0.5, 0.15)", "cells": 32, "newton": true, "balance": true})j");
  r = run({"solve", "--polytope", "square", "--config", bal.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("converged: yes") != std::string::npos);

  const fs::path ck = write(dir / "k.json", R"({"signs": [1, -1, 1, -1]})");
  r = run({"construct-k", "--polytope", "square", "--config", ck.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("WRONG") == std::string::npos);

  r = run({"verify", "--polytope", "square"});
  CHECK(r.code == 0);
  CHECK(r.out.find("verdict: fail") == std::string::npos);
  const fs::path strict = write(dir / "v.json", R"({"K_o": 3})");
  CHECK(run({"verify", "--polytope", "square", "--config", strict.string()}).code == 1);
}
