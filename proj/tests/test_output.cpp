#include "doctest.h"
#include "fracflow/output.hpp"
#include "helpers.hpp"

using namespace fracflow;

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-3.0) == "-3");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(format_number(1.0 / 3) == "0.33333333333333331");
  CHECK(time_tag(0.18) == "t0.18");
  CHECK(time_tag(0.45000000000000001) == "t0.45");
}

TEST_CASE("sha-256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("field writers") {
  const auto c = testing::injection(0.5, 2, 1);
  const FlowProblem p = make_problem(c);
  const auto s = p.initial_state();
  const auto csv = snapshot_csv(p, s);
  CHECK(csv.rfind("x,y,subdomain,psi,saturation\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 10);
  CHECK(csv.find(",f,-3,") != std::string::npos);

  const auto vtk = snapshot_vtk(p, s, "test");
  CHECK(vtk.rfind("# vtk DataFile Version 3.0\ntest\nASCII\nDATASET RECTILINEAR_GRID\nDIMENSIONS 6 3 1\n", 0) == 0);
  CHECK(vtk.find("X_COORDINATES 6 double\n-1.25 -0.75 -0.25 0.25 0.75 1.25\n") != std::string::npos);
  CHECK(vtk.find("CELL_DATA 10\n") != std::string::npos);

  StepInfo st;
  st.step = 1;
  st.time = 0.015;
  st.iterations = 4;
  CHECK(steps_csv({st}) == "step,time,iterations,residual,mass_balance\n1,0.014999999999999999,4,0,0\n");
}

TEST_CASE("manifest") {
  ManifestInfo m{"run", "a.cfg", "abc", {{"k", 1}}, {{"steps", 30}}, {"steps.csv"}, 1.5};
  const auto j = make_manifest(m);
  CHECK(j["input"]["sha256"] == sha256_hex("abc"));
  CHECK(j["run"]["steps"] == 30);
  CHECK(j["outputs"][0] == "steps.csv");
  CHECK(j["version"] == FRACFLOW_VERSION);
}
