#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace nearpencil;

namespace {

std::string temp_path(const std::string& name) {
  return ::testing::TempDir() + "nearpencil_" + name;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  const std::string path = temp_path("bad.json");
  write_text(path, text);
  try {
    parse_pencil(path);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(PencilFile, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  const MatrixPencil p = nptest::random_pencil(rng, 5, 3);
  const std::string path = temp_path("roundtrip.json");
  write_pencil(path, p);
  const MatrixPencil q = parse_pencil(path);
  EXPECT_EQ(q.a(), p.a());
  EXPECT_EQ(q.b(), p.b());
}

TEST(PencilFile, BundledCoalescingExample) {
  const MatrixPencil p = parse_pencil(nptest::data_path("coalescing_3x3.json"));
  ComplexMatrix a(3, 3), b(3, 3);
  a << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  b << -1, 2, 3, 2, -1, 2, 4, 2, -1;
  EXPECT_EQ(p.a(), a);
  EXPECT_EQ(p.b(), b);
  for (const char* f : {"diag_counterexample.json", "rectangular_4x3.json", "unstable_2x2.json"}) {
    EXPECT_NO_THROW(parse_pencil(nptest::data_path(f))) << f;
  }
}

TEST(PencilFile, ErrorsNameTheField) {
  const std::string ok_b = R"("B_re": [[1,0],[0,1]], "B_im": [[0,0],[0,0]])";
  EXPECT_NE(error_of(R"({"n": 2, "m": 2, "A_re": [[1,0],[0,1]], "A_im": [[0,0],[0,0]],
                         "B_re": [[1],[0]], "B_im": [[0,0],[0,0]]})")
                .find("B_re"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"n": 2, "m": 2, "A_re": [[1,0],[0,1]], )" + ok_b + "}").find("A_im"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"n": 2, "m": 2, "A_re": [[1,"x"],[0,1]], "A_im": [[0,0],[0,0]], )" +
                     ok_b + "}")
                .find("A_re"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"m": 2})").find("'n'"), std::string::npos);
  EXPECT_NE(error_of("{not json").find("malformed"), std::string::npos);
  EXPECT_THROW(parse_pencil(temp_path("missing_file.json")), ParseError);
}

TEST(ComplexParsing, Forms) {
  EXPECT_EQ(parse_complex("1.5"), Complex(1.5, 0));
  EXPECT_EQ(parse_complex("-2i"), Complex(0, -2));
  EXPECT_EQ(parse_complex("i"), Complex(0, 1));
  EXPECT_EQ(parse_complex("-i"), Complex(0, -1));
  EXPECT_EQ(parse_complex("0.3-4e-2i"), Complex(0.3, -0.04));
  EXPECT_EQ(parse_complex(" 1 + 2j "), Complex(1, 2));
  EXPECT_THROW(parse_complex("1+"), ParseError);
  EXPECT_THROW(parse_complex("abc"), ParseError);
  const auto list = parse_complex_list("5,1,-0.5+0.25i");
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[2], Complex(-0.5, 0.25));
  EXPECT_THROW(parse_numbers("1,2,x,4", 4, "--box"), ParseError);
  EXPECT_THROW(parse_numbers("1,2", 4, "--box"), ParseError);
  EXPECT_THROW(plane_box({1, 0, 0, 1}), ParseError);
}

TEST(Json, NumberFormatting) {
  nlohmann::ordered_json j;
  j["b"] = 0.1;
  j["a"] = std::vector<double>{1.0, 1.0 / 3.0};
  j["n"] = std::numeric_limits<double>::quiet_NaN();
  const std::string s = dump_json(j);
  EXPECT_LT(s.find("\"b\""), s.find("\"a\""));
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(s.find("0.33333333333333331"), std::string::npos);
  EXPECT_NE(s.find("null"), std::string::npos);
}

TEST(RunJob, DiagCounterexampleSet) {
  JobConfig cfg;
  cfg.pencil_path = nptest::data_path("diag_counterexample.json");
  cfg.mode = JobMode::kSet;
  cfg.r = 2;
  cfg.targets = {5.0, 1.0};
  cfg.out_path = temp_path("set1.json");
  std::ostringstream err;
  ASSERT_EQ(run_job(cfg, err), kExitOk) << err.str();
  const auto doc = nlohmann::json::parse(read_text(cfg.out_path));
  EXPECT_NEAR(doc["tau"].get<double>(), 1.0, 1e-10);
  EXPECT_TRUE(doc["verified"].get<bool>());
  EXPECT_FALSE(doc["qualifications"]["mult_ok"].get<bool>());
  EXPECT_EQ(doc["delta_A"]["re"].size(), 3u);
  for (const char* key : {"mu_star", "gamma_star", "verification", "diagnostics"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  // Byte-identical on a second run.
  const std::string first = read_text(cfg.out_path);
  cfg.out_path = temp_path("set2.json");
  ASSERT_EQ(run_job(cfg, err), kExitOk);
  EXPECT_EQ(read_text(cfg.out_path), first);
}

TEST(RunJob, ExitCodes) {
  JobConfig cfg;
  cfg.pencil_path = nptest::data_path("diag_counterexample.json");
  cfg.mode = JobMode::kSet;
  cfg.r = 3;
  cfg.targets = {5.0, 1.0};
  cfg.out_path = temp_path("ill.json");
  std::ostringstream err;
  EXPECT_EQ(run_job(cfg, err), kExitInvalid);
  EXPECT_NE(err.str().find("rank(B)"), std::string::npos);
  cfg.r = 1;
  cfg.targets.clear();
  EXPECT_EQ(run_job(cfg, err), kExitInvalid);
  cfg.mode = JobMode::kRegionBox;
  EXPECT_EQ(run_job(cfg, err), kExitInvalid);
  cfg.pencil_path = temp_path("nope.json");
  cfg.mode = JobMode::kSet;
  cfg.targets = {1.0};
  EXPECT_EQ(run_job(cfg, err), kExitInvalid);
  EXPECT_THROW(parse_mode("sideways"), ParseError);
  EXPECT_EQ(parse_mode("region-lhp"), JobMode::kRegionLhp);
}

TEST(RunPseudospectra, CsvRowsAndValues) {
  JobConfig cfg;
  cfg.pencil_path = nptest::data_path("coalescing_3x3.json");
  cfg.mode = JobMode::kPseudospectra;
  cfg.box = plane_box({-3, 1, -2, 2});
  cfg.grid = std::make_pair(200, 200);
  cfg.out_path = temp_path("ps.csv");
  std::ostringstream err;
  ASSERT_EQ(run_pseudospectra(cfg, err), kExitOk) << err.str();
  std::ifstream in(cfg.out_path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "re,im,sigma_min");
  int rows = 0;
  double near_min = 1e300;
  while (std::getline(in, line)) {
    ++rows;
    double re = 0, im = 0, v = 0;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &re, &im, &v), 3);
    if (std::abs(re + 0.85488) < 0.03 && std::abs(im) < 0.03) near_min = std::min(near_min, v);
  }
  EXPECT_EQ(rows, 40000);
  EXPECT_NEAR(near_min, 0.593, 0.03);

  cfg.grid.reset();
  EXPECT_EQ(run_pseudospectra(cfg, err), kExitInvalid);
}

TEST(RunPseudospectra, EigenvalueNode) {
  JobConfig cfg;
  cfg.pencil_path = nptest::data_path("diag_counterexample.json");
  cfg.box = plane_box({1, 5, -1, 1});
  cfg.grid = std::make_pair(5, 3);
  cfg.out_path = temp_path("ps_diag.csv");
  std::ostringstream err;
  ASSERT_EQ(run_pseudospectra(cfg, err), kExitOk);
  std::ifstream in(cfg.out_path);
  std::string line;
  std::getline(in, line);
  bool found = false;
  while (std::getline(in, line)) {
    double re = 0, im = 0, v = 0;
    std::sscanf(line.c_str(), "%lf,%lf,%lf", &re, &im, &v);
    if (re == 5.0 && im == 0.0) {
      found = true;
      EXPECT_LE(v, 1e-8);
    }
  }
  EXPECT_TRUE(found);
}
