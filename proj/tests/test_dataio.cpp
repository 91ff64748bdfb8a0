#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ntkgp/dataio.hpp"
#include "ntkgp/rng.hpp"

using namespace ntkgp;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(bool(out));
  out << content;
}

ExperimentRecord sample_record() {
  ExperimentRecord record;
  record.experiment = "match-kernels";
  record.config = "depth=3 n=1000 grid=201";
  record.hypers = {{"beta", 2.1711}, {"ell", 2.0413}};
  record.metrics = {{"variance", 3.1e-4}};
  record.elapsed_seconds = 1.25;
  record.seed = 42;
  record.artifacts = {"curve.csv", "report.json"};
  return record;
}

}  // namespace

TEST_CASE("rmse anchor and contracts") {
  CHECK(rmse(vec({0, 0}), vec({3, 4})) ==
        doctest::Approx(std::sqrt(12.5)).epsilon(1e-14));
  CHECK(rmse(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK_THROWS_AS((void)rmse(vec({1, 2}), vec({1, 2, 3})),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)rmse(Vector(0), Vector(0)), std::invalid_argument);
}

TEST_CASE("pearson is affine-invariant and matches direct summation") {
  const Vector x = vec({0.3, -1.2, 2.5, 0.9, -0.4});
  CHECK(pearson(x, (3.0 * x.array() + 2.0).matrix()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(x, (-x.array() + 1.0).matrix()) ==
        doctest::Approx(-1.0).epsilon(1e-12));

  Rng rng(3);
  Vector a(64), b(64);
  for (int i = 0; i < 64; ++i) {
    a[i] = gaussian(rng);
    b[i] = 0.4 * a[i] + gaussian(rng);
  }
  // direct-summation oracle
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < 64; ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  const double n = 64.0;
  const double expect = (sab - sa * sb / n) /
                        std::sqrt((saa - sa * sa / n) * (sbb - sb * sb / n));
  CHECK(pearson(a, b) == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS((void)pearson(vec({1, 1, 1}), vec({1, 2, 3})),
                  std::domain_error);
  CHECK_THROWS_AS((void)pearson(vec({1, 2}), vec({1})), std::invalid_argument);
}

TEST_CASE("r_squared anchors") {
  const Vector truth = vec({0, 1, 2, 3});
  CHECK(r_squared(truth, truth) == 1.0);
  Vector at_mean(4);
  at_mean.setConstant(1.5);
  CHECK(r_squared(truth, at_mean) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r_squared(truth, vec({3, 2, 1, 0})) ==
        doctest::Approx(-3.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)r_squared(vec({2, 2, 2}), vec({1, 2, 3})),
                  std::domain_error);
}

TEST_CASE("experiment records round-trip and emit stable bytes") {
  const ExperimentRecord record = sample_record();
  write_record("io_record_a.json", record);
  write_record("io_record_b.json", record);
  CHECK(slurp("io_record_a.json") == slurp("io_record_b.json"));

  const ExperimentRecord back = read_record("io_record_a.json");
  CHECK(back.version == 1);
  CHECK(back.experiment == record.experiment);
  CHECK(back.config == record.config);
  CHECK(back.hypers == record.hypers);
  CHECK(back.metrics == record.metrics);
  CHECK(back.elapsed_seconds == record.elapsed_seconds);
  CHECK(back.seed == record.seed);
  CHECK(back.artifacts == record.artifacts);
}

TEST_CASE("record ingestion failures") {
  CHECK_THROWS_AS((void)read_record("does_not_exist.json"), IngestError);

  ExperimentRecord future = sample_record();
  future.version = 2;
  write_record("io_record_future.json", future);
  CHECK_THROWS_AS((void)read_record("io_record_future.json"), IngestError);

  spit("io_record_corrupt.json", "{ not json ");
  CHECK_THROWS_AS((void)read_record("io_record_corrupt.json"), IngestError);

  spit("io_record_partial.json", "{\"version\": 1}");
  CHECK_THROWS_AS((void)read_record("io_record_partial.json"), IngestError);
}

TEST_CASE("tables are CSV with lossless doubles and LF endings") {
  Matrix values(2, 2);
  values << 1.0 / 3.0, 1.0, -2.5e-17, 12345.6789;
  write_table("io_table.csv", {"beta", "ell"}, values);
  const std::string text = slurp("io_table.csv");
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.rfind("beta,ell\n", 0) == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);

  // every value round-trips exactly
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  for (int i = 0; i < 2; ++i) {
    std::getline(in, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == values(i, 0));
    CHECK(std::stod(line.substr(comma + 1)) == values(i, 1));
  }

  CHECK_THROWS_AS(write_table("io_table.csv", {"a"}, values),
                  std::invalid_argument);
  CHECK_THROWS_AS(write_table("io_table.csv", {}, Matrix(0, 0)),
                  std::invalid_argument);
}

namespace {

// Deterministic synthetic stand-in with the real table's shape.
void write_concrete_fixture(const std::string& path, bool header, int rows) {
  std::ostringstream out;
  if (header)
    out << "cement,slag,ash,water,plasticizer,coarse,fine,age,strength\n";
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < 9; ++j)
      out << (j ? "," : "") << (i + 1) * 10 + j + 0.5;
    out << "\n";
  }
  spit(path, out.str());
}

}  // namespace

TEST_CASE("concrete loader accepts the canonical shape") {
  write_concrete_fixture("io_concrete.csv", true, 1030);
  const Dataset data = load_concrete("io_concrete.csv");
  CHECK(data.x.rows() == 1030);
  CHECK(data.x.cols() == 8);
  CHECK(data.y.size() == 1030);
  CHECK(data.x(0, 0) == 10.5);
  CHECK(data.x(2, 3) == 33.5);
  CHECK(data.y[0] == 18.5);
  CHECK(data.y[1029] == 10308.5);

  // headerless files auto-detect and load identically
  write_concrete_fixture("io_concrete_bare.csv", false, 1030);
  const Dataset bare = load_concrete("io_concrete_bare.csv");
  CHECK(bare.x == data.x);
  CHECK(bare.y == data.y);
}

TEST_CASE("concrete loader rejects malformed tables") {
  spit("io_concrete_short.csv", "1,2,3,4,5,6,7,8,9\n1,2,3,4,5,6,7,8\n");
  CHECK_THROWS_WITH_AS((void)load_concrete("io_concrete_short.csv"),
                       doctest::Contains("row 2"), IngestError);

  spit("io_concrete_text.csv", "1,2,3,4,5,6,7,8,9\n1,2,3,4,oops,6,7,8,9\n");
  CHECK_THROWS_WITH_AS((void)load_concrete("io_concrete_text.csv"),
                       doctest::Contains("column 5"), IngestError);

  spit("io_concrete_wide.csv", "1,2,3,4,5,6,7,8,9,10\n");
  CHECK_THROWS_AS((void)load_concrete("io_concrete_wide.csv"), IngestError);

  spit("io_concrete_empty.csv", "");
  CHECK_THROWS_AS((void)load_concrete("io_concrete_empty.csv"), IngestError);

  spit("io_concrete_only_header.csv", "a,b,c,d,e,f,g,h,i\n");
  CHECK_THROWS_AS((void)load_concrete("io_concrete_only_header.csv"),
                  IngestError);

  CHECK_THROWS_AS((void)load_concrete("io_missing.csv"), IngestError);
}

TEST_CASE("fire loader keeps the weather block and log-transforms area") {
  spit("io_fire.csv",
       "X,Y,month,day,FFMC,DMC,DC,ISI,temp,RH,wind,rain,area\n"
       "7,5,mar,fri,86.2,26.2,94.3,5.1,8.2,51,6.7,0.0,0\n"
       "7,4,oct,tue,90.6,35.4,669.1,6.7,18,33,0.9,0.0,36.45\n"
       "8,6,aug,sun,92.1,111.2,654.1,9.6,20.4,42,4.9,0.2,1.0\n");
  const Dataset data = load_fire("io_fire.csv");
  REQUIRE(data.x.rows() == 3);
  REQUIRE(data.x.cols() == 4);
  CHECK(data.x(0, 0) == 8.2);   // temp
  CHECK(data.x(0, 1) == 51.0);  // RH
  CHECK(data.x(0, 2) == 6.7);   // wind
  CHECK(data.x(2, 3) == 0.2);   // rain
  CHECK(data.y[0] == 0.0);      // log(0 + 1)
  CHECK(data.y[1] == doctest::Approx(std::log1p(36.45)).epsilon(1e-15));
  CHECK(data.y[2] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("fire loader ingestion failures") {
  spit("io_fire_missing.csv",
       "X,Y,month,day,FFMC,DMC,DC,ISI,temp,RH,wind,area\n"
       "7,5,mar,fri,86.2,26.2,94.3,5.1,8.2,51,6.7,0\n");
  CHECK_THROWS_WITH_AS((void)load_fire("io_fire_missing.csv"),
                       doctest::Contains("rain"), IngestError);

  spit("io_fire_ragged.csv",
       "X,Y,month,day,FFMC,DMC,DC,ISI,temp,RH,wind,rain,area\n"
       "7,5,mar,fri,86.2\n");
  CHECK_THROWS_AS((void)load_fire("io_fire_ragged.csv"), IngestError);

  spit("io_fire_negative.csv",
       "temp,RH,wind,rain,area\n"
       "8.2,51,6.7,0.0,-1\n");
  CHECK_THROWS_AS((void)load_fire("io_fire_negative.csv"), IngestError);

  spit("io_fire_headerless.csv", "1,2,3,4,5\n");
  CHECK_THROWS_AS((void)load_fire("io_fire_headerless.csv"), IngestError);
}
