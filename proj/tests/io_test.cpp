#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support/oracles.hpp"
#include "wht/matrix_io.hpp"
#include "wht/trace_io.hpp"

namespace wht {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("wht_io_" + name)).string();
}

TEST(MatrixCsv, RoundTripIsExact) {
  Philox4x32 rng(1);
  const auto a = testing::random_matrix(rng, 7, 5);
  std::stringstream ss;
  write_matrix_csv(a, ss);
  const auto back = read_matrix_csv(ss);
  ASSERT_EQ(back.rows(), 7u);
  ASSERT_EQ(back.cols(), 5u);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(back(i, j), a(i, j));
}

TEST(MatrixCsv, SkipsCommentsAndBlankLines) {
  std::stringstream ss("# header\n1,2\n\n3, 4\n");
  const auto m = read_matrix_csv(ss);
  ASSERT_EQ(m.rows(), 2u);
  EXPECT_EQ(m(1, 1), 4.0);
}

TEST(MatrixCsv, Errors) {
  std::stringstream ragged("1,2\n3\n");
  EXPECT_THROW(read_matrix_csv(ragged), std::runtime_error);
  std::stringstream bad("1,x\n");
  EXPECT_THROW(read_matrix_csv(bad), std::runtime_error);
  std::stringstream empty_cell("1,,2\n");
  EXPECT_THROW(read_matrix_csv(empty_cell), std::runtime_error);
  std::stringstream nothing("# only a comment\n");
  EXPECT_THROW(read_matrix_csv(nothing), std::runtime_error);
  EXPECT_THROW(read_matrix_csv(temp_path("does_not_exist.csv")), std::runtime_error);
}

TEST(VectorCsv, ColumnOrRow) {
  const auto p = temp_path("vec.csv");
  write_vector_csv(Vector{1.5, -2, 1e-300}, p);
  EXPECT_EQ(read_vector_csv(p), (Vector{1.5, -2, 1e-300}));
  std::ofstream(p) << "1,2,3\n";
  EXPECT_EQ(read_vector_csv(p), (Vector{1, 2, 3}));
  std::filesystem::remove(p);
}

RunTrace small_trace() {
  RunTrace t;
  t.initial_f = 2.0;
  TraceRecord a;
  a.iter = 0;
  a.f = 1.0;
  a.support_size = 1;
  a.support = IndexSet({3});
  a.step_norm = 0.5;
  TraceRecord b = a;
  b.f = 0.25;
  b.event = Event::newton_accepted;
  b.momentum_t = 1.0;
  t.records = {a, b};
  t.x = Vector{0, 0, 0, 0.5};
  t.termination = Termination::residual;
  t.iterations = 1;
  return t;
}

TEST(TraceCsv, HeaderAndRows) {
  std::stringstream ss;
  write_trace_csv(small_trace(), ss);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "# wht-trace v1");
  std::getline(ss, line);
  EXPECT_EQ(line, "# initial_f=2");
  std::getline(ss, line);
  EXPECT_EQ(line, "iter,f,support_size,step_norm,event");
  std::getline(ss, line);
  EXPECT_EQ(line, "0,1,1,0.5,gradient");
  std::getline(ss, line);
  EXPECT_EQ(line, "0,0.25,1,0.5,newton_accepted");
}

TEST(TraceJson, CarriesSupportAndTermination) {
  const auto j = nlohmann::json::parse(trace_to_json(small_trace()));
  EXPECT_EQ(j["termination"], "residual");
  EXPECT_EQ(j["records"].size(), 2u);
  EXPECT_EQ(j["records"][0]["support"][0], 3);
  EXPECT_FALSE(j["records"][0].contains("momentum_t"));
  EXPECT_EQ(j["records"][1]["momentum_t"], 1.0);
}

TEST(FormatReal, RoundTrips) {
  Philox4x32 rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const double v = rng.normal() * std::exp(20 * rng.normal());
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
  EXPECT_EQ(format_real(0.1), "0.1");
}

}  // namespace
}  // namespace wht
