#include "test_util.hpp"

#include "portsheaf/interval_sheaf.hpp"
#include "portsheaf/trajectory_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

namespace portsheaf {
namespace {

TEST(TrajectoryIo, RoundTripIsExact) {
  Eigen::MatrixXd v(4, 2);
  v << 1.0 / 3.0, -2e-300, M_PI, 1e17, std::exp(1.0), 0.0, -0.1, 123456.789;
  const Trajectory e(0.1, -0.7, v, {"q", "p"});
  const Trajectory r = restrict(e, 0.2, 0.1);  // shift with rounding bookkeeping
  std::stringstream ss;
  write_csv(r, ss);
  const Trajectory back = read_csv(ss);
  EXPECT_EQ(back.values(), r.values());
  EXPECT_EQ(back.labels(), r.labels());
  EXPECT_EQ(back.step(), r.step());
  EXPECT_EQ(back.shift(), r.shift());
}

TEST(TrajectoryIo, HeaderLayout) {
  const Trajectory e(0.5, 0.25, Eigen::MatrixXd::Ones(2, 1), {"x"});
  std::stringstream ss;
  write_csv(e, ss);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "# shift=0.25 step=0.5");
  std::getline(ss, line);
  EXPECT_EQ(line, "t,x");
  std::getline(ss, line);
  EXPECT_EQ(line, "0,1");
  std::getline(ss, line);
  EXPECT_EQ(line, "0.5,1");
}

TEST(TrajectoryIo, TokensRoundTrip) {
  const Trajectory t = Trajectory::token(2, 1.0, 0.25, 0.5);
  std::stringstream ss;
  write_csv(t, ss);
  const Trajectory back = read_csv(ss);
  ASSERT_TRUE(back.token_id().has_value());
  EXPECT_EQ(*back.token_id(), 2);
  EXPECT_EQ(back.nodes(), 5);
  EXPECT_EQ(back.dim(), 0);
}

TEST(TrajectoryIo, MalformedInputIsIoError) {
  for (const char* text : {"", "t,x\n0,1\n", "# shift=0 step=0.5\nx\n0\n",
                           "# shift=0 step=0.5\nt,x\n0,1\n0.7,1\n", "# shift=0 step=0.5\nt,x\n0,abc\n",
                           "# shift=0 step=0.5\nt,x\n0,1,2\n"}) {
    std::stringstream ss(text);
    EXPECT_ERROR_KIND(read_csv(ss), ErrorKind::IoError) << text;
  }
}

TEST(TrajectoryIo, Files) {
  const std::filesystem::path dir = std::filesystem::path(PORTSHEAF_TEST_TMP) / "io";
  std::filesystem::create_directories(dir);
  const Trajectory e = test::sampled([](double t) { return std::sin(t); }, 0.01, 20, 0.3);
  save_csv(e, dir / "e.csv");
  const Trajectory back = load_csv(dir / "e.csv");
  EXPECT_EQ(back.values(), e.values());
  EXPECT_ERROR_KIND(load_csv(dir / "missing.csv"), ErrorKind::IoError);
  EXPECT_ERROR_KIND(save_csv(e, dir / "no" / "such" / "dir" / "e.csv"), ErrorKind::IoError);
}

}  // namespace
}  // namespace portsheaf
