#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "isap/io.hpp"

using namespace isap;
using namespace isap::io;

TEST(Io, FormatDoubleRoundTrips) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(Io, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  std::ostringstream os;
  CsvWriter w(os, {"x", "note"});
  w.write_row({"1", "a,b"});
  EXPECT_EQ(os.str(), "x,note\r\n1,\"a,b\"\r\n");
  EXPECT_THROW(w.write_row({"1"}), PreconditionError);
}

TEST(Io, ParseConfig) {
  std::istringstream in("# comment\n\nL = 4\n alpha=1.5 # trailing\nL = 6\n");
  auto m = parse_config(in);
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m["L"], "6");
  EXPECT_EQ(m["alpha"], "1.5");
  std::istringstream bad("L 4\n");
  EXPECT_THROW(parse_config(bad), PreconditionError);
  std::istringstream nokey(" = 4\n");
  EXPECT_THROW(parse_config(nokey), PreconditionError);
}

TEST(Io, ParseGrid) {
  EXPECT_EQ(parse_grid("0:1:0.25"), (std::vector<double>{0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(parse_grid("0:4:0.1").size(), 41u);
  EXPECT_EQ(parse_grid("1,2.5,-3"), (std::vector<double>{1, 2.5, -3}));
  EXPECT_EQ(parse_grid("7"), (std::vector<double>{7}));
  EXPECT_THROW(parse_grid("0:1"), PreconditionError);
  EXPECT_THROW(parse_grid("1:0:0.1"), PreconditionError);
  EXPECT_THROW(parse_grid("0:1:0"), PreconditionError);
  EXPECT_THROW(parse_grid("1,x"), PreconditionError);
  EXPECT_THROW(parse_grid("1.5abc"), PreconditionError);
}
