#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "contend2/policy_io.hpp"

using namespace contend2;

namespace {

TEST(PolicyIo, ParsesArray) {
  const auto spec = parse_policy("[0.5, 1.0]");
  const auto& p = std::get<ProbSequence>(spec);
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0], 0.5);
}

TEST(PolicyIo, ClampsNearOne) {
  const auto spec = parse_policy("[0.5, 0.9999999999999]");
  EXPECT_EQ(std::get<ProbSequence>(spec)[1], 1.0);
  EXPECT_THROW(parse_policy("[0.5, 0.99999]"), InvalidArgument);
}

TEST(PolicyIo, ParsesProtocolObjects) {
  const auto c = parse_policy(R"({"schedule": "constant", "probs": [0.5], "cost": 2.0})");
  EXPECT_EQ(std::get<ConstantPolicy>(c).probability, 0.5);
  const auto r = parse_policy(R"({"probs": [0.25, 1.0]})");
  EXPECT_EQ(std::get<ProbSequence>(r)[0], 0.25);
}

TEST(PolicyIo, RejectsMalformed) {
  EXPECT_THROW(parse_policy("[0.5,"), InvalidArgument);
  EXPECT_THROW(parse_policy("{\"p\": [1]}"), InvalidArgument);
  EXPECT_THROW(parse_policy("[\"a\", 1]"), InvalidArgument);
  EXPECT_THROW(parse_policy(R"({"schedule": "constant", "probs": [0.5, 1.0]})"), InvalidArgument);
  EXPECT_THROW(parse_policy(R"({"schedule": "weird", "probs": [1.0]})"), InvalidArgument);
  EXPECT_THROW(load_policy_file("/nonexistent/policy.json"), InvalidArgument);
}

TEST(PolicyIo, LoadsFile) {
  const std::string path = ::testing::TempDir() + "policy_io_test.json";
  {
    std::ofstream out(path);
    out << "[0.3, 0.6, 1]\n";
  }
  const auto spec = load_policy_file(path);
  EXPECT_EQ(std::get<ProbSequence>(spec).size(), 3u);
  const auto f = to_history_policy(spec);
  EXPECT_EQ(f(History::parse("0")), 0.6);
  std::remove(path.c_str());
}

}  // namespace
