#include <gtest/gtest.h>

#include <sstream>

#include "elaudit/dataset.hpp"
#include "elaudit/error.hpp"

using namespace elaudit;

namespace {

AuditDataset parse(const std::string& text) {
  std::istringstream in(text);
  return to_dataset(parse_csv(in));
}

ErrorCode code_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Domain;
}

}  // namespace

TEST(Csv, InfersColumnTypes) {
  const auto d = parse("age,race,score\n20,AA,0.5\n30,\"Cauc, asian\",1e-3\n");
  EXPECT_EQ(d.rows(), 2u);
  EXPECT_TRUE(d.column("age").is_numeric());
  EXPECT_FALSE(d.column("race").is_numeric());
  EXPECT_EQ(d.categorical("race")[1], "Cauc, asian");
  EXPECT_DOUBLE_EQ(d.numeric("score")[1], 1e-3);
}

TEST(Csv, HandlesCrlfAndEscapedQuotes) {
  const auto d = parse("a,b\r\n1,\"say \"\"hi\"\"\"\r\n");
  EXPECT_EQ(d.categorical("b")[0], "say \"hi\"");
}

TEST(Csv, RejectsBadInput) {
  EXPECT_EQ(code_of("a,b\n1\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of("a,b\n1,\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of("a\nnan\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of("a\ninf\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of("a\n\"open\n"), ErrorCode::Parse);
  EXPECT_EQ(code_of(""), ErrorCode::Parse);
  EXPECT_EQ(code_of("a,a\n1,2\n"), ErrorCode::Schema);
}

TEST(Csv, DiagnosticNamesLineAndColumn) {
  try {
    parse("a,b\n1,2\n3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, RoundTripIsIdentity) {
  const auto d = parse("x,label,y\n0.1,\"a,b\",3\n2.5e-300,\"c\"\"d\",-0\n1,plain,0.30000000000000004\n");
  std::ostringstream out;
  write_dataset(out, d);
  const auto again = parse(out.str());
  EXPECT_TRUE(again == d);
  std::ostringstream out2;
  write_dataset(out2, again);
  EXPECT_EQ(out.str(), out2.str());
}

TEST(Dataset, AccessorsAndErrors) {
  const auto d = parse("a,b\n1,x\n2,y\n");
  EXPECT_THROW(d.column("zzz"), Error);
  EXPECT_THROW(d.numeric("b"), Error);
  EXPECT_THROW(d.categorical("a"), Error);
  const std::size_t rows[] = {1};
  const auto sub = d.select_rows(rows);
  EXPECT_EQ(sub.rows(), 1u);
  EXPECT_EQ(sub.categorical("b")[0], "y");
}

TEST(Dataset, FormatNumberRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -0.0}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}
