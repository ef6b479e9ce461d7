#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "surprisal/csv.hpp"
#include "surprisal/model_spec.hpp"
#include "surprisal/table_scoring.hpp"

using namespace surprisal;

TEST(ModelSpec, ParsesNamedAndPositionalArguments) {
  EXPECT_EQ(parse_model("normal(mu=0,sigma=1)").describe(), "normal(mu=0,sigma=1)");
  EXPECT_EQ(parse_model("normal()").describe(), "normal(mu=0,sigma=1)");
  EXPECT_EQ(parse_model(" t( nu = 4 ) ").describe(), "t(nu=4,loc=0,scale=1)");
  EXPECT_EQ(parse_model("gamma(2,2)").describe(), "gamma(shape=2,rate=2)");
  EXPECT_EQ(parse_model("gamma(shape=2,rate=2)").describe(), "gamma(shape=2,rate=2)");
  EXPECT_EQ(parse_model("binomial(10, 0.25)").describe(), "binomial(trials=10,prob=0.25)");
  EXPECT_EQ(parse_model("normal(1e-3, 2.5E1)").describe(), "normal(mu=0.001,sigma=25)");
}

TEST(ModelSpec, ParsesProducts) {
  const auto m = parse_model("product(gamma(2,2),gamma(shape=2,rate=2))");
  EXPECT_EQ(m.arity(), 2u);
  EXPECT_EQ(m.describe(), "product(gamma(shape=2,rate=2),gamma(shape=2,rate=2))");
  const auto nested = parse_model("product(normal(), product(t(4), binomial(3, 0.5)))");
  EXPECT_EQ(nested.arity(), 3u);
}

TEST(ModelSpec, DescribeRoundTrips) {
  for (const char* text : {"normal(mu=-1.25,sigma=0.1)", "t(nu=4,loc=1,scale=0.7071067811865476)",
                           "product(gamma(shape=2,rate=2),binomial(trials=7,prob=0.3))"}) {
    EXPECT_EQ(parse_model(text).describe(), text);
  }
}

TEST(ModelSpec, Errors) {
  EXPECT_THROW(parse_model("normal(0,1"), ValidationError);
  EXPECT_THROW(parse_model("normal(0,1) extra"), ValidationError);
  EXPECT_THROW(parse_model("cauchy(0,1)"), ValidationError);
  EXPECT_THROW(parse_model("normal(0,1,2)"), ValidationError);
  EXPECT_THROW(parse_model("normal(mu=0,mu=1)"), ValidationError);
  EXPECT_THROW(parse_model("normal(scale=2)"), ValidationError);
  EXPECT_THROW(parse_model("t()"), ValidationError);
  EXPECT_THROW(parse_model("normal(0,-1)"), ValidationError);
  EXPECT_THROW(parse_model("binomial(2.5,0.1)"), ValidationError);
  EXPECT_THROW(parse_model("product(1,2)"), ValidationError);
  EXPECT_THROW(parse_model("normal(normal(),1)"), ValidationError);
  EXPECT_THROW(parse_model("normal(mu=x)"), ValidationError);  // unresolved column
  EXPECT_THROW(parse_model(""), ValidationError);
}

TEST(ModelSpec, ColumnReferences) {
  const auto spec = parse_model_spec("binomial(trials=innings,prob=fitted)");
  EXPECT_EQ(spec_references(spec), (std::vector<std::string>{"innings", "fitted"}));
  const auto m = build_model(spec, [](const std::string& name) -> std::optional<double> {
    if (name == "innings") return 265.0;
    if (name == "fitted") return 0.148;
    return std::nullopt;
  });
  EXPECT_EQ(m.describe(), "binomial(trials=265,prob=0.148)");
}

TEST(Csv, ParsesQuotedFieldsAndReportsLines) {
  std::istringstream in("a,b,name\n1,2,\"x, y\"\n\n3, 4 ,\"he said \"\"hi\"\"\"\r\n");
  const auto t = read_csv(in);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.rows[0][2], "x, y");
  EXPECT_EQ(t.rows[1][2], "he said \"hi\"");
  EXPECT_EQ(t.number(1, 1), 4.0);
  EXPECT_EQ(t.lines[1], 4u);

  std::istringstream bad("a,b\n1,2\n3,oops\n");
  const auto tb = read_csv(bad);
  try {
    tb.number(1, 1);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::istringstream ragged("a,b\n1,2\n3\n");
  try {
    read_csv(ragged);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty), ValidationError);
  EXPECT_THROW(t.column("missing"), ValidationError);
}

TEST(TableScoring, ScalarModelDefaultsToFirstColumn) {
  std::ostringstream text;
  text << "value,label\n";
  const auto data = sample(DistributionModel::normal(0, 1), 1000, 5);
  for (std::size_t i = 0; i < data.size(); ++i) text << data[i][0] << ",r" << i << '\n';
  std::istringstream in(text.str());
  const auto table = read_csv(in);
  const auto r = score_table(table, {"normal(0,1)", TailMethod::empirical, 0.1, 0.01, 0, {}});
  EXPECT_EQ(r.value_columns, std::vector<std::string>{"value"});
  EXPECT_LE(r.report.flagged.size(), 10u);
  EXPECT_GE(r.report.flagged.size(), 5u);
  EXPECT_THROW(score_table(table, {"normal(0,1)", TailMethod::empirical, 0.1, 1.5, 0, {}}), ValidationError);
  EXPECT_THROW(score_table(table, {"normal(0,1)", TailMethod::empirical, 0.1, 0.01, 0, {"label"}}), ValidationError);
}

TEST(TableScoring, PerRowBinomialWithFittedProbability) {
  std::ostringstream text;
  text << "player,innings,notouts\n";
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const int k = 1 + static_cast<int>(rng() % 150);
    std::binomial_distribution<int> b(k, 0.13);
    text << "p" << i << ',' << k << ',' << b(rng) << '\n';
  }
  text << "outlier,200,90\n";
  std::istringstream in(text.str());
  const auto table = read_csv(in);
  for (auto method : {TailMethod::assumed, TailMethod::empirical, TailMethod::gpd}) {
    const auto r = score_table(table, {"binomial(trials=innings,prob=fitted)", method, 0.1, 0.01, 0, {"notouts"}});
    ASSERT_TRUE(r.smooth);
    const auto top = std::max_element(r.surprisals.begin(), r.surprisals.end()) - r.surprisals.begin();
    EXPECT_EQ(top, 300);
    EXPECT_EQ(r.report.flagged.back(), 300u);
  }
  EXPECT_THROW(score_table(table, {"normal(mu=fitted)", TailMethod::empirical, 0.1, 0.01, 0, {"notouts"}}),
               ValidationError);
}
