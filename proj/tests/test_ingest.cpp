#include <gtest/gtest.h>

#include "cadence/ingest.hpp"

#include <sstream>

using cadence::CalendarConfig;
using cadence::Date;
using cadence::ReceiptRecord;

namespace {

cadence::ReceiptParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return cadence::parse_receipts(in);
}

cadence::DemographicParseResult parse_demo(const std::string& text) {
  std::istringstream in(text);
  return cadence::parse_demographics(in);
}

ReceiptRecord rec(const std::string& user, int y, int m, int d) {
  ReceiptRecord r;
  r.user_id = user;
  r.date = Date{y, m, d};
  return r;
}

}  // namespace

TEST(Dates, KnownAnchors) {
  EXPECT_EQ(cadence::days_from_civil(Date{1970, 1, 1}), 0);
  EXPECT_EQ(cadence::weekday_index(Date{1970, 1, 1}), 3);   // Thursday
  EXPECT_EQ(cadence::weekday_index(Date{2017, 4, 3}), 0);   // Monday
  EXPECT_EQ(cadence::weekday_index(Date{2017, 4, 1}), 5);   // Saturday
  EXPECT_EQ(cadence::weekday_index(Date{2018, 1, 21}), 6);  // Sunday
}

TEST(Dates, RoundTripAndValidation) {
  for (long day : {-1000L, 0L, 17257L, 20000L}) {
    const Date d = cadence::civil_from_days(day);
    EXPECT_EQ(cadence::days_from_civil(d), day);
  }
  EXPECT_TRUE(cadence::parse_date("2000-02-29").has_value());
  EXPECT_FALSE(cadence::parse_date("2001-02-29").has_value());
  EXPECT_FALSE(cadence::parse_date("2017-13-01").has_value());
  EXPECT_FALSE(cadence::parse_date("2017-00-10").has_value());
  EXPECT_FALSE(cadence::parse_date("2017-1-01").has_value());
  EXPECT_FALSE(cadence::parse_date("17-01-01").has_value());
  EXPECT_EQ(cadence::format_date(Date{2017, 4, 3}), "2017-04-03");
}

TEST(ParseReceipts, EmptyFileWithHeader) {
  const auto res = parse("user_id,date,item,price\n");
  EXPECT_EQ(res.records.size(), 0u);
  EXPECT_EQ(res.report.rows_total, 0);
  EXPECT_EQ(res.report.rows_bad, 0);
}

TEST(ParseReceipts, MissingHeaderIsFatal) {
  std::istringstream in("u1,2017-04-03,milk,1.5\n");
  EXPECT_THROW(cadence::parse_receipts(in), std::runtime_error);
}

TEST(ParseReceipts, BadDateRowSkippedAndReported) {
  const auto res = parse("user_id,date,item,price\nu1,2017-04-32,milk,1.5\n");
  EXPECT_EQ(res.records.size(), 0u);
  EXPECT_EQ(res.report.rows_bad, 1);
  ASSERT_EQ(res.report.errors.size(), 1u);
  EXPECT_NE(res.report.errors[0].find("row 2"), std::string::npos);
}

TEST(ParseReceipts, FixtureWithOneMalformedRow) {
  const auto res = parse(
      "user_id,date,item,price\n"
      "u1,2017-04-03,milk,1.50\n"
      "u1,2017-04-04,\"bread, sliced\",2\n"
      "u2,2017-04-04,eggs,\n"
      "u2,not-a-date,cheese,3\n"
      "u3,2017-04-05,apples,0.99\n");
  EXPECT_EQ(res.records.size(), 4u);
  EXPECT_EQ(res.report.rows_ok, 4);
  EXPECT_EQ(res.report.rows_bad, 1);
  EXPECT_EQ(res.records[1].item, "bread, sliced");
  EXPECT_FALSE(res.records[2].has_price);
  EXPECT_TRUE(res.records[0].has_price);
}

TEST(ParseReceipts, NegativePriceRejected) {
  const auto res = parse("user_id,date,item,price\nu1,2017-04-03,milk,-2\n");
  EXPECT_EQ(res.records.size(), 0u);
  EXPECT_EQ(res.report.rows_bad, 1);
}

TEST(BuildTensor, SingleRecordOnFirstMonday) {
  const CalendarConfig cal{Date{2017, 4, 1}, Date{2017, 4, 30}, 0, false};
  const auto res = cadence::build_tensor({rec("u1", 2017, 4, 3)}, cal);
  EXPECT_EQ(res.tensor.dim0(), 1);
  EXPECT_EQ(res.tensor.dim1(), 7);
  EXPECT_EQ(res.tensor(0, 0, 0), 1.0);
  EXPECT_EQ(res.first_week_start, (Date{2017, 4, 3}));
  EXPECT_EQ(res.included, 1);
}

TEST(BuildTensor, RepeatedCellAccumulates) {
  const CalendarConfig cal{Date{2017, 4, 1}, Date{2017, 4, 30}, 0, false};
  const auto res = cadence::build_tensor(
      {rec("u1", 2017, 4, 3), rec("u1", 2017, 4, 3)}, cal);
  EXPECT_EQ(res.tensor(0, 0, 0), 2.0);
}

TEST(BuildTensor, HandTabulatedThreeWeeks) {
  // Window 2017-04-03 (Mon) .. 2017-04-23 (Sun): exactly 3 full weeks.
  const CalendarConfig cal{Date{2017, 4, 3}, Date{2017, 4, 23}, 0, false};
  const std::vector<ReceiptRecord> records = {
      rec("a", 2017, 4, 3),   // week 0, Monday
      rec("a", 2017, 4, 9),   // week 0, Sunday
      rec("b", 2017, 4, 11),  // week 1, Tuesday
      rec("a", 2017, 4, 19),  // week 2, Wednesday
      rec("b", 2017, 4, 23),  // week 2, Sunday
  };
  const auto res = cadence::build_tensor(records, cal);
  EXPECT_EQ(res.tensor.dim0(), 2);
  EXPECT_EQ(res.tensor.dim2(), 3);
  EXPECT_EQ(res.tensor(0, 0, 0), 1.0);
  EXPECT_EQ(res.tensor(0, 6, 0), 1.0);
  EXPECT_EQ(res.tensor(1, 1, 1), 1.0);
  EXPECT_EQ(res.tensor(0, 2, 2), 1.0);
  EXPECT_EQ(res.tensor(1, 6, 2), 1.0);
  double mass = 0.0;
  for (double v : res.tensor.data()) mass += v;
  EXPECT_EQ(mass, 5.0);  // conservation of counts
  EXPECT_EQ(res.users[0], "a");  // first-appearance order
  EXPECT_EQ(res.users[1], "b");
}

TEST(BuildTensor, OutOfWindowAndGridTailCounted) {
  // Window ends mid-week: 2017-04-03 .. 2017-04-26 (Wed) keeps 3 full weeks;
  // the 24th-26th fall inside the window but off the full-week grid.
  const CalendarConfig cal{Date{2017, 4, 3}, Date{2017, 4, 26}, 0, false};
  const std::vector<ReceiptRecord> records = {
      rec("a", 2017, 4, 2),   // before the window
      rec("a", 2017, 4, 10),  // included
      rec("a", 2017, 4, 25),  // inside the window, beyond the last full week
      rec("a", 2017, 5, 2),   // after the window
  };
  const auto res = cadence::build_tensor(records, cal);
  EXPECT_EQ(res.included, 1);
  EXPECT_EQ(res.out_of_window, 2);
  EXPECT_EQ(res.outside_week_grid, 1);
  EXPECT_EQ(res.tensor.dim2(), 3);
}

TEST(BuildTensor, PartialWeekPolicyKeepsBoundaryDays) {
  const CalendarConfig cal{Date{2017, 4, 1}, Date{2017, 4, 26}, 0, true};
  const auto res = cadence::build_tensor(
      {rec("a", 2017, 4, 1), rec("a", 2017, 4, 25)}, cal);
  // Week grid starts the Monday before the window start.
  EXPECT_EQ(res.first_week_start, (Date{2017, 3, 27}));
  EXPECT_EQ(res.included, 2);
  EXPECT_EQ(res.tensor(0, 5, 0), 1.0);  // April 1st was a Saturday
}

TEST(BuildTensor, PaperWindowYieldsFortyTwoWeeks) {
  const CalendarConfig cal{Date{2017, 4, 1}, Date{2018, 1, 21}, 0, false};
  const auto res = cadence::build_tensor({rec("u", 2017, 6, 1)}, cal);
  EXPECT_EQ(res.tensor.dim2(), 42);
}

TEST(BuildTensor, NoCountableWeekIsConfigError) {
  const CalendarConfig cal{Date{2017, 4, 4}, Date{2017, 4, 8}, 0, false};
  EXPECT_THROW(cadence::build_tensor({rec("u", 2017, 4, 5)}, cal),
               std::invalid_argument);
}

TEST(BuildTensor, EmptyWindowIsConfigError) {
  const CalendarConfig cal{Date{2017, 4, 3}, Date{2017, 4, 23}, 0, false};
  EXPECT_THROW(cadence::build_tensor({rec("u", 2019, 1, 1)}, cal),
               std::invalid_argument);
}

TEST(BuildTensor, StartAfterEndThrows) {
  const CalendarConfig cal{Date{2018, 1, 1}, Date{2017, 1, 1}, 0, false};
  EXPECT_THROW(cadence::build_tensor({}, cal), std::invalid_argument);
}

TEST(ParseDemographics, ValidFixture) {
  const auto res = parse_demo(
      "user_id,gender,age_cohort,marital,child\n"
      "u1,Female,3,Married,Yes\n"
      "u2,Male,1,Unmarried,No\n"
      "u3,Female,6,Married,No\n"
      "u4,Male,2,Unmarried,Yes\n");
  EXPECT_EQ(res.table.size(), 4u);
  EXPECT_EQ(res.report.rows_bad, 0);
  const auto* u1 = res.table.find("u1");
  ASSERT_NE(u1, nullptr);
  EXPECT_EQ(u1->gender, 0);
  EXPECT_EQ(u1->age_cohort, 2);
  EXPECT_EQ(u1->child, 1);
}

TEST(ParseDemographics, OutOfRangeCohortRejected) {
  const auto res = parse_demo(
      "user_id,gender,age_cohort,marital,child\nu1,Female,7,Married,No\n");
  EXPECT_EQ(res.table.size(), 0u);
  EXPECT_EQ(res.report.rows_bad, 1);
}

TEST(ParseDemographics, DuplicateUserRejected) {
  const auto res = parse_demo(
      "user_id,gender,age_cohort,marital,child\n"
      "u1,Female,3,Married,No\n"
      "u1,Male,2,Unmarried,Yes\n");
  EXPECT_EQ(res.table.size(), 1u);
  EXPECT_EQ(res.report.rows_bad, 1);
  EXPECT_EQ(res.table.find("u1")->gender, 0);  // first occurrence kept
}

TEST(ParseDemographics, UnknownCategoryRejected) {
  const auto res = parse_demo(
      "user_id,gender,age_cohort,marital,child\nu1,Other,3,Married,No\n");
  EXPECT_EQ(res.table.size(), 0u);
  EXPECT_EQ(res.report.rows_bad, 1);
}
