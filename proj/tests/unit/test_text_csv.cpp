#include <doctest.h>

#include <sstream>

#include "crowdimpute/csv.hpp"
#include "crowdimpute/text.hpp"

using namespace crowdimpute;

TEST_CASE("format_number prints the shortest round-trip form") {
  CHECK(format_number(10.0) == "10");
  CHECK(format_number(2.5) == "2.5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0) == "0");
}

TEST_CASE("format_1dp rounds to one decimal and never prints negative zero") {
  CHECK(format_1dp(6.0) == "6.0");
  CHECK(format_1dp(14.75) == "14.8");
  CHECK(format_1dp(-0.04) == "0.0");
}

TEST_CASE("parse_number accepts whole-field decimals only") {
  double v = 0.0;
  CHECK(parse_number(" 12.5 ", v));
  CHECK(v == 12.5);
  CHECK(parse_number("+3", v));
  CHECK(v == 3.0);
  CHECK_FALSE(parse_number("12 years", v));
  CHECK_FALSE(parse_number("", v));
  CHECK_FALSE(parse_number("nan", v));
  CHECK_FALSE(parse_number("inf", v));
}

TEST_CASE("join_phrase uses commas and a final 'and'") {
  CHECK(join_phrase({}) == "");
  CHECK(join_phrase({"a"}) == "a");
  CHECK(join_phrase({"a", "b"}) == "a and b");
  CHECK(join_phrase({"a", "b", "c"}) == "a, b and c");
}

TEST_CASE("csv reader handles quotes, escapes, CRLF and blank lines") {
  std::istringstream in("a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\r\n\"multi\nline\",2\n");
  csv::Reader reader(in);
  csv::Record rec;
  REQUIRE(reader.next(rec));
  CHECK(rec == csv::Record{"a", "b"});
  REQUIRE(reader.next(rec));
  CHECK(rec == csv::Record{"x, y", "say \"hi\""});
  REQUIRE(reader.next(rec));
  CHECK(reader.line() == 4);
  CHECK(rec == csv::Record{"multi\nline", "2"});
  CHECK_FALSE(reader.next(rec));
}

TEST_CASE("csv writer quotes only when needed and round-trips") {
  CHECK(csv::quote("plain") == "plain");
  CHECK(csv::quote("a,b") == "\"a,b\"");
  CHECK(csv::quote("q\"") == "\"q\"\"\"");

  const csv::Record original{"plain", "with,comma", "with \"quote\"", "two\nlines", ""};
  std::ostringstream out;
  csv::write_record(out, original);
  std::istringstream in(out.str());
  csv::Reader reader(in);
  csv::Record back;
  REQUIRE(reader.next(back));
  CHECK(back == original);
}
