#include "doctest.h"

#include <sstream>

#include "ijcomb/error.hpp"
#include "ijcomb/tabular.hpp"

using namespace ijcomb;

namespace {

TabularData read(const std::string& text, const TabularSchema& schema) {
  std::istringstream in(text);
  return ingest_csv(in, schema);
}

}  // namespace

TEST_CASE("categorical columns expand to one indicator per level") {
  const std::string csv =
      "price,area,district,floor\n"
      "10,50,west,3\n"
      "20,70,east,1\n"
      "15,60,north,2\n"
      "12,55,east,5\n";
  TabularSchema s;
  s.target = "price";
  s.categorical = {"district"};
  const TabularData t = read(csv, s);
  REQUIRE(t.columns.size() == 5);
  CHECK(t.columns[0] == "area");
  CHECK(t.columns[1] == "district=east");
  CHECK(t.columns[2] == "district=north");
  CHECK(t.columns[3] == "district=west");
  CHECK(t.columns[4] == "floor");
  CHECK(t.data.size() == 4);
  CHECK(t.data.X(0, 3) == 1.0);
  CHECK(t.data.X(0, 1) == 0.0);
  CHECK(t.data.X(1, 1) == 1.0);
  CHECK(t.data.X.block(0, 1, 4, 3).rowwise().sum().isOnes());
  CHECK(t.data.y[2] == 15.0);
}

TEST_CASE("rows with a missing cell are dropped") {
  const std::string csv =
      "y,a,b\n"
      "1,2,3\n"
      "2,,4\n"
      "3,NA,5\n"
      "4,6,7\n";
  TabularSchema s;
  s.target = "y";
  const TabularData t = read(csv, s);
  CHECK(t.rows_read == 4);
  CHECK(t.rows_dropped == 2);
  CHECK(t.data.size() == 2);
  const std::string one = "y,a\n1,2\n,3\n4,5\n";
  CHECK(read(one, s).data.size() == 2);
  s.drop_missing = false;
  CHECK_THROWS_AS(read(one, s), Error);
}

TEST_CASE("log target") {
  TabularSchema s;
  s.target = "y";
  s.log_target = true;
  const TabularData t = read("y,x\n1.0,3\n", s);
  CHECK(t.data.y[0] == 0.0);
  try {
    read("y,x\n0,3\n", s);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("schema errors") {
  TabularSchema s;
  s.target = "missing";
  CHECK_THROWS_AS(read("y,x\n1,2\n", s), Error);
  s.target = "y";
  try {
    read("y,x\nNA,2\n", s);
    FAIL("expected empty data");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_data);
  }
  CHECK_THROWS_AS(read("y,x\n1,abc\n", s), Error);
  CHECK_THROWS_AS(read("y,x\n1,2,3\n", s), Error);
  s.categorical = {"nope"};
  CHECK_THROWS_AS(read("y,x\n1,2\n", s), Error);
}

TEST_CASE("quoted fields and dropped columns") {
  const auto cells = split_csv_line(R"(a,"b,c","say ""hi""", d )");
  REQUIRE(cells.size() == 4);
  CHECK(cells[1] == "b,c");
  CHECK(cells[2] == "say \"hi\"");
  CHECK(cells[3] == "d");
  TabularSchema s;
  s.target = "y";
  s.drop = {"id"};
  const TabularData t = read("id,y,x\nabc,1,2\n,3,4\n", s);
  CHECK(t.columns == std::vector<std::string>{"x"});
  CHECK(t.data.size() == 2);  // a blank dropped column is not "missing"
}

TEST_CASE("a single indicator level can be dropped") {
  const std::string csv = "y,g\n1,a\n2,b\n3,c\n";
  TabularSchema s;
  s.target = "y";
  s.categorical = {"g"};
  s.drop = {"g=a"};
  const TabularData t = read(csv, s);
  CHECK(t.columns == std::vector<std::string>{"g=b", "g=c"});
  CHECK(t.data.X.row(0).isZero());
  s.drop = {"g=z"};
  CHECK_THROWS_AS(read(csv, s), Error);
  s.categorical = {};
  s.drop = {"g=a"};
  CHECK_THROWS_AS(read(csv, s), Error);
}
