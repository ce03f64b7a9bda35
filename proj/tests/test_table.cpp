#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "exactdif/csv_io.hpp"
#include "exactdif/error.hpp"
#include "exactdif/examples.hpp"
#include "exactdif/logfact.hpp"

using namespace exactdif;

TEST_CASE("canonical order of the item-17 table") {
  const auto t = hci_item17().table;
  const std::vector<Count> expect{4,  2,  10, 7,  27, 19, 14, 24, 14, 47, 5,  20,
                                  11, 10, 32, 30, 61, 66, 49, 83, 35, 67, 3,  11};
  CHECK(to_canonical(t) == expect);
  CHECK(t.total() == 651);
  const auto back = ContingencyTable::from_canonical(t.axes(), expect);
  CHECK(back == t);
}

TEST_CASE("orderings are permutations") {
  for (std::size_t na : {2u, 3u, 5u})
    for (std::size_t nr : {2u, 3u, 4u}) {
      const auto axes = AxisSpec::uniform(na, nr);
      const auto ord = CellOrdering::canonical(axes);
      std::vector<int> hit(axes.num_cells(), 0);
      for (std::size_t k = 0; k < ord.size(); ++k) {
        ++hit[ord.natural_index(k)];
        CHECK(ord.position_of(ord.natural_index(k)) == k);
      }
      CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
    }
}

TEST_CASE("marginals") {
  const auto t = hci_item17().table;
  const auto ag = marginal(t, {Axis::ability, Axis::group});
  CHECK(ag.size() == 12);
  CHECK(ag[0] == 15);   // a=0, g=0: 11 + 4
  CHECK(ag[11] == 31);  // a=5, g=1: 11 + 20
  const auto r = marginal(t, {Axis::response});
  CHECK(r[0] + r[1] == t.total());
  CHECK_THROWS_AS(marginal(t, AxisSet{}), InvalidArgument);
}

TEST_CASE("log_uprob matches lgamma") {
  const auto t = hci_item17().table;
  double ref = 0;
  for (Count c : t.natural_counts()) ref -= std::lgamma(static_cast<double>(c) + 1.0);
  CHECK(log_uprob(t) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(log_factorial(0) == 0.0);
  CHECK(log_factorial(200000) == doctest::Approx(std::lgamma(200001.0)));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(ContingencyTable(AxisSpec::uniform(2, 2), {1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(ContingencyTable(AxisSpec::uniform(1, 2), {1, -2, 3, 4}), InvalidArgument);
  CHECK_THROWS_AS(AxisSpec::uniform(2, 1).validate(), InvalidArgument);
  CHECK(AxisSpec::uniform(6, 2).shape_string() == "6x2x2");
}

TEST_CASE("discretize: equal width, right closed") {
  const std::vector<double> x{0, 1, 2, 3, 4, 5, 6};
  CHECK(discretize(x, 3) == std::vector<std::int64_t>{0, 0, 0, 1, 1, 2, 2});
  CHECK(discretize(x, 2) == std::vector<std::int64_t>{0, 0, 0, 0, 1, 1, 1});
  CHECK_THROWS_AS(discretize(std::vector<double>{1, 1}, 3), InvalidArgument);
}

TEST_CASE("long CSV round trip") {
  std::ostringstream out;
  write_long_csv(out, {hci_item17()});
  std::istringstream in(out.str());
  const auto items = read_csv(in);
  REQUIRE(items.size() == 1);
  CHECK(items[0].name == "17");
  CHECK(items[0].table == hci_item17().table);
}

TEST_CASE("bundled long CSV equals the built-in table") {
  const auto items = read_csv(std::filesystem::path(EXACTDIF_DATA_DIR) / "hci_item17.csv");
  REQUIRE(items.size() == 1);
  CHECK(items[0].table == hci_item17().table);
}

TEST_CASE("respondent-level CSV") {
  std::istringstream in(
      "total,major,Item1,Item2\n"
      "0,0,0,1\n"
      "10,1,1,1\n"
      "5,0,1,NA\n"
      "NA,1,0,0\n"
      "4,1,0,0\n");
  RespondentSchema s;
  s.bins = 2;
  const auto items = read_csv(in, s);
  REQUIRE(items.size() == 2);
  const auto& t = items[0].table;
  CHECK(t.total() == 4);
  CHECK(t.at(0, 0, 0) == 1);  // total 0
  CHECK(t.at(0, 0, 1) == 1);  // total 5 falls in the first (closed) bin
  CHECK(t.at(0, 1, 0) == 1);  // total 4
  CHECK(t.at(1, 1, 1) == 1);  // total 10
  CHECK(items[1].table.total() == 3);
}

TEST_CASE("CSV errors") {
  std::istringstream bad("item,a,g,r,count\n1,0,2,0,5\n");
  CHECK_THROWS_AS(read_csv(bad), ParseError);
  std::istringstream neg("a,g,r,count\n0,0,0,-1\n");
  CHECK_THROWS_AS(read_csv(neg), ParseError);
  std::istringstream empty("");
  CHECK(read_csv(empty).empty());
}
