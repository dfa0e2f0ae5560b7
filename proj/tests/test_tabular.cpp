#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "skyforge/csv.hpp"
#include "skyforge/errors.hpp"
#include "skyforge/universal.hpp"

using namespace skyforge;

namespace {

Relation numeric_pair(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back({xs[i], ys[i]});
  return Relation("t", {"x", "y"}, {ColumnType::Float, ColumnType::Float}, rows);
}

// Best split of sorted values into two contiguous groups by SSE, tried exhaustively.
std::pair<double, double> two_means_oracle(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> means;
  for (std::size_t cut = 1; cut < v.size(); ++cut) {
    auto mean = [](auto b, auto e) { return std::accumulate(b, e, 0.0) / static_cast<double>(e - b); };
    double m1 = mean(v.begin(), v.begin() + cut), m2 = mean(v.begin() + cut, v.end());
    double sse = 0;
    for (std::size_t i = 0; i < v.size(); ++i) sse += std::pow(v[i] - (i < cut ? m1 : m2), 2);
    if (sse < best) best = sse, means = {m1, m2};
  }
  return means;
}

}  // namespace

TEST_CASE("csv parsing handles quotes, nulls and types") {
  auto rel = parse_csv("id,name,score\n1,\"a, b\",2.5\n2,\"say \"\"hi\"\"\",\r\n3,,4\n", "t");
  REQUIRE(rel.num_rows() == 3);
  CHECK(rel.types()[0] == ColumnType::Integer);
  CHECK(rel.types()[1] == ColumnType::String);
  CHECK(rel.types()[2] == ColumnType::Float);
  CHECK(std::get<std::string>(rel.rows()[0][1]) == "a, b");
  CHECK(std::get<std::string>(rel.rows()[1][1]) == "say \"hi\"");
  CHECK(is_null(rel.rows()[1][2]));
  CHECK(is_null(rel.rows()[2][1]));
  CHECK(rel.adom("name").size() == 2);
  CHECK_THROWS_AS(parse_csv("a\nx\"y\n", "bad"), ParseError);
}

TEST_CASE("csv round trip") {
  auto rel = parse_csv("a,b\n1,\"x,y\"\n,z\n", "t");
  std::ostringstream out;
  write_csv(out, rel);
  auto again = parse_csv(out.str(), "t");
  REQUIRE(again.num_rows() == rel.num_rows());
  for (std::size_t r = 0; r < rel.num_rows(); ++r)
    for (std::size_t c = 0; c < rel.num_cols(); ++c) CHECK(cell_equal(rel.rows()[r][c], again.rows()[r][c]));
}

TEST_CASE("relation invariants") {
  CHECK_THROWS_AS(Relation("t", {"a", "a"}, {ColumnType::Integer, ColumnType::Integer}, {}), SchemaConflictError);
  CHECK_THROWS_AS(Relation("t", {"a"}, {ColumnType::Integer}, {{Cell{1}, Cell{2}}}), ArgumentError);
  Relation r("t", {"a"}, {ColumnType::Integer}, {{std::int64_t{3}}, {std::int64_t{1}}, {std::int64_t{3}}, {std::monostate{}}});
  CHECK(r.adom("a").size() == 2);
  CHECK(r.total_weight() == 4);
}

TEST_CASE("full outer join on a shared key") {
  auto l = parse_csv("id,x\n1,a\n2,b\n", "l");
  auto r = parse_csv("id,y\n1,c\n2,d\n", "r");
  auto u = build_universal({l, r}, {{"l", "r", {{"id", "id"}}}});
  CHECK(u.relation().num_rows() == 2);
  CHECK(u.relation().num_cols() == 3);
  CHECK(u.provenance().at("y") == "r");

  auto r2 = parse_csv("id,y\n3,c\n4,d\n", "r");
  auto v = build_universal({l, r2}, {{"l", "r", {{"id", "id"}}}});
  CHECK(v.relation().num_rows() == 4);
  std::size_t nulls = 0;
  for (const auto& row : v.relation().rows())
    for (const auto& c : row) nulls += is_null(c);
  CHECK(nulls == 4);
}

TEST_CASE("join errors") {
  auto l = parse_csv("id,x\n1,a\n", "l");
  auto r = parse_csv("id,x\n1,b\n", "r");
  CHECK_THROWS_AS(build_universal({l, r}, {{"l", "r", {{"id", "id"}}}}), SchemaConflictError);
  CHECK_THROWS_AS(build_universal({l, parse_csv("k,z\n1,b\n", "r")}, {}), ArgumentError);
  CHECK_THROWS_AS(build_universal({}, {}), ArgumentError);
}

TEST_CASE("literals are capped by the active domain and the cluster limit") {
  Relation r("t", {"a"}, {ColumnType::Integer}, {{std::int64_t{1}}, {std::int64_t{2}}, {std::int64_t{3}}});
  UniversalTable u(r, {});
  CHECK(derive_literals(u, "a", 30).size() == 3);
  CHECK(kDefaultMaxClusters == 30);
  CHECK_THROWS_AS(derive_literals(u, "a", 0), ArgumentError);
  CHECK_THROWS_AS(derive_literals(u, "zz", 3), ArgumentError);
}

TEST_CASE("numeric literals follow the optimal two-group split") {
  std::vector<double> xs{0, 0.1, 0.2, 9.8, 9.9, 10.0};
  auto rel = numeric_pair(xs, xs);
  UniversalTable u(rel, {});
  auto lits = derive_literals(u, "x", 2);
  REQUIRE(lits.size() == 2);
  auto [m1, m2] = two_means_oracle(xs);
  CHECK(as_double(lits[0].value) == doctest::Approx(m1));
  CHECK(as_double(lits[1].value) == doctest::Approx(m2));
}

TEST_CASE("categorical literals keep the most frequent values") {
  auto rel = parse_csv("c\nx\ny\ny\nz\ny\nx\n", "t");
  UniversalTable u(rel, {});
  auto lits = derive_literals(u, "c", 2);
  REQUIRE(lits.size() == 2);
  CHECK(std::get<std::string>(lits[0].value) == "y");
  CHECK(std::get<std::string>(lits[1].value) == "x");
}

TEST_CASE("row compression") {
  SUBCASE("identical rows merge with their multiplicity") {
    auto rel = parse_csv("a,b\n1,x\n1,x\n1,x\n1,x\n", "t");
    auto u = compress_rows(derive_all_literals(UniversalTable(rel, {})));
    CHECK(u.relation().num_rows() == 1);
    CHECK(u.relation().weight(0) == 4);
  }
  SUBCASE("representative cells are a fixed point") {
    auto rel = parse_csv("a,b\n1,x\n2,y\n3,x\n", "t");
    auto u = compress_rows(derive_all_literals(UniversalTable(rel, {})));
    CHECK(u.relation().num_rows() == 3);
    CHECK(compress_rows(u).relation().num_rows() == 3);
  }
  SUBCASE("clustered numeric rows collapse to the distinct cluster pairs") {
    std::vector<double> xs{0, 0.1, 0.2, 9.8, 9.9, 10.0};
    std::vector<double> ys{10.0, 0.1, 9.9, 0.2, 9.8, 0};
    auto u = compress_rows(derive_all_literals(UniversalTable(numeric_pair(xs, ys), {}), 2));
    std::set<std::pair<bool, bool>> groups;
    for (std::size_t i = 0; i < xs.size(); ++i) groups.insert({xs[i] > 5, ys[i] > 5});
    CHECK(u.relation().num_rows() == groups.size());
    CHECK(u.relation().num_rows() <= 4);
    CHECK(u.relation().total_weight() == 6);
  }
  CHECK_THROWS_AS(compress_rows(UniversalTable(parse_csv("a\n1\n", "t"), {})), ArgumentError);
}
