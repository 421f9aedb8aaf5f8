#include <doctest.h>

#include <cmath>

#include "gapforge/error.hpp"
#include "gapforge/tabular.hpp"
#include "test_support.hpp"

using namespace gapforge;

TEST_CASE("missing tokens mark cells missing") {
  const Table t = load_csv("a,b\n1,NaN\n2,3\n");
  REQUIRE(t.n_rows() == 2);
  const Column& a = t.column("a");
  const Column& b = t.column("b");
  CHECK(a.is_numeric());
  CHECK(a.missing_count() == 0);
  CHECK(a.value(0) == 1.0);
  CHECK(a.value(1) == 2.0);
  CHECK(b.is_missing(0));
  CHECK(b.value(1) == 3.0);
}

TEST_CASE("every default token is recognised") {
  const Table t = load_csv("a,b\nNaN,1\n,1\nnull,1\nundefined,1\nNA,1\nna,1\n7,1\n");
  CHECK(t.column("a").missing_count() == 6);
  CHECK(t.column("a").is_numeric());
}

TEST_CASE("custom tokens replace the defaults") {
  CsvOptions o;
  o.missing_tokens = {"?"};
  const Table t = load_csv("a,b\n?,x\nNaN,y\n", o);
  CHECK(t.column("a").is_categorical());
  CHECK(t.column("a").missing_count() == 1);
  CHECK(t.column("a").label(1) == "NaN");
}

TEST_CASE("the housing fragment loads with the expected kinds") {
  const Table t = test::fig1();
  CHECK(t.n_rows() == 8);
  CHECK(t.n_cols() == 5);
  CHECK(t.column("LotFrontage").is_numeric());
  CHECK(t.column("LotArea").is_numeric());
  CHECK(t.column("MasVnrType").is_categorical());
  CHECK(t.column("MasVnrArea").is_numeric());
  CHECK(t.column("BsmtQual").is_categorical());
  CHECK(t.column("BsmtQual").vocabulary() == std::vector<std::string>{"TA", "Gd"});
}

TEST_CASE("header only gives an empty table") {
  const Table t = load_csv("a,b,c\n");
  CHECK(t.n_rows() == 0);
  CHECK(t.n_cols() == 3);
  for (const auto& c : t.columns()) CHECK(c.size() == 0);
}

TEST_CASE("ragged rows report the row") {
  try {
    load_csv("a,b\n1,2\n3\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);  // header is record 1
  }
}

TEST_CASE("duplicate headers are a schema error") {
  CHECK_THROWS_AS(load_csv("a,a\n1,2\n"), SchemaError);
}

TEST_CASE("numeric hint on text is a type error naming the cell") {
  CsvOptions o;
  o.schema_hint["b"] = ColumnKind::Numeric;
  try {
    load_csv("a,b\n1,2\n3,abc\n", o);
    FAIL("expected a type error");
  } catch (const TypeMismatchError& e) {
    const std::string what = e.what();
    CHECK(what.find("'b'") != std::string::npos);
    CHECK(what.find("abc") != std::string::npos);
  }
}

TEST_CASE("categorical hint keeps numbers as labels") {
  CsvOptions o;
  o.schema_hint["a"] = ColumnKind::Categorical;
  const Table t = load_csv("a\n10\n2\n10\n", o);
  CHECK(t.column("a").is_categorical());
  CHECK(t.column("a").vocabulary() == std::vector<std::string>{"10", "2"});
}

TEST_CASE("quoted fields") {
  const Table t = load_csv("name,v\n\"a, b\",1\n\"say \"\"hi\"\"\",2\n\"  keep  \",3\r\n");
  const Column& n = t.column("name");
  CHECK(n.label(0) == "a, b");
  CHECK(n.label(1) == "say \"hi\"");
  CHECK(n.label(2) == "  keep  ");
  CHECK_THROWS_AS(load_csv("a\n\"open\n"), ParseError);
}

TEST_CASE("unquoted fields are trimmed") {
  const Table t = load_csv(" a , b \n 1 , x \n");
  CHECK(t.has_column("a"));
  CHECK(t.column("b").label(0) == "x");
  CHECK(t.column("a").value(0) == 1.0);
}

TEST_CASE("write_csv") {
  SUBCASE("empty table writes the header line") {
    const Table t = load_csv("a,b\n");
    CHECK(write_csv(t) == "a,b\n");
  }
  SUBCASE("missing cells use the token") {
    const Table t = load_csv("a,b\n1,NaN\n");
    CHECK(write_csv(t) == "a,b\n1,NaN\n");
    CHECK(write_csv(t, "NA") == "a,b\n1,NA\n");
  }
  SUBCASE("numbers use the shortest round-trip form") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(55.333333333333336) == "55.333333333333336");
    CHECK(format_number(1e21) == "1e+21");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  }
}

TEST_CASE("CSV round trip on random tables") {
  Rng rng(2024);
  for (int i = 0; i < 100; ++i) {
    const Table t = test::random_table(rng, 1 + rng.below(20), 1 + rng.below(5));
    const Table back = load_csv(write_csv(t));
    REQUIRE(back == t);
  }
}

TEST_CASE("profile of the housing fragment") {
  const MissingnessProfile p = profile(test::fig1());
  REQUIRE(p.columns.size() == 5);
  const std::vector<std::pair<std::string, std::size_t>> expected{
      {"LotFrontage", 5}, {"LotArea", 0}, {"MasVnrType", 4}, {"MasVnrArea", 1}, {"BsmtQual", 1}};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(p.columns[i].name == expected[i].first);
    CHECK(p.columns[i].missing_count == expected[i].second);
    CHECK(p.columns[i].missing_fraction == static_cast<double>(expected[i].second) / 8.0);
  }
  CHECK(p.total_missing_cells == 11);
  CHECK(p.n_rows == 8);
}

TEST_CASE("profile matches a cell-by-cell count") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Table t = test::random_table(rng, 1 + rng.below(30), 1 + rng.below(6));
    const MissingnessProfile p = profile(t);
    std::size_t total = 0;
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      std::size_t count = 0;
      for (std::size_t r = 0; r < t.n_rows(); ++r) count += t.column(c).missing_mask()[r];
      CHECK(p.columns[c].missing_count == count);
      CHECK(p.columns[c].missing_fraction * static_cast<double>(t.n_rows()) ==
            doctest::Approx(static_cast<double>(count)));
      total += count;
    }
    CHECK(p.total_missing_cells == total);
  }
}

TEST_CASE("train_test_split") {
  const Table t = load_csv("i\n0\n1\n2\n3\n4\n5\n6\n7\n8\n9\n");
  SUBCASE("fraction 0.3 of 10 rows") {
    const auto [train, test] = train_test_split(t, 0.3, 7);
    CHECK(train.n_rows() == 3);
    CHECK(test.n_rows() == 7);
    std::vector<double> all;
    for (const auto* part : {&train, &test}) {
      for (std::size_t r = 0; r < part->n_rows(); ++r) all.push_back(part->column("i").value(r));
    }
    std::sort(all.begin(), all.end());
    for (std::size_t r = 0; r < 10; ++r) CHECK(all[r] == static_cast<double>(r));
  }
  SUBCASE("fraction 1 keeps everything") {
    const auto [train, test] = train_test_split(t, 1.0, 3);
    CHECK(train.n_rows() == 10);
    CHECK(test.n_rows() == 0);
  }
  SUBCASE("same seed, same split; parts follow the permutation") {
    const SplitIndices a = split_indices(10, 0.5, 11);
    const SplitIndices b = split_indices(10, 0.5, 11);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    const auto [train, test] = train_test_split(t, 0.5, 11);
    for (std::size_t k = 0; k < a.train.size(); ++k) {
      CHECK(train.column("i").value(k) == static_cast<double>(a.train[k]));
    }
  }
  SUBCASE("tiny fractions keep both parts nonempty") {
    const SplitIndices s = split_indices(10, 0.01, 1);
    CHECK(s.train.size() == 1);
    CHECK(split_indices(10, 0.99, 1).test.size() == 1);
    CHECK(split_indices(10, 0.25, 1).train.size() == 3);  // 2.5 rounds up
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(split_indices(10, 0.0, 1), DomainError);
    CHECK_THROWS_AS(split_indices(10, 1.5, 1), DomainError);
    CHECK_THROWS_AS(split_indices(1, 0.5, 1), DomainError);
  }
}

TEST_CASE("drop_rows_with_missing") {
  SUBCASE("complete table is unchanged") {
    const Table t = load_csv("a,b\n1,x\n2,y\n");
    CHECK(drop_rows_with_missing(t) == t);
  }
  SUBCASE("every fragment row has a gap") {
    // Rows 1, 5 and 6 still miss MasVnrType or LotFrontage, so nothing survives.
    const Table t = test::fig1();
    const Table kept = drop_rows_with_missing(t);
    CHECK(kept.n_rows() == 0);
    CHECK(kept.column_names() == t.column_names());
  }
  SUBCASE("output has no missing cells") {
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
      const Table t = test::random_table(rng, 20, 4);
      const Table kept = drop_rows_with_missing(t);
      CHECK(kept.missing_cells() == 0);
      std::size_t complete = 0;
      for (std::size_t r = 0; r < t.n_rows(); ++r) {
        bool ok = true;
        for (const auto& c : t.columns()) ok = ok && c.is_observed(r);
        complete += ok ? 1 : 0;
      }
      CHECK(kept.n_rows() == complete);
    }
  }
}

TEST_CASE("drop_columns_by_missing_fraction") {
  const Table t = test::fig1();
  CHECK(drop_columns_by_missing_fraction(t, 1.0) == t);
  CHECK(drop_columns_by_missing_fraction(t, 0.0).column_names() == std::vector<std::string>{"LotArea"});
  // MasVnrType sits exactly at 0.5 and is kept.
  CHECK(drop_columns_by_missing_fraction(t, 0.5).column_names() ==
        std::vector<std::string>{"LotArea", "MasVnrType", "MasVnrArea", "BsmtQual"});
  CHECK_THROWS_AS(drop_columns_by_missing_fraction(t, 1.5), DomainError);
}

TEST_CASE("column invariants") {
  CHECK_THROWS_AS(Column::numeric("a", {1.0, NAN}), TypeMismatchError);
  CHECK_NOTHROW(Column::numeric("a", {1.0, NAN}, {0, 1}));
  CHECK_THROWS_AS(Column::categorical("c", {"x"}, {0.0, 1.0}), TypeMismatchError);
  CHECK_THROWS_AS(Table({Column::numeric("a", {1.0}), Column::numeric("a", {2.0})}), SchemaError);
  CHECK_THROWS_AS(Table({Column::numeric("a", {1.0}), Column::numeric("b", {2.0, 3.0})}), SchemaError);
  CHECK_THROWS_AS(test::fig1().column("nope"), NameError);
}
