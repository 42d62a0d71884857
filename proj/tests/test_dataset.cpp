#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <unistd.h>

#include "clvboost/dataset.hpp"
#include "clvboost/errors.hpp"
#include "oracles.hpp"

using namespace clvboost;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("clvboost_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) const {
    const std::string full = (path / name).string();
    std::ofstream out(full);
    out << content;
    return full;
  }
};

}  // namespace

TEST_CASE("csv loading") {
  TempDir dir;
  SUBCASE("plain numeric file") {
    const auto path = dir.file("a.csv", "a,b\n1,2\n3,4\n5,6\n");
    const Dataset data = load_csv(path);
    CHECK(data.p() == 2);
    CHECK(data.n() == 3);
    CHECK(data.var_names == std::vector<std::string>{"a", "b"});
    CHECK(data.values(2, 1) == 6.0);
    CHECK_FALSE(data.response.has_value());
  }
  SUBCASE("response column split off") {
    const auto path = dir.file("b.csv", "a,y,b\n1,9,2\n3,8,4\n5,7,6\n");
    const Dataset data = load_csv(path, std::string("y"));
    CHECK(data.p() == 2);
    CHECK(data.response.has_value());
    CHECK((*data.response)[0] == 9.0);
    CHECK(data.var_names == std::vector<std::string>{"a", "b"});
  }
  SUBCASE("NA cell is rejected with its location") {
    const auto path = dir.file("c.csv", "a,b\n1,2\n3,NA\n5,6\n");
    CHECK_THROWS_WITH_AS(load_csv(path),
                         "non-numeric cell at row 2, column 'b'", DataError);
  }
  SUBCASE("nan and inf are rejected") {
    const auto path = dir.file("d.csv", "a,b\n1,2\n3,nan\n5,6\n");
    CHECK_THROWS_AS(load_csv(path), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_csv((dir.path / "absent.csv").string()), DataError);
  }
  SUBCASE("duplicate variable names") {
    const auto path = dir.file("e.csv", "a,a\n1,2\n3,4\n");
    CHECK_THROWS_WITH_AS(load_csv(path), "duplicate variable name 'a'",
                         DataError);
  }
  SUBCASE("fewer than two data rows") {
    const auto path = dir.file("f.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(path), DataError);
  }
  SUBCASE("leading id column detected by non-numeric content") {
    const auto path = dir.file("g.csv", "id,a,b\nr1,1,2\nr2,3,4\n");
    const Dataset data = load_csv(path);
    CHECK(data.p() == 2);
    CHECK(data.obs_ids == std::vector<std::string>{"r1", "r2"});
  }
  SUBCASE("numeric first column stays a predictor") {
    const auto path = dir.file("h.csv", "id,a\n1,2\n3,4\n");
    const Dataset data = load_csv(path);
    CHECK(data.p() == 2);
  }
  SUBCASE("strata column extracted as labels") {
    const auto path = dir.file("i.csv", "a,lev,b\n1,u,2\n3,v,4\n5,u,6\n");
    const CsvLoad load = load_csv_full(path, {}, std::string("lev"));
    CHECK(load.data.p() == 2);
    REQUIRE(load.strata.has_value());
    CHECK(*load.strata == std::vector<std::string>{"u", "v", "u"});
  }
  SUBCASE("ragged row is rejected") {
    const auto path = dir.file("j.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(load_csv(path), DataError);
  }
}

TEST_CASE("preprocessing") {
  SUBCASE("center-only subtracts the mean") {
    Dataset data;
    data.values.resize(3, 1);
    data.values << 1, 2, 3;
    data.var_names = {"a"};
    data.response = Vector::Zero(3);
    (*data.response) << 1, 2, 4;
    const Preprocessed pre = fit_preprocess(data, ScalingMode::kCenterOnly);
    CHECK(pre.x(0, 0) == doctest::Approx(-1.0));
    CHECK(pre.x(1, 0) == doctest::Approx(0.0));
    CHECK(pre.x(2, 0) == doctest::Approx(1.0));
    CHECK(pre.params.divisors[0] == 1.0);
    CHECK(pre.params.y_center == doctest::Approx(7.0 / 3.0));
    CHECK(pre.y.mean() == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("standard mode yields unit sample sd") {
    Dataset data;
    data.values.resize(4, 1);
    data.values << 0, 0, 4, 4;
    data.var_names = {"a"};
    data.response = Vector::Zero(4);
    const Preprocessed pre = fit_preprocess(data, ScalingMode::kStandard);
    CHECK(std::abs(pre.x.col(0).mean()) < 1e-12);
    CHECK(std::abs(sample_sd(pre.x.col(0)) - 1.0) < 1e-12);
  }
  SUBCASE("pareto mode divides by the square root of the sd") {
    // centered column (-2,-2,2,2); sd = sqrt(16/3); divisor = sd^(1/2)
    Dataset data;
    data.values.resize(4, 1);
    data.values << 0, 0, 4, 4;
    data.var_names = {"a"};
    data.response = Vector::Zero(4);
    const Preprocessed pre = fit_preprocess(data, ScalingMode::kPareto);
    CHECK(pre.params.divisors[0] ==
          doctest::Approx(1.519671371303185).epsilon(1e-12));
    CHECK(pre.x(0, 0) == doctest::Approx(-1.3160740129524924).epsilon(1e-12));
    CHECK(pre.x(2, 0) == doctest::Approx(1.3160740129524924).epsilon(1e-12));
  }
  SUBCASE("zero-variance column is a hard error naming the column") {
    Dataset data;
    data.values.resize(3, 2);
    data.values << 1, 7, 2, 7, 3, 7;
    data.var_names = {"a", "flat"};
    data.response = Vector::Zero(3);
    CHECK_THROWS_WITH_AS(fit_preprocess(data, ScalingMode::kStandard),
                         "zero-variance column 'flat'", DataError);
  }
  SUBCASE("apply reproduces the training block exactly") {
    Dataset data;
    data.values = oracle::random_matrix(5, 9, 4);
    data.var_names = {"a", "b", "c", "d"};
    data.response = oracle::random_matrix(6, 9, 1).col(0);
    for (const ScalingMode mode :
         {ScalingMode::kCenterOnly, ScalingMode::kStandard, ScalingMode::kPareto}) {
      const Preprocessed pre = fit_preprocess(data, mode);
      const Matrix again = apply_preprocess(pre.params, data.values);
      CHECK((again - pre.x).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("row equal to the centers maps to zero") {
    Dataset data;
    data.values = oracle::random_matrix(7, 6, 3);
    data.var_names = {"a", "b", "c"};
    data.response = Vector::Zero(6);
    const Preprocessed pre = fit_preprocess(data, ScalingMode::kStandard);
    Matrix row(1, 3);
    row << pre.params.centers[0], pre.params.centers[1], pre.params.centers[2];
    CHECK(apply_preprocess(pre.params, row).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("affine arithmetic") {
    PreprocessParams params;
    params.centers = Vector::Constant(1, 1.0);
    params.divisors = Vector::Constant(1, 2.0);
    Matrix x(1, 1);
    x << 5.0;
    CHECK(apply_preprocess(params, x)(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("dimension mismatch") {
    PreprocessParams params;
    params.centers = Vector::Zero(2);
    params.divisors = Vector::Ones(2);
    CHECK_THROWS_AS(apply_preprocess(params, Matrix::Zero(3, 3)),
                    DimensionError);
  }
}

TEST_CASE("fold assignment") {
  SUBCASE("stratified deal: two observations of each level per fold") {
    std::vector<std::string> strata;
    for (int level = 0; level < 7; ++level)
      for (int i = 0; i < 20; ++i) strata.push_back("lev" + std::to_string(level));
    const FoldAssignment folds = make_folds(140, 10, strata, 42);
    for (int f = 0; f < 10; ++f) {
      std::map<std::string, int> count;
      for (int i = 0; i < 140; ++i)
        if (folds.fold_of[static_cast<std::size_t>(i)] == f)
          ++count[strata[static_cast<std::size_t>(i)]];
      for (const auto& [level, c] : count) CHECK(c == 2);
      CHECK(count.size() == 7);
    }
  }
  SUBCASE("unstratified five-fold on 100") {
    const FoldAssignment folds = make_folds(100, 5, {}, 3);
    std::vector<int> sizes(5, 0);
    for (const int f : folds.fold_of) ++sizes[static_cast<std::size_t>(f)];
    for (const int s : sizes) CHECK(s == 20);
  }
  SUBCASE("determinism") {
    const FoldAssignment a = make_folds(37, 4, {}, 99);
    const FoldAssignment b = make_folds(37, 4, {}, 99);
    CHECK(a.fold_of == b.fold_of);
    const FoldAssignment c = make_folds(37, 4, {}, 100);
    CHECK(a.fold_of != c.fold_of);
  }
  SUBCASE("partition: every index lands in exactly one fold") {
    const FoldAssignment folds = make_folds(23, 6, {}, 5);
    CHECK(folds.fold_of.size() == 23);
    std::vector<int> sizes(6, 0);
    for (const int f : folds.fold_of) {
      REQUIRE(f >= 0);
      REQUIRE(f < 6);
      ++sizes[static_cast<std::size_t>(f)];
    }
    int total = 0;
    for (const int s : sizes) {
      CHECK(s > 0);
      total += s;
    }
    CHECK(total == 23);
    const int mn = *std::min_element(sizes.begin(), sizes.end());
    const int mx = *std::max_element(sizes.begin(), sizes.end());
    CHECK(mx - mn <= 1);
  }
  SUBCASE("singleton strata keep all folds populated") {
    std::vector<std::string> strata;
    for (int i = 0; i < 12; ++i) strata.push_back("s" + std::to_string(i));
    const FoldAssignment folds = make_folds(12, 4, strata, 7);
    std::set<int> used(folds.fold_of.begin(), folds.fold_of.end());
    CHECK(used.size() == 4);
  }
  SUBCASE("k out of range") {
    CHECK_THROWS_AS(make_folds(5, 6, {}, 1), DataError);
    CHECK_THROWS_AS(make_folds(5, 1, {}, 1), DataError);
  }
  SUBCASE("json shape") {
    const FoldAssignment folds = make_folds(4, 2, {}, 1);
    const std::string json = fold_assignment_to_json(folds);
    CHECK(json.find("\"k\": 2") != std::string::npos);
    CHECK(json.find("\"fold_of\"") != std::string::npos);
  }
}

TEST_CASE("csv writers round-trip through the loader") {
  TempDir dir;
  const Matrix m = oracle::random_matrix(11, 6, 3);
  const std::string csv = matrix_csv(m, {"a", "b", "c"});
  const auto path = dir.file("round.csv", csv);
  const Dataset data = load_csv(path);
  CHECK((data.values - m).cwiseAbs().maxCoeff() == 0.0);  // shortest round-trip
}
