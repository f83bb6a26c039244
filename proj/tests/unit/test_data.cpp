#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedfhe/common/error.hpp"
#include "fedfhe/data/dataset.hpp"

using namespace fedfhe;
using namespace fedfhe::data;

namespace {

Dataset parse(const std::string& text, CsvSchema schema) {
  std::istringstream in(text);
  return parse_csv(in, schema);
}

}  // namespace

TEST(Csv, ParsesIdsFeaturesAndLabels) {
  auto d = parse("id,a,b,target\nu1,1.5,2,1\nu2, -3 ,4e1,0\n", {"target", "id", "1", {}});
  EXPECT_EQ(d.rows(), 2u);
  EXPECT_EQ(d.features, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.ids, (std::vector<std::string>{"u1", "u2"}));
  EXPECT_EQ(d.y, (std::vector<int>{1, 0}));
  EXPECT_DOUBLE_EQ(d.X(1, 0), -3.0);
  EXPECT_DOUBLE_EQ(d.X(1, 1), 40.0);
}

TEST(Csv, StringLabelsMapThroughPositive) {
  auto d = parse("x,y\n1,M\n2,B\n3,M\n", {"y", "", "M", {}});
  EXPECT_EQ(d.y, (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(d.ids[2], "row2");
}

TEST(Csv, QuotedCellsAndSelectedColumns) {
  auto d = parse("id,\"a,b\",c\n\"x,1\",1,2\n", {"", "id", "1", {"c"}});
  EXPECT_EQ(d.ids[0], "x,1");
  EXPECT_EQ(d.X.cols, 1u);
  EXPECT_DOUBLE_EQ(d.X(0, 0), 2.0);
  EXPECT_FALSE(d.labelled());
}

TEST(Csv, Errors) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  EXPECT_EQ(code([] { parse("a,b\n1,2\n", {"y", "", "1", {}}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code([] { parse("a,y\nfoo,1\n", {"y", "", "1", {}}); }), ErrorCode::decode_failure);
  EXPECT_EQ(code([] { parse("a,y\n1,1,3\n", {"y", "", "1", {}}); }), ErrorCode::decode_failure);
  EXPECT_EQ(code([] { parse("a,y\n", {"y", "", "1", {}}); }), ErrorCode::empty_input);
  EXPECT_EQ(code([] { parse("a,y\n1,0\n2,1\n3,2\n", {"y", "", "1", {}}); }), ErrorCode::invalid_argument);
}

TEST(Csv, WriteRoundTripWithProvenance) {
  auto d = parse("id,a,b,t\np,0.1,1e-30,1\nq,2,3,0\n", {"t", "id", "1", {}});
  auto path = (std::filesystem::temp_directory_path() / "fedfhe_data_rt.csv").string();
  std::vector<std::string> prov{"original", "synthetic"};
  write_csv(path, d, prov);
  auto e = load_csv(path, {"t", "id", "1", {"a", "b"}});
  std::remove(path.c_str());
  EXPECT_EQ(e.ids, d.ids);
  EXPECT_EQ(e.y, d.y);
  EXPECT_EQ(e.X.data, d.X.data);
}

TEST(Csv, BreastCancerExport) {
  auto d = load_csv(FEDFHE_TEST_DATA_DIR "/breast_cancer.csv", {"target", "id", "1", {}});
  EXPECT_EQ(d.rows(), 569u);
  EXPECT_EQ(d.features.size(), 30u);
  int pos = 0;
  for (int v : d.y) pos += v;
  EXPECT_EQ(pos, 357);
}

TEST(Select, RowsFeaturesAndAlignment) {
  auto d = parse("id,a,b,t\nx,1,2,1\ny,3,4,0\nz,5,6,1\n", {"t", "id", "1", {}});
  std::vector<std::size_t> rows{2, 0};
  auto r = select_rows(d, rows);
  EXPECT_EQ(r.ids, (std::vector<std::string>{"z", "x"}));
  EXPECT_EQ(r.y, (std::vector<int>{1, 1}));
  std::vector<std::string> names{"b"};
  auto f = select_features(d, names);
  EXPECT_DOUBLE_EQ(f.X(1, 0), 4.0);
  std::vector<std::string> ids{"y", "z"};
  auto a = align_to(d, ids);
  EXPECT_DOUBLE_EQ(a.X(0, 0), 3.0);
  std::vector<std::string> bad{"w"};
  EXPECT_THROW(align_to(d, bad), Error);
  EXPECT_EQ(to_pm(d.y), (std::vector<int>{1, -1, 1}));
}

TEST(Scaler, StandardizesAndClips) {
  Matrix X(4, 2);
  double a[] = {1, 2, 3, 4};
  for (int i = 0; i < 4; ++i) {
    X(i, 0) = a[i];
    X(i, 1) = 7;
  }
  auto s = Scaler::fit(X);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
  EXPECT_DOUBLE_EQ(s.stddev[1], 1.0);
  auto Z = s.apply(X);
  double sum = 0, sq = 0;
  for (int i = 0; i < 4; ++i) {
    sum += Z(i, 0);
    sq += Z(i, 0) * Z(i, 0);
    EXPECT_DOUBLE_EQ(Z(i, 1), 0.0);
  }
  EXPECT_NEAR(sum, 0, 1e-12);
  EXPECT_NEAR(sq / 4, 1, 1e-12);
  Matrix far(1, 2);
  far(0, 0) = 1e6;
  far(0, 1) = -1e6;
  auto c = s.apply(far, 8.0);
  EXPECT_DOUBLE_EQ(c(0, 0), 8.0);
  EXPECT_DOUBLE_EQ(c(0, 1), -8.0);
}

TEST(Split, StratifiedAndDeterministic) {
  std::vector<int> y(100, 0);
  for (int i = 0; i < 30; ++i) y[static_cast<std::size_t>(i * 3)] = 1;
  auto s = stratified_split(y, 0.2, 7);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_EQ(s.train.size(), 80u);
  int pos = 0;
  for (auto i : s.test) pos += y[i];
  EXPECT_EQ(pos, 6);
  auto t = stratified_split(y, 0.2, 7);
  EXPECT_EQ(s.test, t.test);
  auto u = stratified_split(y, 0.2, 8);
  EXPECT_NE(s.test, u.test);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
}

TEST(Csv, ReadIdsIgnoresOtherColumns) {
  auto path = (std::filesystem::temp_directory_path() / "fedfhe_ids.csv").string();
  {
    std::ofstream out(path);
    out << "name,key\nalice,k1\n\nbob,\"k,2\"\n";
  }
  auto ids = read_ids(path, "key");
  std::remove(path.c_str());
  EXPECT_EQ(ids, (std::vector<std::string>{"k1", "k,2"}));
  EXPECT_THROW(read_ids(path, "key"), Error);
}
