#include "fedfhe/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include <boost/tokenizer.hpp>

#include "fedfhe/common/error.hpp"
#include "fedfhe/common/prng.hpp"

namespace fedfhe::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  using Sep = boost::escaped_list_separator<char>;
  boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
  std::vector<std::string> out;
  for (const auto& t : tok) {
    auto a = t.find_first_not_of(" \t\r"), b = t.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string{} : t.substr(a, b - a + 1));
  }
  return out;
}

double parse_number(const std::string& cell, const std::string& where) {
  double v = 0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  require(ec == std::errc{} && p == cell.data() + cell.size() && std::isfinite(v), ErrorCode::decode_failure,
          where + ": non-numeric cell '" + cell + "'");
  return v;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvSchema& schema, const std::string& source) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::empty_input, source + ": missing header");
  const auto header = split_line(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    require(col.emplace(header[i], i).second, ErrorCode::decode_failure, source + ": duplicate column " + header[i]);
  }
  auto find = [&](const std::string& name) {
    auto it = col.find(name);
    require(it != col.end(), ErrorCode::invalid_argument, source + ": missing column '" + name + "'");
    return it->second;
  };
  const std::ptrdiff_t label_col = schema.label.empty() ? -1 : static_cast<std::ptrdiff_t>(find(schema.label));
  const std::ptrdiff_t id_col = schema.id_column.empty() ? -1 : static_cast<std::ptrdiff_t>(find(schema.id_column));
  std::vector<std::size_t> feat_cols;
  Dataset d;
  d.label = schema.label;
  if (schema.features.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (static_cast<std::ptrdiff_t>(i) != label_col && static_cast<std::ptrdiff_t>(i) != id_col) {
        feat_cols.push_back(i);
        d.features.push_back(header[i]);
      }
  } else {
    for (const auto& f : schema.features) {
      feat_cols.push_back(find(f));
      d.features.push_back(f);
    }
  }

  std::vector<double> values;
  std::size_t rows = 0, lineno = 1;
  std::map<std::string, int> classes;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    const std::string where = source + ":" + std::to_string(lineno);
    require(cells.size() == header.size(), ErrorCode::decode_failure,
            where + ": expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    for (std::size_t c : feat_cols) values.push_back(parse_number(cells[c], where));
    if (label_col >= 0) {
      const auto& cell = cells[static_cast<std::size_t>(label_col)];
      classes.emplace(cell, 0);
      d.y.push_back(cell == schema.positive ? 1 : 0);
    }
    d.ids.push_back(id_col >= 0 ? cells[static_cast<std::size_t>(id_col)] : "row" + std::to_string(rows));
    ++rows;
  }
  require(rows > 0, ErrorCode::empty_input, source + ": no data rows");
  require(classes.size() <= 2, ErrorCode::invalid_argument, source + ": label column has more than two classes");
  d.X = Matrix(rows, feat_cols.size());
  d.X.data = std::move(values);
  return d;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot read " + path);
  return parse_csv(in, schema, path);
}

std::vector<std::string> read_ids(const std::string& path, const std::string& id_column) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot read " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::empty_input, path + ": missing header");
  const auto header = split_line(line);
  auto it = std::find(header.begin(), header.end(), id_column);
  require(it != header.end(), ErrorCode::invalid_argument, path + ": missing column '" + id_column + "'");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<std::string> ids;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    require(cells.size() == header.size(), ErrorCode::decode_failure, path + ": ragged row");
    ids.push_back(cells[col]);
  }
  return ids;
}

void write_csv(const std::string& path, const Dataset& d, std::span<const std::string> provenance) {
  require(provenance.empty() || provenance.size() == d.rows(), ErrorCode::invalid_argument,
          "one provenance entry per row expected");
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out.precision(17);
  out << "id";
  for (const auto& f : d.features) out << ',' << quote(f);
  if (d.labelled()) out << ',' << quote(d.label);
  if (!provenance.empty()) out << ",provenance";
  out << '\n';
  for (std::size_t i = 0; i < d.rows(); ++i) {
    out << quote(d.ids[i]);
    for (std::size_t j = 0; j < d.X.cols; ++j) out << ',' << d.X(i, j);
    if (d.labelled()) out << ',' << d.y[i];
    if (!provenance.empty()) out << ',' << quote(provenance[i]);
    out << '\n';
  }
}

Dataset select_rows(const Dataset& d, std::span<const std::size_t> rows) {
  Dataset out{{}, d.features, Matrix(rows.size(), d.X.cols), d.label, {}};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] < d.rows(), ErrorCode::invalid_argument, "row index out of range");
    out.ids.push_back(d.ids[rows[r]]);
    for (std::size_t j = 0; j < d.X.cols; ++j) out.X(r, j) = d.X(rows[r], j);
    if (d.labelled()) out.y.push_back(d.y[rows[r]]);
  }
  return out;
}

Dataset select_features(const Dataset& d, std::span<const std::string> names) {
  std::vector<std::size_t> cols;
  for (const auto& n : names) {
    auto it = std::find(d.features.begin(), d.features.end(), n);
    require(it != d.features.end(), ErrorCode::invalid_argument, "unknown feature '" + n + "'");
    cols.push_back(static_cast<std::size_t>(it - d.features.begin()));
  }
  Dataset out{d.ids, {names.begin(), names.end()}, Matrix(d.rows(), cols.size()), d.label, d.y};
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out.X(i, j) = d.X(i, cols[j]);
  return out;
}

Dataset align_to(const Dataset& d, std::span<const std::string> ids) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < d.rows(); ++i) pos.emplace(d.ids[i], i);
  std::vector<std::size_t> rows;
  for (const auto& id : ids) {
    auto it = pos.find(id);
    require(it != pos.end(), ErrorCode::invalid_argument, "id '" + id + "' not in dataset");
    rows.push_back(it->second);
  }
  return select_rows(d, rows);
}

std::vector<int> to_pm(std::span<const int> y01) {
  std::vector<int> out;
  for (int v : y01) {
    require(v == 0 || v == 1, ErrorCode::invalid_argument, "labels must be 0 or 1");
    out.push_back(v ? 1 : -1);
  }
  return out;
}

Scaler Scaler::fit(const Matrix& X) {
  require(X.rows > 0, ErrorCode::empty_input, "cannot fit a scaler on no rows");
  Scaler s{std::vector<double>(X.cols, 0.0), std::vector<double>(X.cols, 0.0)};
  for (std::size_t j = 0; j < X.cols; ++j) {
    double m = 0;
    for (std::size_t i = 0; i < X.rows; ++i) m += X(i, j);
    m /= static_cast<double>(X.rows);
    double v = 0;
    for (std::size_t i = 0; i < X.rows; ++i) v += (X(i, j) - m) * (X(i, j) - m);
    const double sd = std::sqrt(v / static_cast<double>(X.rows));
    s.mean[j] = m;
    s.stddev[j] = sd > 0 ? sd : 1.0;
  }
  return s;
}

Matrix Scaler::apply(const Matrix& X, double clip) const {
  require(X.cols == mean.size(), ErrorCode::invalid_argument, "scaler/feature mismatch");
  Matrix out(X.rows, X.cols);
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = 0; j < X.cols; ++j) out(i, j) = std::clamp((X(i, j) - mean[j]) / stddev[j], -clip, clip);
  return out;
}

SplitIndices stratified_split(std::span<const int> y01, double test_fraction, std::uint64_t seed) {
  require(test_fraction > 0 && test_fraction < 1, ErrorCode::invalid_argument, "test fraction must be in (0,1)");
  SplitIndices s;
  Prng prng(seed, 0x73706c6974);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y01.size(); ++i)
      if (y01[i] == cls) idx.push_back(i);
    prng.shuffle(idx.begin(), idx.end());
    const auto k = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  require(!s.train.empty() && !s.test.empty(), ErrorCode::empty_input, "split leaves an empty side");
  return s;
}

}  // namespace fedfhe::data
