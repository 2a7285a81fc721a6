#include "firecast/wildfire/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <string_view>

namespace firecast::wildfire {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_missing(std::string_view field) { return field.empty() || field == "NA"; }

[[noreturn]] void parse_error(long long line, const std::string& what) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view field, long long line, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    parse_error(line, "bad value '" + std::string(field) + "' in column " + std::string(column));
  }
  return v;
}

double parse_optional(std::string_view field, long long line, std::string_view column) {
  return is_missing(field) ? kNaN : parse_number(field, line, column);
}

int parse_int(std::string_view field, long long line, std::string_view column) {
  const double v = parse_number(field, line, column);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    parse_error(line, "column " + std::string(column) + " must be an integer");
  }
  return static_cast<int>(v);
}

struct Header {
  int lon = -1, lat = -1, year = -1, month = -1, cnt = -1, ba = -1;
  std::vector<int> covariates;
  std::vector<std::string> covariate_names;
  std::size_t width = 0;
};

Header parse_header(std::string_view line, bool need_all) {
  Header h;
  const auto fields = split(line);
  h.width = fields.size();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string_view f = fields[i];
    const int idx = static_cast<int>(i);
    if (f == "lon") h.lon = idx;
    else if (f == "lat") h.lat = idx;
    else if (f == "year") h.year = idx;
    else if (f == "month") h.month = idx;
    else if (f == "CNT") h.cnt = idx;
    else if (f == "BA") h.ba = idx;
    else {
      h.covariates.push_back(idx);
      h.covariate_names.emplace_back(f);
    }
  }
  if (h.cnt < 0 || h.ba < 0) parse_error(1, "header lacks CNT or BA");
  if (need_all && (h.lon < 0 || h.lat < 0 || h.year < 0 || h.month < 0)) {
    parse_error(1, "header must name lon, lat, year, month, CNT and BA");
  }
  return h;
}

}  // namespace

long long CrossTab::total() const {
  long long t = 0;
  for (const auto& row : counts) {
    for (long long c : row) t += c;
  }
  return t;
}

long long CrossTab::row_total(int cnt_category) const {
  long long t = 0;
  for (long long c : counts[cnt_category]) t += c;
  return t;
}

long long CrossTab::col_total(int ba_category) const {
  long long t = 0;
  for (const auto& row : counts) t += row[ba_category];
  return t;
}

Category category(double value) {
  if (std::isnan(value)) return Missing;
  return value > 0.0 ? Positive : Zero;
}

bool WildfireDataset::covariates_complete(Eigen::Index i) const {
  return covariates.row(i).allFinite();
}

void WildfireDataset::finalize() {
  const Eigen::Index n = size();
  if (cnt.size() != n || ba.size() != n || covariates.rows() != n ||
      static_cast<Eigen::Index>(lat.size()) != n || static_cast<Eigen::Index>(year.size()) != n ||
      static_cast<Eigen::Index>(month.size()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "dataset columns differ in length");
  }
  if (line.size() != lon.size()) line.assign(lon.size(), 0);
  cross_tab = CrossTab{};
  std::string bad;
  int n_bad = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Category c = category(cnt[i]);
    const Category b = category(ba[i]);
    ++cross_tab.counts[c][b];
    if ((c == Zero && b == Positive) || (c == Positive && b == Zero)) {
      if (n_bad < 10) {
        bad += (n_bad ? ", " : "") + std::to_string(line[i] ? line[i] : i + 1);
      }
      ++n_bad;
    }
    if (month[i] < kFirstMonth || month[i] > kLastMonth) {
      throw Error(ErrorKind::Data, "record " + std::to_string(line[i] ? line[i] : i + 1) +
                                       ": month must be in 3..9");
    }
    if ((!std::isnan(cnt[i]) && (cnt[i] < 0.0 || cnt[i] != std::floor(cnt[i]))) ||
        (!std::isnan(ba[i]) && ba[i] < 0.0)) {
      throw Error(ErrorKind::Data, "record " + std::to_string(line[i] ? line[i] : i + 1) +
                                       ": CNT must be a nonnegative integer and BA nonnegative");
    }
  }
  if (n_bad > 0) {
    throw Error(ErrorKind::Consistency, std::to_string(n_bad) +
                                            " records have exactly one of CNT, BA equal to zero "
                                            "(lines " + bad + (n_bad > 10 ? ", ..." : "") + ")");
  }
  std::map<std::pair<double, double>, int> ids;
  cell.resize(lon.size());
  cell_lonlat.clear();
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [it, inserted] = ids.try_emplace({lon[i], lat[i]}, static_cast<int>(cell_lonlat.size()));
    if (inserted) cell_lonlat.push_back({lon[i], lat[i]});
    cell[i] = it->second;
  }
}

WildfireDataset read_dataset(std::istream& is) {
  std::string text;
  if (!std::getline(is, text)) throw Error(ErrorKind::Parse, "line 1: empty input");
  const Header h = parse_header(text, true);
  WildfireDataset data;
  data.covariate_names = h.covariate_names;
  std::vector<double> cov;
  std::vector<double> cnt, ba;
  long long lineno = 1;
  while (std::getline(is, text)) {
    ++lineno;
    if (trim(text).empty()) continue;
    const auto f = split(text);
    if (f.size() != h.width) {
      parse_error(lineno, "expected " + std::to_string(h.width) + " fields, found " +
                              std::to_string(f.size()));
    }
    data.lon.push_back(parse_number(f[h.lon], lineno, "lon"));
    data.lat.push_back(parse_number(f[h.lat], lineno, "lat"));
    data.year.push_back(parse_int(f[h.year], lineno, "year"));
    data.month.push_back(parse_int(f[h.month], lineno, "month"));
    cnt.push_back(parse_optional(f[h.cnt], lineno, "CNT"));
    ba.push_back(parse_optional(f[h.ba], lineno, "BA"));
    for (std::size_t k = 0; k < h.covariates.size(); ++k) {
      cov.push_back(parse_optional(f[h.covariates[k]], lineno, h.covariate_names[k]));
    }
    data.line.push_back(lineno);
  }
  if (data.lon.empty()) throw Error(ErrorKind::Parse, "line 2: no records");
  const Eigen::Index n = data.size();
  const Eigen::Index p = static_cast<Eigen::Index>(h.covariates.size());
  data.cnt = Eigen::Map<Eigen::VectorXd>(cnt.data(), n);
  data.ba = Eigen::Map<Eigen::VectorXd>(ba.data(), n);
  data.covariates =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          cov.data(), n, p);
  data.finalize();
  return data;
}

WildfireDataset load_and_validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_dataset(in);
}

void write_dataset(std::ostream& os, const WildfireDataset& data) {
  os << "lon,lat,year,month,CNT,BA";
  for (const auto& name : data.covariate_names) os << ',' << name;
  os << '\n';
  char buf[64];
  auto put = [&](double v) {
    if (std::isnan(v)) {
      os << "NA";
    } else {
      std::snprintf(buf, sizeof buf, "%.10g", v);
      os << buf;
    }
  };
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    put(data.lon[i]);
    os << ',';
    put(data.lat[i]);
    os << ',' << data.year[i] << ',' << data.month[i] << ',';
    put(data.cnt[i]);
    os << ',';
    put(data.ba[i]);
    for (Eigen::Index k = 0; k < data.covariates.cols(); ++k) {
      os << ',';
      put(data.covariates(i, k));
    }
    os << '\n';
  }
}

CrossTab cross_tab_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::string text;
  if (!std::getline(in, text)) throw Error(ErrorKind::Parse, "line 1: empty input");
  const Header h = parse_header(text, false);
  CrossTab tab;
  long long lineno = 1;
  while (std::getline(in, text)) {
    ++lineno;
    if (trim(text).empty()) continue;
    const auto f = split(text);
    if (f.size() != h.width) parse_error(lineno, "unexpected field count");
    const Category c = category(parse_optional(f[h.cnt], lineno, "CNT"));
    const Category b = category(parse_optional(f[h.ba], lineno, "BA"));
    ++tab.counts[c][b];
  }
  return tab;
}

void write_cross_tab(std::ostream& os, const CrossTab& tab) {
  static const char* labels[3] = {"0", ">0", "NA"};
  os << "CNT\\BA 0 >0 NA total\n";
  for (int c = 0; c < 3; ++c) {
    os << labels[c];
    for (int b = 0; b < 3; ++b) os << ' ' << tab.counts[c][b];
    os << ' ' << tab.row_total(c) << '\n';
  }
  os << "total";
  for (int b = 0; b < 3; ++b) os << ' ' << tab.col_total(b);
  os << ' ' << tab.total() << '\n';
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "covariate count differs from the scaling");
  }
  return (raw.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

Eigen::MatrixXd raw_design(const WildfireDataset& data) {
  const Eigen::Index n = data.size();
  const Eigen::Index p = data.covariates.cols();
  Eigen::MatrixXd x(n, p + 2);
  x.leftCols(p) = data.covariates;
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, p) = data.year[i];
    x(i, p + 1) = data.month[i];
  }
  return x;
}

std::vector<std::string> design_names(const WildfireDataset& data) {
  std::vector<std::string> names = data.covariate_names;
  names.push_back("t_year");
  names.push_back("t_month");
  return names;
}

std::vector<Eigen::Index> training_rows(const WildfireDataset& data) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (!std::isnan(data.cnt[i]) && data.covariates_complete(i)) rows.push_back(i);
  }
  return rows;
}

Standardization standardize_covariates(const WildfireDataset& data,
                                       const std::vector<Eigen::Index>& rows) {
  const Eigen::MatrixXd x = raw_design(data);
  Standardization s;
  s.names = design_names(data);
  s.mean.resize(x.cols());
  s.sd.resize(x.cols());
  if (rows.size() < 2) throw Error(ErrorKind::DegenerateCovariate, "fewer than two training rows");
  const double n = static_cast<double>(rows.size());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    double mean = 0.0;
    for (Eigen::Index i : rows) mean += x(i, k);
    mean /= n;
    double ss = 0.0;
    for (Eigen::Index i : rows) ss += (x(i, k) - mean) * (x(i, k) - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      throw Error(ErrorKind::DegenerateCovariate,
                  "covariate '" + s.names[static_cast<std::size_t>(k)] + "' has zero variance");
    }
    s.mean[k] = mean;
    s.sd[k] = sd;
  }
  return s;
}

Eigen::VectorXd empirical_sigma_hat(const WildfireDataset& data, Target target) {
  const std::size_t cells = data.cell_lonlat.size();
  std::vector<std::vector<double>> values(cells);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double v = target == Target::BA ? data.ba[i] : data.cnt[i];
    if (std::isnan(v)) continue;
    if (target == Target::Z) {
      values[data.cell[i]].push_back(v > 0.0 ? 1.0 : 0.0);
    } else if (v > 0.0) {
      values[data.cell[i]].push_back(std::log(v));
    }
  }
  Eigen::VectorXd sd(static_cast<Eigen::Index>(cells));
  std::vector<bool> defined(cells, false);
  double sum = 0.0;
  int count = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    const auto& v = values[c];
    if (v.size() < 2) continue;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd[static_cast<Eigen::Index>(c)] = std::sqrt(ss / static_cast<double>(v.size() - 1));
    defined[c] = true;
    sum += sd[static_cast<Eigen::Index>(c)];
    ++count;
  }
  const double fill = count > 0 ? sum / count : 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    if (!defined[c]) sd[static_cast<Eigen::Index>(c)] = fill;
  }
  return sd;
}

double reference_latitude(const WildfireDataset& data) {
  double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
  for (const Point& p : data.cell_lonlat) {
    lo = std::min(lo, p.y);
    hi = std::max(hi, p.y);
  }
  return data.cell_lonlat.empty() ? 0.0 : 0.5 * (lo + hi);
}

std::vector<Point> project_cells(const WildfireDataset& data, double ref_lat) {
  std::vector<Point> out;
  out.reserve(data.cell_lonlat.size());
  for (const Point& p : data.cell_lonlat) out.push_back(project_lonlat(p.x, p.y, ref_lat));
  return out;
}

}  // namespace firecast::wildfire
