#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "firecast/geometry.hpp"

namespace firecast::wildfire {

inline constexpr int kFirstMonth = 3;
inline constexpr int kLastMonth = 9;
inline constexpr int kMonths = kLastMonth - kFirstMonth + 1;

/// Counts of {0, >0, missing} for CNT (rows) against BA (columns).
struct CrossTab {
  std::array<std::array<long long, 3>, 3> counts{};
  long long total() const;
  long long row_total(int cnt_category) const;
  long long col_total(int ba_category) const;
};

enum Category { Zero = 0, Positive = 1, Missing = 2 };

/// Column-oriented records; CNT, BA and covariates use NaN for missing.
struct WildfireDataset {
  std::vector<double> lon, lat;
  std::vector<int> year, month;
  Eigen::VectorXd cnt, ba;
  Eigen::MatrixXd covariates;  ///< records x covariates
  std::vector<std::string> covariate_names;
  std::vector<long long> line;  ///< source line of each record (1-based, 0 if synthetic)

  std::vector<int> cell;         ///< per record, index into cell_lonlat
  std::vector<Point> cell_lonlat;

  CrossTab cross_tab;

  Eigen::Index size() const { return static_cast<Eigen::Index>(lon.size()); }
  bool covariates_complete(Eigen::Index i) const;
  /// Recomputes cell ids and the cross-tab, and enforces CNT = 0 iff BA = 0.
  void finalize();
};

Category category(double value);

/// Parses the CSV schema `lon,lat,year,month,CNT,BA,<covariates...>` (any
/// column order; every column beside the first six is a covariate). Missing
/// values are empty fields or `NA`.
WildfireDataset read_dataset(std::istream& is);
WildfireDataset load_and_validate(const std::string& path);

void write_dataset(std::ostream& os, const WildfireDataset& data);

/// Cross-tab of the CNT and BA columns only, for files with foreign schemas.
CrossTab cross_tab_csv(const std::string& path);

void write_cross_tab(std::ostream& os, const CrossTab& tab);

/// Mean / SD scaling of the design covariates (the raw ones plus year and
/// month trends), computed on the training rows.
struct Standardization {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  /// (raw - mean) / sd column-wise.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
};

/// Raw covariates with the year and month trends appended.
Eigen::MatrixXd raw_design(const WildfireDataset& data);
std::vector<std::string> design_names(const WildfireDataset& data);

/// Rows entering any likelihood: CNT observed and covariates complete.
std::vector<Eigen::Index> training_rows(const WildfireDataset& data);

/// Fits the scaling on `rows`; throws a degenerate-covariate error for a
/// column with no spread.
Standardization standardize_covariates(const WildfireDataset& data,
                                       const std::vector<Eigen::Index>& rows);

enum class Target { Z, CNT, BA };

/// Per-cell empirical SD: of the occurrence indicator (Z) or of the log of
/// positive values (CNT, BA), over months. Cells with fewer than two defined
/// values take the mean of the defined ones.
Eigen::VectorXd empirical_sigma_hat(const WildfireDataset& data, Target target);

/// Equirectangular projection of each cell centre (km).
std::vector<Point> project_cells(const WildfireDataset& data, double ref_lat);
double reference_latitude(const WildfireDataset& data);

}  // namespace firecast::wildfire
