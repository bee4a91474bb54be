#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace ogarch {

/// Per-asset mean and unbiased (n-1) standard deviation over a window.
struct NormalizationStats {
    Eigen::VectorXd means;
    Eigen::VectorXd vols;
};

/**
 * Date-indexed T x I matrix of daily log returns.
 *
 * Dates are opaque labels. They must be strictly increasing; labels that are
 * both plain non-negative integers compare numerically, anything else compares
 * lexicographically (ISO-8601 dates sort correctly that way).
 */
class ReturnPanel {
public:
    ReturnPanel(std::vector<std::string> dates, Eigen::MatrixXd returns,
                std::vector<std::string> asset_names);

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(returns_.rows()); }
    [[nodiscard]] std::size_t assets() const noexcept { return static_cast<std::size_t>(returns_.cols()); }
    [[nodiscard]] const std::vector<std::string>& dates() const noexcept { return dates_; }
    [[nodiscard]] const Eigen::MatrixXd& returns() const noexcept { return returns_; }
    [[nodiscard]] const std::vector<std::string>& asset_names() const noexcept { return asset_names_; }

    /// Rows [begin, end) as a new panel.
    [[nodiscard]] ReturnPanel slice(std::size_t begin, std::size_t end) const;

private:
    std::vector<std::string> dates_;
    Eigen::MatrixXd returns_;
    std::vector<std::string> asset_names_;
};

/// Strict ordering used for date labels.
[[nodiscard]] bool date_less(const std::string& a, const std::string& b);

struct WindowSpec {
    int in_sample_len = 200;  ///< R
    int horizon = 1;          ///< tau
    int step = 1;
    bool expanding = false;   ///< in-sample start pinned at row 0

    void validate() const;
};

/// In-sample rows [begin, end); the forecast origin is `end`, the first out-of-sample row.
struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t origin() const noexcept { return end; }
    [[nodiscard]] std::size_t length() const noexcept { return end - begin; }
};

/// Row t of the result is ln(p_{t+1}) - ln(p_t); dates are those of the later row.
[[nodiscard]] ReturnPanel log_returns(const Eigen::MatrixXd& prices, const std::vector<std::string>& dates,
                                      const std::vector<std::string>& asset_names);

[[nodiscard]] NormalizationStats window_stats(const ReturnPanel& panel, std::size_t begin, std::size_t end);

struct NormalizedReturns {
    Eigen::MatrixXd x;  ///< all T rows, standardized with the window statistics
    NormalizationStats stats;
};

/// x_{i,t} = (r_{i,t} - mean_i) / vol_i with statistics taken over rows [begin, end) only.
[[nodiscard]] NormalizedReturns normalize(const ReturnPanel& panel, std::size_t begin, std::size_t end);

[[nodiscard]] std::vector<Window> rolling_windows(const ReturnPanel& panel, const WindowSpec& spec);

enum class CsvValues { Prices, Returns };

/// Parse `date,<asset1>,...` CSV. Prices are converted to log returns.
[[nodiscard]] ReturnPanel read_panel_csv(std::istream& in, CsvValues mode);
[[nodiscard]] ReturnPanel read_panel_csv(const std::string& path, CsvValues mode);

void write_panel_csv(std::ostream& out, const ReturnPanel& panel);
void write_panel_csv(const std::string& path, const ReturnPanel& panel);

/// Unbiased sample covariance of the rows of `x`.
[[nodiscard]] Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x);

}  // namespace ogarch
