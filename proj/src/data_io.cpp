#include "regime_ogarch/data_io.hpp"

#include "regime_ogarch/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ogarch {

namespace {

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + cell + "' as a number");
    }
    return value;
}

}  // namespace

bool date_less(const std::string& a, const std::string& b) {
    if (all_digits(a) && all_digits(b)) {
        // compare as integers without overflow: strip leading zeros, then length, then text
        const auto strip = [](const std::string& s) {
            const auto nz = s.find_first_not_of('0');
            return nz == std::string::npos ? std::string("0") : s.substr(nz);
        };
        const auto sa = strip(a);
        const auto sb = strip(b);
        if (sa.size() != sb.size()) {
            return sa.size() < sb.size();
        }
        return sa < sb;
    }
    return a < b;
}

ReturnPanel::ReturnPanel(std::vector<std::string> dates, Eigen::MatrixXd returns,
                         std::vector<std::string> asset_names)
    : dates_(std::move(dates)), returns_(std::move(returns)), asset_names_(std::move(asset_names)) {
    if (returns_.rows() < 2) {
        throw DataError("return panel needs at least 2 rows");
    }
    if (returns_.cols() < 1) {
        throw DataError("return panel needs at least 1 asset");
    }
    if (dates_.size() != static_cast<std::size_t>(returns_.rows())) {
        throw DataError("date count does not match the number of return rows");
    }
    if (asset_names_.size() != static_cast<std::size_t>(returns_.cols())) {
        throw DataError("asset name count does not match the number of columns");
    }
    if (!returns_.allFinite()) {
        throw DataError("return panel contains missing or non-finite cells");
    }
    for (std::size_t t = 1; t < dates_.size(); ++t) {
        if (!date_less(dates_[t - 1], dates_[t])) {
            throw DataError("dates not strictly increasing at '" + dates_[t] + "'");
        }
    }
}

ReturnPanel ReturnPanel::slice(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > rows()) {
        throw ContractError("invalid panel slice");
    }
    const auto n = static_cast<Eigen::Index>(end - begin);
    std::vector<std::string> d(dates_.begin() + static_cast<std::ptrdiff_t>(begin),
                               dates_.begin() + static_cast<std::ptrdiff_t>(end));
    return {std::move(d), returns_.middleRows(static_cast<Eigen::Index>(begin), n), asset_names_};
}

void WindowSpec::validate() const {
    if (in_sample_len < 30) {
        throw ContractError("in-sample window must hold at least 30 observations");
    }
    if (horizon < 1) {
        throw ContractError("forecast horizon must be at least 1");
    }
    if (step < 1) {
        throw ContractError("window step must be at least 1");
    }
}

ReturnPanel log_returns(const Eigen::MatrixXd& prices, const std::vector<std::string>& dates,
                        const std::vector<std::string>& asset_names) {
    if (prices.rows() < 2) {
        throw DataError("need at least two price rows");
    }
    if (static_cast<std::size_t>(prices.rows()) != dates.size()) {
        throw DataError("date count does not match the number of price rows");
    }
    for (Eigen::Index t = 0; t < prices.rows(); ++t) {
        for (Eigen::Index i = 0; i < prices.cols(); ++i) {
            if (!(prices(t, i) > 0.0) || !std::isfinite(prices(t, i))) {
                throw DataError("non-positive price at row " + std::to_string(t) + " ('" + dates[t] + "')");
            }
        }
    }
    const Eigen::MatrixXd logp = prices.array().log().matrix();
    const Eigen::Index n = prices.rows() - 1;
    Eigen::MatrixXd r = logp.bottomRows(n) - logp.topRows(n);
    return {std::vector<std::string>(dates.begin() + 1, dates.end()), std::move(r), asset_names};
}

NormalizationStats window_stats(const ReturnPanel& panel, std::size_t begin, std::size_t end) {
    if (begin >= end || end > panel.rows()) {
        throw ContractError("normalization window is empty or out of range");
    }
    const auto n = static_cast<Eigen::Index>(end - begin);
    // Contiguous copy: vectorized reductions over a block view depend on its
    // memory alignment, which would tie the result to the panel length.
    const Eigen::MatrixXd block = panel.returns().middleRows(static_cast<Eigen::Index>(begin), n);
    NormalizationStats stats;
    stats.means = block.colwise().mean().transpose();
    stats.vols.resize(block.cols());
    for (Eigen::Index i = 0; i < block.cols(); ++i) {
        const double ss = (block.col(i).array() - stats.means(i)).square().sum();
        const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        if (!(sd > 0.0)) {
            throw DegenerateAssetError(panel.asset_names()[static_cast<std::size_t>(i)]);
        }
        stats.vols(i) = sd;
    }
    return stats;
}

NormalizedReturns normalize(const ReturnPanel& panel, std::size_t begin, std::size_t end) {
    NormalizedReturns out;
    out.stats = window_stats(panel, begin, end);
    out.x = (panel.returns().rowwise() - out.stats.means.transpose()).array().rowwise() /
            out.stats.vols.transpose().array();
    return out;
}

std::vector<Window> rolling_windows(const ReturnPanel& panel, const WindowSpec& spec) {
    // The 30-row floor belongs to model fitting (WindowSpec::validate); enumeration only needs R >= 1.
    if (spec.in_sample_len < 1 || spec.horizon < 1 || spec.step < 1) {
        throw ContractError("window length, horizon and step must be positive");
    }
    const auto R = static_cast<std::size_t>(spec.in_sample_len);
    const auto tau = static_cast<std::size_t>(spec.horizon);
    const auto T = panel.rows();
    if (R + tau > T) {
        throw InsufficientDataError("window of " + std::to_string(R) + " plus horizon " + std::to_string(tau) +
                                    " exceeds " + std::to_string(T) + " observations");
    }
    std::vector<Window> windows;
    for (std::size_t origin = R; origin + tau <= T; origin += static_cast<std::size_t>(spec.step)) {
        windows.push_back({spec.expanding ? 0 : origin - R, origin});
    }
    return windows;
}

ReturnPanel read_panel_csv(std::istream& in, CsvValues mode) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_fields(line);
            break;
        }
    }
    if (header.size() < 2) {
        throw DataError("CSV header must be 'date,<asset1>,...'");
    }
    if (header[0].size() >= 3 && static_cast<unsigned char>(header[0][0]) == 0xEF) {
        header[0] = header[0].substr(3);  // UTF-8 BOM
    }
    const std::vector<std::string> names(header.begin() + 1, header.end());

    std::vector<std::string> dates;
    std::vector<double> cells;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        }
        dates.push_back(fields[0]);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            cells.push_back(parse_cell(fields[i], line_no));
        }
    }
    const auto T = static_cast<Eigen::Index>(dates.size());
    const auto I = static_cast<Eigen::Index>(names.size());
    Eigen::MatrixXd values(T, I);
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index i = 0; i < I; ++i) {
            values(t, i) = cells[static_cast<std::size_t>(t * I + i)];
        }
    }
    if (mode == CsvValues::Prices) {
        return log_returns(values, dates, names);
    }
    return {std::move(dates), std::move(values), names};
}

ReturnPanel read_panel_csv(const std::string& path, CsvValues mode) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    return read_panel_csv(in, mode);
}

void write_panel_csv(std::ostream& out, const ReturnPanel& panel) {
    out << "date";
    for (const auto& name : panel.asset_names()) {
        out << ',' << name;
    }
    out << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        out << panel.dates()[t];
        for (std::size_t i = 0; i < panel.assets(); ++i) {
            out << ',' << panel.returns()(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
        }
        out << '\n';
    }
}

void write_panel_csv(const std::string& path, const ReturnPanel& panel) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    write_panel_csv(out, panel);
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) {
        throw ContractError("sample covariance needs at least two rows");
    }
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    return (0.5 * (cov + cov.transpose())).eval();
}

}  // namespace ogarch
