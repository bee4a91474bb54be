#pragma once

#include <stdexcept>
#include <string>

namespace ogarch {

/// Violated precondition of an in-process API (wrong shape, asymmetric input, ...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data that cannot be used: bad CSV, non-positive price, too few rows.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

/// Asset with zero variance inside a normalization window.
class DegenerateAssetError : public DataError {
public:
    explicit DegenerateAssetError(std::string asset)
        : DataError("asset '" + asset + "' has zero variance in the normalization window"),
          asset_(std::move(asset)) {}

    [[nodiscard]] const std::string& asset() const noexcept { return asset_; }

private:
    std::string asset_;
};

/// alpha + beta >= 1: the unconditional variance does not exist.
class NonstationaryError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Regime filter hit a zero ex-ante probability or an all-zero density.
class FilterDegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Loss differential with zero long-run variance.
class DegenerateSeriesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base for optimizer failures. Derived types carry the best-so-far fit.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ogarch
