#pragma once

#include "regime_ogarch/data_io.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ogarch {

/// Recorded in sidecar metadata so a panel can be regenerated bit for bit.
inline constexpr const char* kRngName = "mt19937_64/uniform53/box-muller";

/**
 * Seeded source of uniforms and standard normals.
 *
 * Uniforms take the top 53 bits of a std::mt19937_64 draw, and normals come
 * from the basic Box-Muller transform with the second value cached.
 * Neither step depends on the standard library's distribution classes, whose
 * output is implementation-defined.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Lower Cholesky factor of `cov`, after clipping negative eigenvalues to zero if needed.
[[nodiscard]] Eigen::MatrixXd sampling_factor(const Eigen::MatrixXd& cov);

struct SquareWaveSpec {
    int period = 100;                       ///< rows per tranquil or volatile segment
    std::vector<double> vol_low{0.5, 1.0};  ///< per asset
    std::vector<double> vol_high{1.0, 2.0};
    double correlation = 0.1;
    int length = 1000;
    std::uint64_t seed = 7;

    void validate() const;
};

struct SquareWaveData {
    ReturnPanel panel;
    Eigen::MatrixXd true_vol;  ///< T x I
    std::vector<int> regime;   ///< 0 tranquil, 1 volatile, per row
};

/// Every asset starts tranquil for `period` rows, then switches to its high level for `period` rows, and so on.
[[nodiscard]] SquareWaveData gen_square_wave(const SquareWaveSpec& spec);

struct RegimeBlockSpec {
    int dims = 10;
    std::vector<std::size_t> bounds{0, 500, 3000, 5000};  ///< block b covers rows [bounds[b], bounds[b+1])
    std::vector<Eigen::MatrixXd> covariances;              ///< one per block
    std::vector<std::string> labels;                       ///< one per block, e.g. "normal" / "crisis"
    std::uint64_t seed = 11;

    [[nodiscard]] std::size_t blocks() const noexcept { return covariances.size(); }
    [[nodiscard]] std::size_t length() const noexcept { return bounds.back(); }
    [[nodiscard]] std::size_t block_of(std::size_t row) const;
    void validate() const;
};

struct RegimeBlockData {
    ReturnPanel panel;
    std::vector<Eigen::MatrixXd> true_cov;  ///< per block
};

[[nodiscard]] RegimeBlockData gen_regime_blocks(const RegimeBlockSpec& spec);

/// A'A + ridge * I with A's entries uniform on [-c, c].
[[nodiscard]] Eigen::MatrixXd random_covariance(Rng& rng, int dims, double c, double ridge);

struct RegimePresetOptions {
    int dims = 10;
    double c_normal = 0.5;
    double c_volatile = 2.0;
    double ridge = 0.01;
    std::uint64_t seed = 11;
};

/// Normal / crisis / normal blocks over rows [0,500), [500,3000), [3000,5000);
/// both normal blocks share one covariance.
[[nodiscard]] RegimeBlockSpec regime_block_preset(const RegimePresetOptions& options = {});

/// Frobenius norm of a - b.
[[nodiscard]] double covariance_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Integer row labels "0", "1", ... used as dates of synthetic panels.
[[nodiscard]] std::vector<std::string> index_dates(std::size_t n);

}  // namespace ogarch
