#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "alp/random.hpp"
#include "alp/rollout.hpp"

namespace alp {

/// Dense row-major matrix; just enough for B x F policy weights.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator*=(double s);

    double frobenius_norm() const;
    bool all_finite() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline const std::vector<int> kDefaultBins = {32, 64, 128, 256, 512, 1024, 2048, 4096};
inline constexpr std::size_t kDefaultFeatureDim = 3;

/// Categorical policy over length bins: one weight row per bin, one column
/// per basis feature.
struct PolicyParams {
    Matrix weights;
    std::vector<int> bins;

    std::size_t num_bins() const { return bins.size(); }
    std::size_t feature_dim() const { return weights.cols(); }

    /// Zero weights, i.e. the uniform policy.
    static PolicyParams zeros(std::vector<int> bins = kDefaultBins,
                              std::size_t feature_dim = kDefaultFeatureDim);

    // Throws std::invalid_argument on unsorted bins, shape mismatch or
    // non-finite weights.
    void validate() const;
};

/// Polynomial basis [1, x, x^2, ...] of length `dim`.
std::vector<double> features(double x, std::size_t dim = kDefaultFeatureDim);

/// Softmax over weights * features(x), stabilised by max-logit subtraction.
std::vector<double> bin_distribution(const PolicyParams& params, double feature);

/// Log of bin_distribution computed directly in log space.
std::vector<double> log_bin_distribution(const PolicyParams& params, double feature);

struct LengthChoice {
    std::size_t bin_index = 0;
    double log_prob = 0.0;
};

/// Inverse-CDF draw from a probability vector (one uniform).
std::size_t sample_index(std::span<const double> probs, RandomStream& stream);

LengthChoice sample_length(const PolicyParams& params, double feature, RandomStream& stream);

/// d/dW log pi(bin | feature) = (onehot(bin) - p) outer features(feature).
Matrix grad_log_prob(const PolicyParams& params, double feature, std::size_t bin_index);

/// Index of the bin closest to `target_length`; ties go to the shorter bin.
std::size_t nearest_bin(std::span<const int> bins, double target_length);

/// A trained policy as used at evaluation time. When `forced_bin` is set
/// every draw returns that bin with log-probability 0.
struct FrozenPolicy {
    PolicyParams params;
    std::optional<std::size_t> forced_bin;

    LengthChoice draw(double feature, RandomStream& stream) const;
    // Same draw with the distribution for this feature already computed.
    LengthChoice draw(std::span<const double> probs, std::span<const double> log_probs,
                      RandomStream& stream) const;
};

}  // namespace alp
