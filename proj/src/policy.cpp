#include "alp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alp {

Matrix& Matrix::operator+=(const Matrix& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_)
        throw std::invalid_argument("matrix shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double Matrix::frobenius_norm() const {
    double ss = 0.0;
    for (double v : data_) ss += v * v;
    return std::sqrt(ss);
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

PolicyParams PolicyParams::zeros(std::vector<int> bins, std::size_t feature_dim) {
    PolicyParams p;
    p.weights = Matrix(bins.size(), feature_dim, 0.0);
    p.bins = std::move(bins);
    p.validate();
    return p;
}

void PolicyParams::validate() const {
    if (bins.empty()) throw std::invalid_argument("policy.bins: must be non-empty");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i] <= 0) throw std::invalid_argument("policy.bins: lengths must be > 0");
        if (i > 0 && bins[i] <= bins[i - 1])
            throw std::invalid_argument("policy.bins: must be strictly increasing");
    }
    if (weights.rows() != bins.size())
        throw std::invalid_argument("policy weights: row count must equal number of bins");
    if (weights.cols() == 0) throw std::invalid_argument("policy.feature_dim: must be >= 1");
    if (!weights.all_finite()) throw std::invalid_argument("policy weights: non-finite value");
}

std::vector<double> features(double x, std::size_t dim) {
    std::vector<double> phi(dim);
    double power = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
        phi[i] = power;
        power *= x;
    }
    return phi;
}

namespace {

std::vector<double> logits(const PolicyParams& params, double feature) {
    if (!params.weights.all_finite()) throw std::invalid_argument("policy weights: non-finite value");
    const auto phi = features(feature, params.feature_dim());
    std::vector<double> z(params.num_bins(), 0.0);
    for (std::size_t b = 0; b < z.size(); ++b) {
        const auto w = params.weights.row(b);
        double acc = 0.0;
        for (std::size_t f = 0; f < phi.size(); ++f) acc += w[f] * phi[f];
        z[b] = acc;
    }
    return z;
}

}  // namespace

std::vector<double> bin_distribution(const PolicyParams& params, double feature) {
    auto z = logits(params, feature);
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double& v : z) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : z) v /= total;
    return z;
}

std::vector<double> log_bin_distribution(const PolicyParams& params, double feature) {
    auto z = logits(params, feature);
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double v : z) total += std::exp(v - top);
    const double log_norm = top + std::log(total);
    for (double& v : z) v -= log_norm;
    return z;
}

std::size_t sample_index(std::span<const double> probs, RandomStream& stream) {
    const double u = stream.uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        cumulative += probs[i];
        if (u < cumulative) return i;
    }
    // Rounding can leave the cumulative sum just short of 1; the remainder
    // belongs to the last bin with non-zero mass.
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0) return i;
    return probs.size() - 1;
}

LengthChoice sample_length(const PolicyParams& params, double feature, RandomStream& stream) {
    const auto probs = bin_distribution(params, feature);
    const std::size_t bin = sample_index(probs, stream);
    const auto log_probs = log_bin_distribution(params, feature);
    return {bin, log_probs[bin]};
}

Matrix grad_log_prob(const PolicyParams& params, double feature, std::size_t bin_index) {
    if (bin_index >= params.num_bins()) throw std::out_of_range("bin index out of range");
    const auto probs = bin_distribution(params, feature);
    const auto phi = features(feature, params.feature_dim());
    Matrix grad(params.num_bins(), phi.size());
    for (std::size_t b = 0; b < probs.size(); ++b) {
        const double coeff = (b == bin_index ? 1.0 : 0.0) - probs[b];
        for (std::size_t f = 0; f < phi.size(); ++f) grad(b, f) = coeff * phi[f];
    }
    return grad;
}

std::size_t nearest_bin(std::span<const int> bins, double target_length) {
    if (bins.empty()) throw std::invalid_argument("empty bin list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < bins.size(); ++i) {
        if (std::abs(bins[i] - target_length) < std::abs(bins[best] - target_length)) best = i;
    }
    return best;
}

LengthChoice FrozenPolicy::draw(double feature, RandomStream& stream) const {
    if (forced_bin) {
        stream.uniform();  // keep stream consumption independent of forcing
        return {*forced_bin, 0.0};
    }
    return sample_length(params, feature, stream);
}

LengthChoice FrozenPolicy::draw(std::span<const double> probs, std::span<const double> log_probs,
                                RandomStream& stream) const {
    const std::size_t bin = sample_index(probs, stream);
    if (forced_bin) return {*forced_bin, 0.0};
    return {bin, log_probs[bin]};
}

}  // namespace alp
