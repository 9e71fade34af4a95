#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace adl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Split { Train, Test };

/// Binary-labelled observations: one feature row per observation.
struct Dataset {
    RowMatrix features;               // rows x d
    std::vector<std::uint8_t> labels; // 0 or 1, one per row
    Split split = Split::Train;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }

    /// Throws DataError on empty data, non-binary labels, non-finite
    /// features, or a row/label count mismatch.
    void validate() const;
};

/// Reads comma-separated rows "x_1,...,x_d,label". With `has_header` the
/// first line is skipped. Row order is preserved.
Dataset load_dataset(const std::filesystem::path& path, bool has_header = false,
                     Split split = Split::Train);

/// Writes the same format load_dataset reads (17 significant digits).
void save_dataset(const Dataset& data, const std::filesystem::path& path, bool with_header = true);

/// Centering + projection onto the top-k principal axes of the train
/// covariance + per-axis scaling to unit train variance.
class PcaWhitening {
public:
    /// Fits on `train`. Throws RankError if k exceeds the effective rank of
    /// the train covariance, ParameterError if k is 0 or exceeds d.
    PcaWhitening(const Dataset& train, std::size_t k);

    Dataset apply(const Dataset& data) const;

    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    /// d x k, columns are unit principal axes in decreasing-variance order.
    const Eigen::MatrixXd& axes() const noexcept { return axes_; }
    /// Train variance along each retained axis.
    const Eigen::VectorXd& variances() const noexcept { return variances_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd axes_;
    Eigen::VectorXd variances_;
};

/// Fit on train, apply to both. Test uses train statistics only.
std::pair<Dataset, Dataset> pca_whiten(const Dataset& train, const Dataset& test, std::size_t k);

/// Sample covariance (1/(N-1) normalization) of the feature columns.
Eigen::MatrixXd feature_covariance(const Dataset& data);

} // namespace adl
