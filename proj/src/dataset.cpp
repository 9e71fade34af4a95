#include "adl/dataset.hpp"

#include "adl/error.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <charconv>
#include <iterator>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

namespace adl {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view field, std::size_t line)
{
    field = trim(field);
    if (!field.empty() && field.front() == '+')
        field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw ParseError(fmt::format("malformed number '{}'", field), line);
    return value;
}

} // namespace

void Dataset::validate() const
{
    if (labels.empty())
        throw DataError("dataset is empty");
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw DataError("feature rows and labels differ in count");
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] > 1)
            throw DataError(fmt::format("label of row {} is not 0 or 1", j));
    }
    if (!features.allFinite())
        throw DataError("non-finite feature value");
}

Dataset load_dataset(const std::filesystem::path& path, bool has_header, Split split)
{
    std::ifstream in(path);
    if (!in)
        throw DataError(fmt::format("cannot open dataset '{}'", path.string()));

    std::vector<double> values;
    std::vector<std::uint8_t> labels;
    std::size_t columns = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && has_header)
            continue;
        const std::string_view row = trim(line);
        if (row.empty())
            continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = row.find(',', start);
            fields.push_back(row.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                  : comma - start));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (fields.size() < 2)
            throw ParseError("expected at least one feature and a label", line_no);
        if (columns == 0)
            columns = fields.size();
        else if (fields.size() != columns)
            throw ParseError(fmt::format("expected {} columns, found {}", columns, fields.size()), line_no);

        for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
            const double x = parse_real(fields[c], line_no);
            if (!std::isfinite(x))
                throw DataError(fmt::format("non-finite feature on line {}", line_no));
            values.push_back(x);
        }
        const double y = parse_real(fields.back(), line_no);
        if (y != 0.0 && y != 1.0)
            throw DataError(fmt::format("label on line {} is not 0 or 1", line_no));
        labels.push_back(static_cast<std::uint8_t>(y));
    }
    if (labels.empty())
        throw DataError(fmt::format("dataset '{}' has no observations", path.string()));

    Dataset data;
    const auto rows = static_cast<Eigen::Index>(labels.size());
    const auto d = static_cast<Eigen::Index>(columns - 1);
    data.features = Eigen::Map<const RowMatrix>(values.data(), rows, d);
    data.labels = std::move(labels);
    data.split = split;
    return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, bool with_header)
{
    fmt::memory_buffer buf;
    auto out = std::back_inserter(buf);
    if (with_header) {
        for (Eigen::Index c = 0; c < data.features.cols(); ++c)
            fmt::format_to(out, "x{},", c);
        fmt::format_to(out, "label\n");
    }
    for (Eigen::Index r = 0; r < data.features.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.features.cols(); ++c)
            fmt::format_to(out, "{:.17g},", data.features(r, c));
        fmt::format_to(out, "{}\n", static_cast<int>(data.labels[static_cast<std::size_t>(r)]));
    }
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f)
        throw DataError(fmt::format("failed writing '{}'", path.string()));
}

Eigen::MatrixXd feature_covariance(const Dataset& data)
{
    const Eigen::Index n = data.features.rows();
    if (n < 2)
        return Eigen::MatrixXd::Zero(data.features.cols(), data.features.cols());
    const Eigen::RowVectorXd mean = data.features.colwise().mean();
    const Eigen::MatrixXd centered = data.features.rowwise() - mean;
    return centered.transpose() * centered / static_cast<double>(n - 1);
}

PcaWhitening::PcaWhitening(const Dataset& train, std::size_t k)
{
    train.validate();
    const std::size_t d = train.dim();
    if (k == 0 || k > d)
        throw ParameterError(fmt::format("PCA dimension k={} must lie in [1, {}]", k, d));

    mean_ = train.features.colwise().mean().transpose();
    const Eigen::MatrixXd cov = feature_covariance(train);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw ConvergenceError("covariance eigendecomposition failed");

    // Eigen returns ascending eigenvalues.
    const Eigen::VectorXd& evals = eig.eigenvalues();
    const double largest = evals.size() > 0 ? evals(evals.size() - 1) : 0.0;
    const double tol = largest * static_cast<double>(d) * 1e-12;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i)
        if (evals(i) > tol && largest > 0.0)
            ++rank;
    if (k > rank)
        throw RankError(fmt::format("cannot retain {} components", k), rank);

    axes_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
    variances_.resize(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
        const Eigen::Index src = static_cast<Eigen::Index>(d - 1 - j);
        Eigen::VectorXd axis = eig.eigenvectors().col(src);
        Eigen::Index pivot = 0;
        axis.cwiseAbs().maxCoeff(&pivot);
        if (axis(pivot) < 0.0)
            axis = -axis;
        axes_.col(static_cast<Eigen::Index>(j)) = axis;
        variances_(static_cast<Eigen::Index>(j)) = evals(src);
    }
}

Dataset PcaWhitening::apply(const Dataset& data) const
{
    if (data.dim() != static_cast<std::size_t>(mean_.size()))
        throw DimensionError(fmt::format("dataset has {} features, whitening expects {}", data.dim(),
                                         mean_.size()));
    Dataset out;
    const Eigen::MatrixXd centered = data.features.rowwise() - mean_.transpose();
    const Eigen::RowVectorXd inv_sd = variances_.cwiseSqrt().cwiseInverse().transpose();
    out.features = (centered * axes_).array().rowwise() * inv_sd.array();
    out.labels = data.labels;
    out.split = data.split;
    return out;
}

std::pair<Dataset, Dataset> pca_whiten(const Dataset& train, const Dataset& test, std::size_t k)
{
    const PcaWhitening w(train, k);
    return {w.apply(train), w.apply(test)};
}

} // namespace adl
