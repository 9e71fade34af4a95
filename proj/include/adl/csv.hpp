#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace adl {

/// Round-trippable decimal form ({:.17g}).
std::string format_real(double x);

/// Column-oriented CSV table with a header row.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t rows() const noexcept { return rows_.size(); }

    /// Throws DimensionError if the row length differs from the header.
    void add_row(std::vector<double> row);
    void add_rows(const Eigen::MatrixXd& block);

    std::string str() const;

    /// Writes the table, creating parent directories. Throws DataError on
    /// I/O failure.
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

} // namespace adl
