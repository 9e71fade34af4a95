#include "adl/csv.hpp"

#include "adl/error.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <fstream>

namespace adl {

std::string format_real(double x) { return fmt::format("{:.17g}", x); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header))
{
    if (header_.empty())
        throw ParameterError("CSV table needs at least one column");
}

void CsvTable::add_row(std::vector<double> row)
{
    if (row.size() != header_.size())
        throw DimensionError(fmt::format("CSV row has {} fields, header has {}", row.size(), header_.size()));
    rows_.push_back(std::move(row));
}

void CsvTable::add_rows(const Eigen::MatrixXd& block)
{
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(block.cols()));
        for (Eigen::Index c = 0; c < block.cols(); ++c)
            row[static_cast<std::size_t>(c)] = block(r, c);
        add_row(std::move(row));
    }
}

std::string CsvTable::str() const
{
    std::string out = fmt::format("{}\n", fmt::join(header_, ","));
    for (const auto& row : rows_) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0)
                out.push_back(',');
            out += format_real(row[j]);
        }
        out.push_back('\n');
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
    f << str();
    if (!f)
        throw DataError(fmt::format("failed writing '{}'", path.string()));
}

} // namespace adl
