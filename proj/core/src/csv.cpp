#include "cpsem/csv.hpp"

#include "cpsem/errors.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace cpsem {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void CsvRow::sep() {
    if (!first_) line_.push_back(',');
    first_ = false;
}

CsvRow& CsvRow::operator<<(double v) {
    sep();
    line_ += format_number(v);
    return *this;
}

CsvRow& CsvRow::operator<<(long long v) {
    sep();
    line_ += std::to_string(v);
    return *this;
}

CsvRow& CsvRow::operator<<(std::string_view v) {
    sep();
    line_.append(v);
    return *this;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& path, std::string_view prefix) {
    const int d = path.states.empty() ? 0 : static_cast<int>(path.states.front().size());
    CsvRow header;
    header << "t";
    for (int k = 1; k <= d; ++k) header << std::string(prefix) + std::to_string(k);
    out << header.str() << '\n';
    for (std::size_t t = 0; t < path.states.size(); ++t) {
        CsvRow row;
        row << static_cast<long long>(t);
        for (int k = 0; k < d; ++k) row << path.states[t](k);
        out << row.str() << '\n';
    }
}

void write_observations_csv(std::ostream& out, std::span<const Observation> observations) {
    const int d = observations.empty() ? 0 : static_cast<int>(observations.front().size());
    CsvRow header;
    header << "t";
    for (int k = 1; k <= d; ++k) header << "y" + std::to_string(k);
    out << header.str() << '\n';
    for (std::size_t t = 0; t < observations.size(); ++t) {
        CsvRow row;
        row << static_cast<long long>(t + 1);
        for (int k = 0; k < d; ++k) row << observations[t](k);
        out << row.str() << '\n';
    }
}

std::vector<std::vector<double>> read_numeric_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool first = true;
        while (std::getline(ss, cell, ',')) {
            if (first) {
                first = false;
                continue;
            }
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
                throw InvalidArgument("csv line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cpsem
