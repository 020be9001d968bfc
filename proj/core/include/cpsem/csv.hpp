#pragma once

#include "cpsem/types.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpsem {

/// Shortest decimal form that round-trips (std::to_chars), so identical
/// doubles always print identically. NaN and infinities print as nan/inf/-inf.
std::string format_number(double v);

/// One comma-separated line, built field by field.
class CsvRow {
public:
    CsvRow& operator<<(double v);
    CsvRow& operator<<(long long v);
    CsvRow& operator<<(int v) { return *this << static_cast<long long>(v); }
    CsvRow& operator<<(std::string_view v);
    CsvRow& operator<<(const char* v) { return *this << std::string_view(v); }
    CsvRow& operator<<(const std::string& v) { return *this << std::string_view(v); }

    const std::string& str() const { return line_; }

private:
    void sep();
    std::string line_;
    bool first_ = true;
};

/// `t,x1..x{d}` rows for t = 0..T.
void write_trajectory_csv(std::ostream& out, const Trajectory& path, std::string_view prefix = "x");

/// `t,y1..y{d}` rows for t = 1..T.
void write_observations_csv(std::ostream& out, std::span<const Observation> observations);

/// Minimal reader for the two formats above: skips the header, drops the
/// first (time) column, returns the remaining numbers row by row.
std::vector<std::vector<double>> read_numeric_csv(std::istream& in);

}  // namespace cpsem
