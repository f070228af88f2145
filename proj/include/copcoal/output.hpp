#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace copcoal {

/// Real number with 17 significant digits; "inf", "-inf" and "nan" for
/// non-finite values.
std::string format_real(double x);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    /// Appends a row; the cell count must match the header.
    void add_row(std::vector<std::string> cells);

    const std::vector<std::string>& header() const noexcept { return header_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    /// Comma-separated, header first, LF line endings. Cells holding commas
    /// or quotes are quoted.
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
    bool markers = false;
    bool line = true;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool zero_line = false;
};

/// Line/scatter plot with axes, ticks and a legend.
std::string render_svg(const PlotSpec& plot);

/// Sensor map: coalition members joined to each other, coloured by
/// coalition, plus the source location.
struct MapPoint {
    double x;
    double y;
    int group;
    std::string label;
};
std::string render_map_svg(const std::string& title, const std::vector<MapPoint>& points, double source_x,
                           double source_y, double x_min, double x_max, double y_min, double y_max);

std::string palette(std::size_t i);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Writes `content` and returns its checksum; throws Io on failure.
std::string write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace copcoal
