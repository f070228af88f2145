#include "copcoal/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <openssl/evp.h>

#include "copcoal/error.hpp"

namespace copcoal {

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    require(cells.size() == header_.size(), ErrorKind::DimensionMismatch, "CSV row width does not match header");
    rows_.push_back(std::move(cells));
}

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

void append_row(std::string& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += csv_cell(row[i]);
    }
    out += '\n';
}

}  // namespace

std::string CsvTable::str() const {
    std::string out;
    append_row(out, header_);
    for (const auto& r : rows_) append_row(out, r);
    return out;
}

std::string palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[i % (sizeof colors / sizeof colors[0])];
}

// --- SVG -------------------------------------------------------------------

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(x) < 1e-12 ? 0.0 : x);
    return buf;
}

// Roughly five ticks at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(t);
    return out;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void expand(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double m = std::isfinite(lo) ? lo : 0.0;
        lo = m - 1.0;
        hi = m + 1.0;
        return;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

std::string axes(const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
    std::string s;
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kWidth - kLeft - kRight) +
         "\" height=\"" + num(kHeight - kTop - kBottom) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double t : ticks(f.x0, f.x1)) {
        s += "<line x1=\"" + num(f.px(t)) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" + num(f.px(t)) +
             "\" y2=\"" + num(kHeight - kBottom + 5) + "\" stroke=\"#333\"/>\n";
        s += "<text x=\"" + num(f.px(t)) + "\" y=\"" + num(kHeight - kBottom + 18) +
             "\" font-size=\"11\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
    }
    for (double t : ticks(f.y0, f.y1)) {
        s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(f.py(t)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
             num(f.py(t)) + "\" stroke=\"#333\"/>\n";
        s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(f.py(t) + 4) +
             "\" font-size=\"11\" text-anchor=\"end\">" + tick_label(t) + "</text>\n";
    }
    s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">" +
         esc(title) + "</text>\n";
    s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + esc(xl) + "</text>\n";
    s += "<text x=\"18\" y=\"" + num((kTop + kHeight - kBottom) / 2) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num((kTop + kHeight - kBottom) / 2) + ")\">" + esc(yl) + "</text>\n";
    return s;
}

std::string header() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
           "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string render_svg(const PlotSpec& plot) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : plot.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (plot.zero_line) {
        y0 = std::min(y0, 0.0);
        y1 = std::max(y1, 0.0);
    }
    expand(x0, x1);
    expand(y0, y1);
    const Frame f{x0, x1, y0, y1};
    std::string out = header() + axes(f, plot.title, plot.x_label, plot.y_label);
    if (plot.zero_line) {
        out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(f.py(0)) + "\" x2=\"" + num(kWidth - kRight) +
               "\" y2=\"" + num(f.py(0)) + "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const std::string color = s.color.empty() ? palette(k) : s.color;
        if (s.line) {
            std::string pts;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                pts += num(f.px(s.x[i])) + "," + num(f.py(s.y[i])) + " ";
            }
            out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
        }
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out += "<circle cx=\"" + num(f.px(s.x[i])) + "\" cy=\"" + num(f.py(s.y[i])) + "\" r=\"3\" fill=\"" +
                       color + "\"/>\n";
            }
        }
        const double ly = kTop + 14 + 18 * static_cast<double>(k);
        out += "<line x1=\"" + num(kWidth - kRight + 12) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
               num(kWidth - kRight + 32) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(kWidth - kRight + 37) + "\" y=\"" + num(ly) + "\" font-size=\"11\">" + esc(s.name) +
               "</text>\n";
    }
    return out + "</svg>\n";
}

std::string render_map_svg(const std::string& title, const std::vector<MapPoint>& points, double source_x,
                           double source_y, double x_min, double x_max, double y_min, double y_max) {
    const Frame f{x_min, x_max, y_min, y_max};
    std::string out = header() + axes(f, title, "x", "y");
    int groups = 0;
    for (const auto& p : points) groups = std::max(groups, p.group + 1);
    for (int g = 0; g < groups; ++g) {
        std::vector<const MapPoint*> members;
        for (const auto& p : points) {
            if (p.group == g) members.push_back(&p);
        }
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                out += "<line x1=\"" + num(f.px(members[a]->x)) + "\" y1=\"" + num(f.py(members[a]->y)) +
                       "\" x2=\"" + num(f.px(members[b]->x)) + "\" y2=\"" + num(f.py(members[b]->y)) +
                       "\" stroke=\"" + palette(static_cast<std::size_t>(g)) + "\" stroke-opacity=\"0.6\"/>\n";
            }
        }
    }
    for (const auto& p : points) {
        out += "<circle cx=\"" + num(f.px(p.x)) + "\" cy=\"" + num(f.py(p.y)) + "\" r=\"5\" fill=\"" +
               palette(static_cast<std::size_t>(p.group)) + "\"/>\n";
        out += "<text x=\"" + num(f.px(p.x) + 7) + "\" y=\"" + num(f.py(p.y) - 6) + "\" font-size=\"11\">" +
               esc(p.label) + "</text>\n";
    }
    out += "<path d=\"M " + num(f.px(source_x) - 6) + " " + num(f.py(source_y) - 6) + " L " + num(f.px(source_x) + 6) +
           " " + num(f.py(source_y) + 6) + " M " + num(f.px(source_x) - 6) + " " + num(f.py(source_y) + 6) + " L " +
           num(f.px(source_x) + 6) + " " + num(f.py(source_y) - 6) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(kTop + 14) +
           "\" font-size=\"11\">x = source</text>\n";
    for (int g = 0; g < groups; ++g) {
        const double ly = kTop + 32 + 18 * g;
        out += "<circle cx=\"" + num(kWidth - kRight + 18) + "\" cy=\"" + num(ly - 4) + "\" r=\"5\" fill=\"" +
               palette(static_cast<std::size_t>(g)) + "\"/>\n";
        out += "<text x=\"" + num(kWidth - kRight + 28) + "\" y=\"" + num(ly) + "\" font-size=\"11\">coalition " +
               std::to_string(g + 1) + "</text>\n";
    }
    return out + "</svg>\n";
}

// --- files -----------------------------------------------------------------

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    require(ctx != nullptr, ErrorKind::Io, "cannot allocate digest context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, md, &len) == 1;
    EVP_MD_CTX_free(ctx);
    require(ok, ErrorKind::Io, "SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << content;
    out.close();
    require(!out.fail(), ErrorKind::Io, "write failed for '" + path.string() + "'");
    return sha256_hex(content);
}

}  // namespace copcoal
