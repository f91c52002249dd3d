#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace scprop::io {

/// Shortest-or-17-digit decimal, independent of the global locale.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("bad number '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        if (sep == ' ') {
            while (start < s.size() && s[start] == ' ') ++start;
            if (start >= s.size()) break;
        }
        size_t end = s.find(sep, start);
        out.push_back(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

struct GridFile {
    ComplexField2D field;
    double t = 0.0;
};

inline std::string emit(const GridFile& g) {
    const auto& f = g.field;
    std::string s = "# " + std::to_string(f.x_axis.n) + " " + std::to_string(f.y_axis.n) + " " + format_double(f.x_axis.lo) +
                    " " + format_double(f.x_axis.hi) + " " + format_double(f.y_axis.lo) + " " + format_double(f.y_axis.hi) +
                    " " + format_double(g.t) + "\n";
    for (const auto& v : f.values) s += format_double(v.real()) + " " + format_double(v.imag()) + "\n";
    return s;
}

inline GridFile parse_grid(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ParseError("missing grid header");
    const auto h = split(std::string_view(line).substr(2), ' ');
    if (h.size() != 7) throw ParseError("grid header needs 7 fields");
    auto to_int = [](std::string_view s) {
        int v = 0;
        auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 2) throw ParseError("bad grid size");
        return v;
    };
    GridFile g;
    g.field = ComplexField2D(UniformAxis(parse_double(h[2]), parse_double(h[3]), to_int(h[0])),
                             UniformAxis(parse_double(h[4]), parse_double(h[5]), to_int(h[1])));
    g.t = parse_double(h[6]);
    size_t k = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split(line, ' ');
        if (parts.size() != 2) throw ParseError("grid line needs 're im'");
        if (k >= g.field.values.size()) throw ParseError("too many grid lines");
        g.field.values[k++] = {parse_double(parts[0]), parse_double(parts[1])};
    }
    if (k != g.field.values.size()) throw ParseError("too few grid lines");
    return g;
}

inline std::string emit(const TimeSeries& ts) {
    if (ts.t.size() != ts.values.size()) throw InvalidArgument("series lengths differ");
    std::string s = "t,re,im\n";
    for (size_t k = 0; k < ts.t.size(); ++k) {
        if (k > 0 && !(ts.t[k] > ts.t[k - 1])) throw InvalidArgument("series times must increase");
        s += format_double(ts.t[k]) + "," + format_double(ts.values[k].real()) + "," + format_double(ts.values[k].imag()) + "\n";
    }
    return s;
}

inline TimeSeries parse_series(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,re,im") throw ParseError("missing series header");
    TimeSeries ts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 3) throw ParseError("series row needs t,re,im");
        const double t = parse_double(parts[0]);
        if (!ts.t.empty() && !(t > ts.t.back())) throw ParseError("series times must increase");
        ts.t.push_back(t);
        ts.values.emplace_back(parse_double(parts[1]), parse_double(parts[2]));
    }
    return ts;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw MissingFile(p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + p.string());
    out << text;
}

enum class PlotStyle { Heatmap, Line };

/// gnuplot script: GridFiles become |K| and Re K heatmap rows (one column per file),
/// SeriesFiles become one |C(t)| line plot.
inline std::string emit_plot_script(const std::vector<std::filesystem::path>& files, PlotStyle style) {
    if (files.empty()) throw MissingFile("no input files for the plot script");
    for (const auto& f : files)
        if (!std::filesystem::exists(f)) throw MissingFile(f.string());
    std::ostringstream s;
    s << "set terminal pngcairo size " << 400 * (style == PlotStyle::Heatmap ? files.size() : 2) << ","
      << (style == PlotStyle::Heatmap ? 800 : 400) << "\n";
    s << "set output 'plot.png'\n";
    if (style == PlotStyle::Heatmap) {
        s << "set multiplot layout 2," << files.size() << "\n";
        s << "set view map\nset size ratio -1\nunset key\n";
        for (const char* part : {"abs", "re"}) {
            for (const auto& f : files) {
                std::ifstream in(f);
                std::string header;
                std::getline(in, header);
                if (header.rfind("# ", 0) != 0) throw ParseError("missing grid header in " + f.string());
                std::istringstream hl(header.substr(2));
                std::string nx, ny, x0, x1, y0, y1, t;
                hl >> nx >> ny >> x0 >> x1 >> y0 >> y1 >> t;
                const std::string expr = std::string(part) == "abs" ? "sqrt($1**2+$2**2)" : "$1";
                s << "set title '" << f.filename().string() << " " << part << " t=" << t << "'\n";
                s << "plot '" << f.string() << "' using (" << x0 << "+int($0/" << ny << ")*(" << x1 << "-(" << x0
                  << "))/(" << nx << "-1)):(" << y0 << "+int($0)%" << ny << "*(" << y1 << "-(" << y0 << "))/(" << ny
                  << "-1)):(" << expr << ") with image\n";
            }
        }
        s << "unset multiplot\n";
    } else {
        s << "set datafile separator ','\nset xlabel 't'\nset ylabel '|C(t)|'\nplot ";
        for (size_t k = 0; k < files.size(); ++k)
            s << (k ? ", " : "") << "'" << files[k].string() << "' every ::1 using 1:(sqrt($2**2+$3**2)) with lines title '"
              << files[k].stem().string() << "'";
        s << "\n";
    }
    return s.str();
}

}  // namespace scprop::io
