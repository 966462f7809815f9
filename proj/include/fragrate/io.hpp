#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace fragrate::io {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Writes next to the target and renames, so readers never see half a file.
inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f << content;
        if (!f) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
            os << '\n';
        }
        return os.str();
    }
};

inline void write_xy_csv(const std::filesystem::path& path, const std::string& xname, const std::string& yname,
                         const std::vector<double>& x, const std::vector<double>& y) {
    Table t;
    t.header = {xname, yname};
    for (std::size_t i = 0; i < x.size(); ++i) t.rows.push_back({fmt17(x[i]), fmt17(y[i])});
    write_atomically(path, t.str());
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) throw Error(what + ": not a number: '" + t + "'");
    return v;
}

// Two-column CSV with a header row.
inline std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw Error(path.string() + " is empty");
    std::vector<double> x, y;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() < 2) throw Error(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
        x.push_back(parse_double(cols[0], path.string() + ":" + std::to_string(lineno)));
        y.push_back(parse_double(cols[1], path.string() + ":" + std::to_string(lineno)));
    }
    return {std::move(x), std::move(y)};
}

using Meta = std::vector<std::pair<std::string, std::string>>;

inline void write_meta(const std::filesystem::path& path, const Meta& m) {
    std::ostringstream os;
    for (const auto& [k, v] : m) os << k << " = " << v << '\n';
    write_atomically(path, os.str());
}

inline Meta read_meta(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path.string());
    Meta m;
    std::string line;
    while (std::getline(f, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        m.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return m;
}

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

// Minimal SVG line chart, optionally with log10 axes.
inline std::string svg_chart(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                             const std::string& ylabel, bool logx, bool logy) {
    const double W = 640, H = 420, L = 70, R = 20, T = 40, Bm = 50;
    auto tx = [&](double v) { return logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return logy ? std::log10(v) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((logx && !(s.x[i] > 0)) || (logy && !(s.y[i] > 0)) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - Bm - (ty(v) - y0) / (y1 - y0) * (H - T - Bm); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - Bm << "\" x2=\"" << W - R << "\" y2=\"" << H - Bm << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - Bm << "\" stroke=\"black\"/>\n";
    auto label = [&](double v, bool log) {
        char b[32];
        std::snprintf(b, sizeof b, log ? "1e%.1f" : "%.3g", v);
        return std::string(b);
    };
    os << "<text x=\"" << L << "\" y=\"" << H - Bm + 16 << "\" font-size=\"11\">" << label(x0, logx) << "</text>\n";
    os << "<text x=\"" << W - R << "\" y=\"" << H - Bm + 16 << "\" font-size=\"11\" text-anchor=\"end\">" << label(x1, logx) << "</text>\n";
    os << "<text x=\"" << L - 4 << "\" y=\"" << H - Bm << "\" font-size=\"11\" text-anchor=\"end\">" << label(y0, logy) << "</text>\n";
    os << "<text x=\"" << L - 4 << "\" y=\"" << T + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << label(y1, logy) << "</text>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2 << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    double legend_y = T + 4;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((logx && !(s.x[i] > 0)) || (logy && !(s.y[i] > 0)) || !std::isfinite(s.y[i])) continue;
            os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - R - 150 << "\" y=\"" << legend_y + 12 << "\" font-size=\"12\" fill=\"" << s.color << "\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace fragrate::io
