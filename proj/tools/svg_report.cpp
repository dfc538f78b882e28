#include "svg_report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <utility>
#include <vector>

#include "playtrack/errors.hpp"

namespace playtrack::tools {

namespace {

std::ofstream open_svg(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    return out;
}

std::string color_for(int id) {
    // Golden-angle hue steps keep neighbouring ids apart.
    const int hue = static_cast<int>((static_cast<long long>(id) * 137) % 360);
    char buf[32];
    std::snprintf(buf, sizeof buf, "hsl(%d,70%%,45%%)", hue < 0 ? hue + 360 : hue);
    return buf;
}

std::map<int, std::vector<std::pair<double, double>>> center_paths(const LabeledFrames& frames) {
    std::map<int, std::vector<std::pair<double, double>>> paths;
    for (const auto& [frame, rows] : frames) {
        for (const auto& r : rows) paths[r.id].emplace_back(r.box.cx(), r.box.cy());
    }
    return paths;
}

void polyline(std::ofstream& out, const std::vector<std::pair<double, double>>& pts,
              const std::string& stroke, double width, double opacity) {
    if (pts.size() < 2) return;
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width
        << "\" stroke-opacity=\"" << opacity << "\" points=\"";
    char buf[64];
    for (const auto& [x, y] : pts) {
        std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x, y);
        out << buf;
    }
    out << "\"/>\n";
}

}  // namespace

void write_trajectory_svg(const std::string& path, const LabeledFrames& gt,
                          const LabeledFrames& results, double image_width, double image_height) {
    auto out = open_svg(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << image_width << ' '
        << image_height << "\" width=\"" << image_width << "\" height=\"" << image_height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
    for (const auto& [id, pts] : center_paths(gt)) polyline(out, pts, "#999999", 3.0, 0.5);
    for (const auto& [id, pts] : center_paths(results)) {
        polyline(out, pts, color_for(id), 1.5, 0.9);
        char buf[96];
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">%d</text>\n",
                      pts.front().first, pts.front().second, color_for(id).c_str(), id);
        out << buf;
    }
    out << "</svg>\n";
}

void write_metric_bars_svg(const std::string& path, const EvalReport& r) {
    const std::array<std::pair<const char*, double>, 5> bars = {
        {{"HOTA", r.hota}, {"DetA", r.deta}, {"AssA", r.assa}, {"MOTA", r.mota}, {"IDF1", r.idf1}}};
    constexpr double kWidth = 420.0, kHeight = 260.0, kBase = 220.0, kScale = 180.0;
    auto out = open_svg(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
        << "\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<line x1=\"20\" y1=\"" << kBase << "\" x2=\"400\" y2=\"" << kBase << "\" stroke=\"black\"/>\n";
    char buf[256];
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double v = std::clamp(bars[i].second, 0.0, 1.0);
        const double x = 40.0 + 72.0 * static_cast<double>(i);
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.0f\" y=\"%.1f\" width=\"48\" height=\"%.1f\" fill=\"#4477aa\"/>\n"
                      "<text x=\"%.0f\" y=\"%.0f\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n"
                      "<text x=\"%.0f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%.1f</text>\n",
                      x, kBase - kScale * v, kScale * v, x + 24.0, kBase + 16.0, bars[i].first,
                      x + 24.0, kBase - kScale * v - 4.0, 100.0 * bars[i].second);
        out << buf;
    }
    out << "</svg>\n";
}

}  // namespace playtrack::tools
