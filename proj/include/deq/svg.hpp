#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "deq/types.hpp"

namespace deq {

/// Minimal self-contained line-plot writer. Plots are derived views: every
/// rendered series names its CSV source in a <desc> element, and the CSV is
/// the source of truth for the numbers.
class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel, bool log_y = false)
        : title_(std::move(title)),
          xlabel_(std::move(xlabel)),
          ylabel_(std::move(ylabel)),
          log_y_(log_y) {}

    void add_series(const std::vector<double>& x, const std::vector<double>& y,
                    const std::string& color) {
        series_.push_back({x, y, color});
    }

    void add_marker(double x, double y, const std::string& color) {
        markers_.push_back({x, y, color});
    }

    void set_source(std::string desc) { source_ = std::move(desc); }

    void write(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw InputError("cannot open for writing: " + path);
        write(os);
    }

    void write(std::ostream& os) const {
        const int width = 640, height = 420;
        const double ml = 70, mr = 20, mt = 40, mb = 50;

        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool first = true;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                const double yv = transform_y(s.y[i]);
                if (!std::isfinite(yv)) continue;
                if (first) {
                    xmin = xmax = s.x[i];
                    ymin = ymax = yv;
                    first = false;
                } else {
                    xmin = std::min(xmin, s.x[i]);
                    xmax = std::max(xmax, s.x[i]);
                    ymin = std::min(ymin, yv);
                    ymax = std::max(ymax, yv);
                }
            }
        }
        for (const auto& m : markers_) {
            const double yv = transform_y(m.y);
            if (!std::isfinite(yv)) continue;
            xmin = std::min(xmin, m.x);
            xmax = std::max(xmax, m.x);
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
        }
        if (xmax == xmin) xmax = xmin + 1.0;
        if (ymax == ymin) ymax = ymin + 1.0;

        auto sx = [&](double x) {
            return ml + (width - ml - mr) * (x - xmin) / (xmax - xmin);
        };
        auto sy = [&](double y) {
            return height - mb - (height - mt - mb) * (transform_y(y) - ymin) / (ymax - ymin);
        };

        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
           << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
        if (!source_.empty()) os << "  <desc>source: " << source_ << "</desc>\n";
        os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "  <text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
           << "font-family=\"sans-serif\" font-size=\"15\">" << title_ << "</text>\n";

        // axes
        os << "  <line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
           << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
        os << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
           << height - mb << "\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double fx = xmin + (xmax - xmin) * i / 4.0;
            const double px = sx(fx);
            os << "  <line x1=\"" << fmt(px) << "\" y1=\"" << height - mb << "\" x2=\""
               << fmt(px) << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
            os << "  <text x=\"" << fmt(px) << "\" y=\"" << height - mb + 18
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
               << fmt(fx) << "</text>\n";
            const double fy = ymin + (ymax - ymin) * i / 4.0;
            const double py = height - mb - (height - mt - mb) * i / 4.0;
            os << "  <line x1=\"" << ml - 5 << "\" y1=\"" << fmt(py) << "\" x2=\"" << ml
               << "\" y2=\"" << fmt(py) << "\" stroke=\"black\"/>\n";
            os << "  <text x=\"" << ml - 8 << "\" y=\"" << fmt(py + 4)
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
               << fmt(log_y_ ? std::pow(10.0, fy) : fy) << "</text>\n";
        }
        os << "  <text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 10
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel_
           << "</text>\n";
        os << "  <text x=\"16\" y=\"" << (mt + height - mb) / 2
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           << "transform=\"rotate(-90 16 " << (mt + height - mb) / 2 << ")\">" << ylabel_
           << "</text>\n";

        for (const auto& s : series_) {
            os << "  <polyline fill=\"none\" stroke=\"" << s.color
               << "\" stroke-width=\"1.5\" points=\"";
            bool started = false;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(transform_y(s.y[i]))) continue;
                if (started) os << ' ';
                os << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i]));
                started = true;
            }
            os << "\"/>\n";
        }
        for (const auto& m : markers_) {
            if (!std::isfinite(transform_y(m.y))) continue;
            os << "  <circle cx=\"" << fmt(sx(m.x)) << "\" cy=\"" << fmt(sy(m.y))
               << "\" r=\"4\" fill=\"" << m.color << "\"/>\n";
        }
        os << "</svg>\n";
    }

  private:
    struct Series {
        std::vector<double> x, y;
        std::string color;
    };
    struct Marker {
        double x, y;
        std::string color;
    };

    double transform_y(double y) const {
        if (!log_y_) return y;
        return y > 0.0 ? std::log10(y) : std::nan("");
    }

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return buf;
    }

    std::string title_, xlabel_, ylabel_;
    bool log_y_;
    std::vector<Series> series_;
    std::vector<Marker> markers_;
    std::string source_;
};

}  // namespace deq
