#include "uotlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uotlab/error.hpp"
#include "uotlab/io.hpp"

namespace uotlab {

namespace {

constexpr double kPanelW = 420, kPanelH = 340;
constexpr double kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;

std::string num(double v) {
  // Fixed 3 decimals keeps the SVG small and deterministic.
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(3);
  s << v;
  return s.str();
}

std::string escape(const std::string& in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Pt {
  double lx, ly;  // log10 coordinates
};

void panel(std::ostringstream& o, double x0, const PlotSeries& s, const std::string& name,
           const std::string& ylabel) {
  std::vector<Pt> data;
  for (std::size_t i = 0; i < s.t.size() && i < s.err.size(); ++i) {
    if (s.t[i] > 0.0 && s.err[i] > 0.0 && std::isfinite(s.err[i])) {
      data.push_back({std::log10(s.t[i]), std::log10(s.err[i])});
    }
  }

  // Guides start at the first point inside the fit window.
  std::vector<Pt> g_half, g_one;
  if (!data.empty()) {
    Pt a = data.front();
    if (s.fit) {
      const double lo = std::log10(s.fit->t_min_fit) - 1e-12;
      for (const Pt& p : data) {
        if (p.lx >= lo) {
          a = p;
          break;
        }
      }
    }
    const double end = data.back().lx;
    g_half = {a, {end, a.ly - 0.5 * (end - a.lx)}};
    g_one = {a, {end, a.ly - 1.0 * (end - a.lx)}};
  }

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!data.empty()) {
    xmin = xmax = data[0].lx;
    ymin = ymax = data[0].ly;
    for (const auto* v : {&data, &g_half, &g_one}) {
      for (const Pt& p : *v) {
        xmin = std::min(xmin, p.lx);
        xmax = std::max(xmax, p.lx);
        ymin = std::min(ymin, p.ly);
        ymax = std::max(ymax, p.ly);
      }
    }
  }
  xmin = std::floor(xmin);
  xmax = std::max(std::ceil(xmax), xmin + 1);
  ymin = std::floor(ymin);
  ymax = std::max(std::ceil(ymax), ymin + 1);

  const double pw = kPanelW - kMarginL - kMarginR;
  const double ph = kPanelH - kMarginT - kMarginB;
  auto X = [&](double lx) { return x0 + kMarginL + (lx - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double ly) { return kMarginT + (ymax - ly) / (ymax - ymin) * ph; };

  o << "<g class=\"panel\" id=\"" << name << "\">\n";
  o << "<text x=\"" << num(x0 + kMarginL + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
       "font-size=\"14\">" << name << "</text>\n";
  o << "<rect x=\"" << num(X(xmin)) << "\" y=\"" << num(Y(ymax)) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#000\"/>\n";

  const int ystep = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / 8)));
  for (double d = xmin; d <= xmax + 1e-9; d += 1) {
    o << "<line x1=\"" << num(X(d)) << "\" y1=\"" << num(Y(ymin)) << "\" x2=\"" << num(X(d))
      << "\" y2=\"" << num(Y(ymin) + 5) << "\" stroke=\"#000\"/>\n";
    o << "<text x=\"" << num(X(d)) << "\" y=\"" << num(Y(ymin) + 18)
      << "\" text-anchor=\"middle\" font-size=\"10\">1e" << static_cast<int>(d) << "</text>\n";
  }
  for (double d = ymin; d <= ymax + 1e-9; d += ystep) {
    o << "<line x1=\"" << num(X(xmin) - 5) << "\" y1=\"" << num(Y(d)) << "\" x2=\""
      << num(X(xmin)) << "\" y2=\"" << num(Y(d)) << "\" stroke=\"#000\"/>\n";
    o << "<text x=\"" << num(X(xmin) - 8) << "\" y=\"" << num(Y(d) + 3)
      << "\" text-anchor=\"end\" font-size=\"10\">1e" << static_cast<int>(d) << "</text>\n";
  }
  o << "<text x=\"" << num(x0 + kMarginL + pw / 2) << "\" y=\"" << num(kPanelH - 10)
    << "\" text-anchor=\"middle\" font-size=\"12\">t</text>\n";
  o << "<text x=\"" << num(x0 + 16) << "\" y=\"" << num(kMarginT + ph / 2)
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << num(x0 + 16)
    << " " << num(kMarginT + ph / 2) << ")\">" << escape(ylabel) << "</text>\n";

  std::string curve;
  for (std::size_t i = 0; i < data.size(); ++i) {
    curve += (i == 0 ? "M" : " L") + num(X(data[i].lx)) + " " + num(Y(data[i].ly));
  }
  o << "<path class=\"measured\" d=\"" << curve
    << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
  std::string guides;
  if (!g_half.empty()) {
    guides = "M" + num(X(g_half[0].lx)) + " " + num(Y(g_half[0].ly)) + " L" +
             num(X(g_half[1].lx)) + " " + num(Y(g_half[1].ly)) + " M" + num(X(g_one[0].lx)) +
             " " + num(Y(g_one[0].ly)) + " L" + num(X(g_one[1].lx)) + " " +
             num(Y(g_one[1].ly));
  }
  o << "<path class=\"guides\" d=\"" << guides
    << "\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  if (!g_half.empty()) {
    o << "<text x=\"" << num(X(g_half[1].lx) - 4) << "\" y=\"" << num(Y(g_half[1].ly) - 4)
      << "\" text-anchor=\"end\" font-size=\"10\" fill=\"#555\">slope -1/2</text>\n";
    o << "<text x=\"" << num(X(g_one[1].lx) - 4) << "\" y=\"" << num(Y(g_one[1].ly) - 4)
      << "\" text-anchor=\"end\" font-size=\"10\" fill=\"#555\">slope -1</text>\n";
  }
  if (s.fit) {
    o << "<text x=\"" << num(X(xmax) - 4) << "\" y=\"" << num(Y(ymax) + 14)
      << "\" text-anchor=\"end\" font-size=\"10\">fitted slope " << num(s.fit->slope)
      << "</text>\n";
  }
  o << "</g>\n";
}

}  // namespace

std::string svg_string(const PlotSeries& primal, const PlotSeries& dual,
                       const std::string& title) {
  std::ostringstream o;
  const double w = 2 * kPanelW, h = kPanelH + (title.empty() ? 0 : 20);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\""
    << num(h) << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  if (!title.empty()) {
    o << "<text x=\"" << num(w / 2) << "\" y=\"14\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(title) << "</text>\n";
    o << "<g transform=\"translate(0 20)\">\n";
  }
  panel(o, 0, primal, "primal", "|gamma(t) - gamma*|");
  panel(o, kPanelW, dual, "dual", "|xi(t) - xi*|");
  if (!title.empty()) o << "</g>\n";
  o << "</svg>\n";
  return o.str();
}

std::string svg_string(const std::vector<TrajectoryPoint>& points,
                       const std::optional<RateFit>& primal_fit,
                       const std::optional<RateFit>& dual_fit, const std::string& title) {
  PlotSeries p, d;
  p.fit = primal_fit;
  d.fit = dual_fit;
  for (const TrajectoryPoint& pt : points) {
    if (pt.flags & kFlagNonConverged) continue;
    p.t.push_back(pt.t);
    p.err.push_back(pt.primal_err);
    d.t.push_back(pt.t);
    d.err.push_back(pt.dual_err);
  }
  return svg_string(p, d, title);
}

void emit_svg(const std::vector<TrajectoryPoint>& points,
              const std::optional<RateFit>& primal_fit,
              const std::optional<RateFit>& dual_fit, const std::string& path,
              const std::string& title) {
  if (points.empty()) throw_invalid("emit_svg: empty series");
  write_file(path, svg_string(points, primal_fit, dual_fit, title));
}

}  // namespace uotlab
