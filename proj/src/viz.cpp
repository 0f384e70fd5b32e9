#include "atm/viz.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "atm/error.hpp"
#include "atm/format.hpp"
#include "atm/serialize.hpp"

namespace atm {
namespace {

// Paul Tol's "muted" scheme plus pale grey.
constexpr const char* kColors[] = {"#CC6677", "#332288", "#DDCC77", "#117733", "#88CCEE",
                                   "#882255", "#44AA99", "#999933", "#AA4499", "#DDDDDD"};
constexpr const char* kGtzanGenres[] = {"blues", "classical", "country", "disco", "hiphop",
                                        "jazz",  "metal",     "pop",     "reggae", "rock"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fixed(v, 3); }

std::string hsl_hex(double hue_deg, double s, double l) {
  const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
  const double hp = std::fmod(hue_deg, 360.0) / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = l - c / 2.0;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", static_cast<int>(std::lround((r + m) * 255)),
                static_cast<int>(std::lround((g + m) * 255)), static_cast<int>(std::lround((b + m) * 255)));
  return buf;
}

const std::string& color_of(const Palette& palette, const std::string& genre) {
  const auto it = palette.colors.find(genre);
  if (it == palette.colors.end()) fail(ErrorCode::UnknownGenre, "no palette color for '" + genre + "'");
  return it->second;
}

std::string svg_open(int width, int height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + " " + std::to_string(height) + "\">\n" +
         "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#FFFFFF\"/>\n";
}

void legend(std::string& svg, const std::vector<std::pair<std::string, std::string>>& rows,
            const Palette& palette, double x, double y) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double ry = y + 20.0 * static_cast<double>(i);
    svg += "<rect x=\"" + num(x) + "\" y=\"" + num(ry) + "\" width=\"12\" height=\"12\" fill=\"" +
           color_of(palette, rows[i].first) + "\"/>\n";
    svg += "<text x=\"" + num(x + 18) + "\" y=\"" + num(ry + 10) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(rows[i].second) + "</text>\n";
  }
}

}  // namespace

Palette default_palette() {
  Palette p;
  for (std::size_t i = 0; i < std::size(kGtzanGenres); ++i) p.colors[kGtzanGenres[i]] = kColors[i];
  return p;
}

Palette palette_for(const std::set<std::string>& genres) {
  const Palette defaults = default_palette();
  Palette p;
  std::set<std::string> used;
  std::vector<std::string> unknown;
  for (const auto& g : genres) {
    const auto it = defaults.colors.find(g);
    if (it != defaults.colors.end()) {
      p.colors[g] = it->second;
      used.insert(it->second);
    } else {
      unknown.push_back(g);
    }
  }
  std::size_t next = 0;
  std::size_t generated = 0;
  for (const auto& g : unknown) {
    while (next < std::size(kColors) && used.count(kColors[next])) ++next;
    std::string color;
    if (next < std::size(kColors)) {
      color = kColors[next++];
    } else {
      // Golden-angle hue walk; skip anything that collides.
      do {
        color = hsl_hex(137.50776405 * static_cast<double>(generated++), 0.55, 0.55);
      } while (used.count(color));
    }
    used.insert(color);
    p.colors[g] = color;
  }
  return p;
}

std::string doughnut_svg(const GenreDistribution& distribution, const Palette& palette, int size_px,
                         const std::string& title) {
  if (size_px <= 0) fail(ErrorCode::InvalidArgument, "size_px must be positive");
  validate(distribution, 1e-6);
  std::vector<std::pair<std::string, double>> shares;
  double kept = 0.0;
  for (const auto& [genre, w] : distribution.weights) {
    color_of(palette, genre);
    if (w >= kMinDoughnutShare) {
      shares.emplace_back(genre, w);
      kept += w;
    }
  }
  for (auto& [_, w] : shares) w /= kept;

  const double size = size_px;
  const double cx = size / 2.0;
  const double cy = size / 2.0 + (title.empty() ? 0.0 : 24.0);
  const double outer = size * 0.42;
  const double inner = size * 0.25;
  const int legend_w = 200;
  const int height = static_cast<int>(std::max(cy + size / 2.0, 20.0 * shares.size() + 40.0));
  std::string svg = svg_open(size_px + legend_w, height);
  if (!title.empty()) {
    svg += "<text x=\"" + num(cx) + "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" + escape_xml(title) + "</text>\n";
  }

  const auto point = [&](double r, double deg) {
    const double rad = deg * std::numbers::pi / 180.0;
    return num(cx + r * std::sin(rad)) + "," + num(cy - r * std::cos(rad));
  };
  // Each arc here spans at most 180 degrees, so large-arc stays 0.
  const auto arc_to = [&](double r, double deg, bool clockwise) {
    return "A" + num(r) + "," + num(r) + " 0 0 " + (clockwise ? "1 " : "0 ") + point(r, deg);
  };

  double start = 0.0;
  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const auto& [genre, share] = shares[i];
    const double sweep = share * 360.0;
    const double end = i + 1 == shares.size() ? 360.0 : start + sweep;
    const double mid = start + (end - start) / 2.0;
    std::string d = "M" + point(outer, start) + " ";
    if (end - start > 180.0 - 1e-9) {
      d += arc_to(outer, mid, true) + " " + arc_to(outer, end, true) + " L" + point(inner, end) + " " +
           arc_to(inner, mid, false) + " " + arc_to(inner, start, false);
    } else {
      d += arc_to(outer, end, true) + " L" + point(inner, end) + " " + arc_to(inner, start, false);
    }
    d += " Z";
    svg += "<path data-genre=\"" + escape_xml(genre) + "\" data-sweep=\"" + fixed(sweep, 9) +
           "\" fill=\"" + color_of(palette, genre) + "\" stroke=\"#FFFFFF\" stroke-width=\"1\" d=\"" +
           d + "\"/>\n";
    rows.emplace_back(genre, genre + " " + fixed(share * 100.0, 1) + "%");
    start = end;
  }
  legend(svg, rows, palette, size + 10.0, cy - 10.0 * static_cast<double>(rows.size()));
  svg += "</svg>\n";
  return svg;
}

std::string timeline_svg(const GenreTimeline& timeline, const Palette& palette, int width_px,
                         int height_px, const std::string& title) {
  if (timeline.entries.size() < 2) {
    fail(ErrorCode::TimelineTooShort, std::to_string(timeline.entries.size()) + " entries; need 2");
  }
  if (width_px <= 0 || height_px <= 0) fail(ErrorCode::InvalidArgument, "chart size must be positive");
  std::set<std::string> labels;
  for (const auto& e : timeline.entries) {
    validate(e.distribution, 1e-6);
    for (const auto& [g, _] : e.distribution.weights) {
      color_of(palette, g);
      labels.insert(g);
    }
  }
  const double left = 56.0, right = 150.0, top = title.empty() ? 16.0 : 36.0, bottom = 48.0;
  const double pw = width_px - left - right;
  const double ph = height_px - top - bottom;
  if (pw <= 0 || ph <= 0) fail(ErrorCode::InvalidArgument, "chart too small for axes");
  const double t0 = timeline.entries.front().start_time;
  const double t1 = timeline.entries.back().start_time;
  if (!(t1 > t0)) fail(ErrorCode::InvalidArgument, "timeline start times must increase");
  const double base = top + ph;
  const auto x_of = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };

  // cumulative[i][j]: share of genres 0..j-1 at entry i, with the top edge
  // pinned to exactly 1.
  const std::vector<std::string> genres(labels.begin(), labels.end());
  const std::size_t n = timeline.entries.size();
  std::vector<std::vector<double>> cumulative(n, std::vector<double>(genres.size() + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& dist = timeline.entries[i].distribution;
    const double total = dist.total();
    double acc = 0.0;
    for (std::size_t j = 0; j < genres.size(); ++j) {
      acc += dist[genres[j]];
      cumulative[i][j + 1] = acc / total;
    }
    cumulative[i].back() = 1.0;
  }

  std::string svg = svg_open(width_px, height_px);
  if (!title.empty()) {
    svg += "<text x=\"" + num(left + pw / 2.0) + "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" + escape_xml(title) + "</text>\n";
  }
  for (std::size_t j = 0; j < genres.size(); ++j) {
    std::string pts;
    for (std::size_t i = 0; i < n; ++i) {
      pts += num(x_of(timeline.entries[i].start_time)) + "," + num(base - cumulative[i][j + 1] * ph) + " ";
    }
    for (std::size_t i = n; i-- > 0;) {
      pts += num(x_of(timeline.entries[i].start_time)) + "," + num(base - cumulative[i][j] * ph);
      if (i != 0) pts += " ";
    }
    svg += "<polygon data-genre=\"" + escape_xml(genres[j]) + "\" fill=\"" + color_of(palette, genres[j]) +
           "\" stroke=\"none\" points=\"" + pts + "\"/>\n";
  }

  // Axes.
  svg += "<g stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(base) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
         num(base) + "\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
         num(base) + "\"/>\n";
  svg += "</g>\n";
  const int x_ticks = 5;
  for (int i = 0; i <= x_ticks; ++i) {
    const double t = t0 + (t1 - t0) * i / x_ticks;
    const double x = x_of(t);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(base) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(base + 5) + "\" stroke=\"#000000\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(base + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fixed(t, 1) +
           "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double p = i / 4.0;
    const double y = base - p * ph;
    svg += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) + "\" y2=\"" +
           num(y) + "\" stroke=\"#000000\"/>\n";
    svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fixed(p, 2) +
           "</text>\n";
  }
  svg += "<text x=\"" + num(left + pw / 2.0) + "\" y=\"" + num(base + 38) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">time (s)</text>\n";
  svg += "<text x=\"14\" y=\"" + num(top + ph / 2.0) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 14 " + num(top + ph / 2.0) + ")\">genre proportion</text>\n";

  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& g : genres) rows.emplace_back(g, g);
  legend(svg, rows, palette, left + pw + 16.0, top);
  svg += "</svg>\n";
  return svg;
}

std::string export_report_json(const Report& report) {
  return report_to_json(report).dump(2) + "\n";
}

Report parse_report_json(const std::string& text) {
  return report_from_json(nlohmann::json::parse(text));
}

}  // namespace atm
