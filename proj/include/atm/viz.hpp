#pragma once

#include <map>
#include <set>
#include <string>

#include "atm/eval.hpp"
#include "atm/interpret.hpp"

namespace atm {

/// genre -> "#rrggbb". std::map keeps the lexicographic draw order stable.
struct Palette {
  std::map<std::string, std::string> colors;
};

/// The ten GTZAN genres on a colorblind-safe palette.
Palette default_palette();

/// Default colors for known GTZAN genres, deterministic distinct colors for
/// anything else.
Palette palette_for(const std::set<std::string>& genres);

/// Proportions below this are left out of doughnut charts.
inline constexpr double kMinDoughnutShare = 0.001;

std::string doughnut_svg(const GenreDistribution& distribution, const Palette& palette, int size_px,
                         const std::string& title = {});

/// Stacked-area chart of a genre timeline; time on x, proportion on y.
std::string timeline_svg(const GenreTimeline& timeline, const Palette& palette, int width_px,
                         int height_px, const std::string& title = {});

struct Report {
  int bucket_id = 0;
  std::map<std::string, GenreDistribution> topics;
  std::map<std::string, GenreDistribution> documents;
  std::map<std::string, GenreDistribution> terms;
  AccuracyTable accuracy_table;
};

inline constexpr int kReportSchemaVersion = 1;

/// Sorted keys, numbers rounded to 12 significant digits.
std::string export_report_json(const Report& report);
Report parse_report_json(const std::string& text);

}  // namespace atm
