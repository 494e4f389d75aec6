/*
 * Copyright 2026 The Cloudcast Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cloudcast/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "cloudcast/csv.hpp"
#include "cloudcast/errors.hpp"

namespace cloudcast::eval {

namespace {

using nlohmann::json;

struct GroupKey {
  std::string scenario, model, mode;
  auto operator<=>(const GroupKey&) const = default;
};

struct Accum {
  double sum = 0.0;
  std::int64_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
};

struct CurveAccum {
  std::vector<double> levels;
  std::vector<Accum> ys;  // e.g. TPR per level
  std::vector<Accum> xs;  // e.g. SR per level

  void add(const std::vector<double>& lv, const std::vector<double>& x,
           const std::vector<double>& y) {
    if (levels.empty()) {
      levels = lv;
      xs.resize(lv.size());
      ys.resize(lv.size());
    }
    if (lv != levels) return;  // incompatible grids are skipped
    for (std::size_t i = 0; i < lv.size(); ++i) {
      xs[i].add(x[i]);
      ys[i].add(y[i]);
    }
  }
};

std::string fmt(double v) { return csv::format_double(v); }

}  // namespace

ReportOutcome aggregate_report(
    const std::vector<std::filesystem::path>& metric_files,
    const std::filesystem::path& out_dir, const ReportOptions& options) {
  ReportOutcome outcome;
  std::vector<json> metrics;
  std::set<std::string> hashes;
  for (const auto& path : metric_files) {
    std::ifstream in(path);
    if (!in) {
      outcome.warnings.push_back("missing metric file: " + path.string());
      continue;
    }
    try {
      json j;
      in >> j;
      if (j.contains("config_hash")) {
        hashes.insert(j.at("config_hash").get<std::string>());
      }
      metrics.push_back(std::move(j));
    } catch (const std::exception& e) {
      outcome.warnings.push_back("unreadable metric file " + path.string() +
                                 ": " + e.what());
    }
  }
  if (metrics.empty()) {
    std::string msg = "no metric inputs available";
    for (const auto& w : outcome.warnings) msg += "\n  " + w;
    throw ArtifactError(msg);
  }
  if (hashes.size() > 1 && !options.allow_mixed_hashes) {
    throw ArtifactError(
        "metric files were produced by different configs; "
        "pass --force to aggregate anyway");
  }

  std::filesystem::create_directories(out_dir);

  // ------- per-group accumulation
  std::map<GroupKey, std::map<std::string, std::pair<Accum, Accum>>> point;
  std::map<GroupKey, std::map<std::string, std::map<std::string,
      std::array<Accum, 4>>>> qos;  // [conf][res] -> sr, op, up, tpr
  std::map<GroupKey, std::map<std::string, std::pair<Accum, Accum>>> calib;
  std::map<GroupKey, std::map<std::string, CurveAccum>> tpr_sr;
  std::map<GroupKey, std::map<std::string, CurveAccum>> calib_curves;

  for (const auto& m : metrics) {
    GroupKey key{m.value("scenario", "-"), m.value("model", "-"),
                 m.value("mode", "-")};
    if (m.contains("point")) {
      for (const auto& [res, v] : m.at("point").items()) {
        point[key][res].first.add(v.at("mse").get<double>());
        point[key][res].second.add(v.at("mae").get<double>());
      }
    }
    if (m.contains("qos")) {
      for (const auto& [conf, per_res] : m.at("qos").items()) {
        for (const auto& [res, v] : per_res.items()) {
          auto& cells = qos[key][conf][res];
          cells[0].add(v.at("sr").get<double>());
          cells[1].add(v.at("op").get<double>());
          cells[2].add(v.at("up").get<double>());
          cells[3].add(v.at("tpr").get<double>());
        }
      }
    }
    if (m.contains("calibration")) {
      for (const auto& [res, v] : m.at("calibration").items()) {
        calib[key][res].first.add(v.at("curve_mse").get<double>());
        calib[key][res].second.add(v.at("curve_mae").get<double>());
        calib_curves[key][res].add(
            v.at("levels").get<std::vector<double>>(),
            v.at("levels").get<std::vector<double>>(),
            v.at("achieved_sr").get<std::vector<double>>());
      }
    }
    if (m.contains("tpr_sr")) {
      for (const auto& [res, v] : m.at("tpr_sr").items()) {
        tpr_sr[key][res].add(v.at("levels").get<std::vector<double>>(),
                             v.at("sr").get<std::vector<double>>(),
                             v.at("tpr").get<std::vector<double>>());
      }
    }
  }

  // ------- summary_point.csv (best model flagged per scenario/mode/resource)
  {
    std::map<std::tuple<std::string, std::string, std::string>,
             std::pair<double, std::string>> best;
    for (const auto& [key, per_res] : point) {
      for (const auto& [res, acc] : per_res) {
        const auto group = std::make_tuple(key.scenario, key.mode, res);
        const double mse = acc.first.mean();
        const auto it = best.find(group);
        if (it == best.end() || mse < it->second.first) {
          best[group] = {mse, key.model};
        }
      }
    }
    const auto path = out_dir / "summary_point.csv";
    std::ofstream out(path);
    out << "scenario,model,mode,resource,mse,mae,cells,best\n";
    for (const auto& [key, per_res] : point) {
      for (const auto& [res, acc] : per_res) {
        const auto group = std::make_tuple(key.scenario, key.mode, res);
        out << key.scenario << ',' << key.model << ',' << key.mode << ','
            << res << ',' << fmt(acc.first.mean()) << ','
            << fmt(acc.second.mean()) << ',' << acc.first.n << ','
            << (best[group].second == key.model ? 1 : 0) << '\n';
      }
    }
    outcome.written.push_back(path);
  }

  // ------- summary_qos.csv
  {
    const auto path = out_dir / "summary_qos.csv";
    std::ofstream out(path);
    out << "scenario,model,mode,resource,confidence,sr,op,up,tpr,cells\n";
    for (const auto& [key, per_conf] : qos) {
      for (const auto& [conf, per_res] : per_conf) {
        for (const auto& [res, cells] : per_res) {
          out << key.scenario << ',' << key.model << ',' << key.mode << ','
              << res << ',' << conf << ',' << fmt(cells[0].mean()) << ','
              << fmt(cells[1].mean()) << ',' << fmt(cells[2].mean()) << ','
              << fmt(cells[3].mean()) << ',' << cells[0].n << '\n';
        }
      }
    }
    outcome.written.push_back(path);
  }

  // ------- summary_calibration.csv
  {
    std::map<std::tuple<std::string, std::string, std::string>,
             std::pair<double, std::string>> best;
    for (const auto& [key, per_res] : calib) {
      for (const auto& [res, acc] : per_res) {
        const auto group = std::make_tuple(key.scenario, key.mode, res);
        const double mse = acc.first.mean();
        const auto it = best.find(group);
        if (it == best.end() || mse < it->second.first) {
          best[group] = {mse, key.model};
        }
      }
    }
    const auto path = out_dir / "summary_calibration.csv";
    std::ofstream out(path);
    out << "scenario,model,mode,resource,curve_mse,curve_mae,cells,best\n";
    for (const auto& [key, per_res] : calib) {
      for (const auto& [res, acc] : per_res) {
        const auto group = std::make_tuple(key.scenario, key.mode, res);
        out << key.scenario << ',' << key.model << ',' << key.mode << ','
            << res << ',' << fmt(acc.first.mean()) << ','
            << fmt(acc.second.mean()) << ',' << acc.first.n << ','
            << (best[group].second == key.model ? 1 : 0) << '\n';
      }
    }
    outcome.written.push_back(path);
  }

  // ------- summary.txt
  {
    const auto path = out_dir / "summary.txt";
    std::ofstream out(path);
    out << "point metrics (mean over clusters/seeds)\n";
    for (const auto& [key, per_res] : point) {
      for (const auto& [res, acc] : per_res) {
        out << "  " << key.scenario << " " << key.model << " " << key.mode
            << " " << res << "  mse=" << acc.first.mean()
            << " mae=" << acc.second.mean() << " (" << acc.first.n
            << " cells)\n";
      }
    }
    out << "calibration curve error vs y=x (percentage points)\n";
    for (const auto& [key, per_res] : calib) {
      for (const auto& [res, acc] : per_res) {
        out << "  " << key.scenario << " " << key.model << " " << key.mode
            << " " << res << "  mse=" << acc.first.mean()
            << " mae=" << acc.second.mean() << '\n';
      }
    }
    outcome.written.push_back(path);
  }

  // ------- plots: group curves per (scenario, mode, resource), one series
  // per model
  {
    std::map<std::tuple<std::string, std::string, std::string>,
             std::vector<ChartSeries>> tpr_plots;
    for (const auto& [key, per_res] : tpr_sr) {
      for (const auto& [res, curve] : per_res) {
        ChartSeries s;
        s.name = key.model;
        for (std::size_t i = 0; i < curve.levels.size(); ++i) {
          s.x.push_back(curve.xs[i].mean());  // SR
          s.y.push_back(curve.ys[i].mean());  // TPR
        }
        tpr_plots[{key.scenario, key.mode, res}].push_back(std::move(s));
      }
    }
    for (const auto& [group, series] : tpr_plots) {
      const auto& [scenario, mode, res] = group;
      std::string mode_tag = mode;
      std::replace(mode_tag.begin(), mode_tag.end(), ':', '_');
      const auto path = out_dir / ("tpr_sr_" + scenario + "_" + mode_tag +
                                   "_" + res + ".svg");
      write_line_chart_svg(path, "Total predicted vs success rate (" + res + ")",
                           "SR [%]", "TPR", series);
      outcome.written.push_back(path);
    }

    std::map<std::tuple<std::string, std::string, std::string>,
             std::vector<ChartSeries>> calib_plots;
    for (const auto& [key, per_res] : calib_curves) {
      for (const auto& [res, curve] : per_res) {
        ChartSeries s;
        s.name = key.model;
        for (std::size_t i = 0; i < curve.levels.size(); ++i) {
          s.x.push_back(curve.levels[i]);
          s.y.push_back(curve.ys[i].mean());  // achieved SR
        }
        calib_plots[{key.scenario, key.mode, res}].push_back(std::move(s));
      }
    }
    for (auto& [group, series] : calib_plots) {
      const auto& [scenario, mode, res] = group;
      if (!series.empty()) {
        ChartSeries diag;
        diag.name = "ideal";
        diag.x = series.front().x;
        diag.y = series.front().x;
        series.push_back(std::move(diag));
      }
      std::string mode_tag = mode;
      std::replace(mode_tag.begin(), mode_tag.end(), ':', '_');
      const auto path = out_dir / ("calibration_" + scenario + "_" + mode_tag +
                                   "_" + res + ".svg");
      write_line_chart_svg(path, "Calibration (" + res + ")",
                           "target confidence [%]", "achieved SR [%]", series);
      outcome.written.push_back(path);
    }
  }

  return outcome;
}

void write_line_chart_svg(const std::filesystem::path& path,
                          const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<ChartSeries>& series) {
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double width = 640, height = 420;
  const double ml = 70, mr = 20, mt = 40, mb = 50;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (const double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;

  auto sx = [&](double v) {
    return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto sy = [&](double v) {
    return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  // axes
  svg << "<line x1='" << ml << "' y1='" << height - mb << "' x2='"
      << width - mr << "' y2='" << height - mb
      << "' stroke='black' stroke-width='1'/>\n";
  svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
      << height - mb << "' stroke='black' stroke-width='1'/>\n";
  svg << "<text x='" << width / 2 << "' y='" << height - 12
      << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
      << x_label << "</text>\n";
  svg << "<text x='16' y='" << height / 2
      << "' text-anchor='middle' font-family='sans-serif' font-size='12' "
      << "transform='rotate(-90 16 " << height / 2 << ")'>" << y_label
      << "</text>\n";
  // tick labels at the extremes
  svg << "<text x='" << ml << "' y='" << height - mb + 16
      << "' font-family='sans-serif' font-size='10'>" << xmin << "</text>\n";
  svg << "<text x='" << width - mr << "' y='" << height - mb + 16
      << "' text-anchor='end' font-family='sans-serif' font-size='10'>" << xmax
      << "</text>\n";
  svg << "<text x='" << ml - 6 << "' y='" << height - mb
      << "' text-anchor='end' font-family='sans-serif' font-size='10'>" << ymin
      << "</text>\n";
  svg << "<text x='" << ml - 6 << "' y='" << mt + 4
      << "' text-anchor='end' font-family='sans-serif' font-size='10'>" << ymax
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof(kColors) / sizeof(kColors[0]))];
    svg << "<polyline fill='none' stroke='" << color
        << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      svg << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    }
    svg << "'/>\n";
    const double ly = mt + 14 * static_cast<double>(k);
    svg << "<rect x='" << width - mr - 120 << "' y='" << ly - 8
        << "' width='10' height='3' fill='" << color << "'/>\n";
    svg << "<text x='" << width - mr - 105 << "' y='" << ly
        << "' font-family='sans-serif' font-size='11'>" << s.name
        << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write chart: " + path.string());
  out << svg.str();
}

}  // namespace cloudcast::eval
