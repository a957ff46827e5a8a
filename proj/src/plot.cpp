#include "coldpref/plot.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "coldpref/csv.hpp"
#include "coldpref/errors.hpp"

namespace coldpref {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 190.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string num(double value) { return csv::format_fixed(value, 2); }

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string legend_name(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::random_blank:
      return "random (blank)";
    case PolicyKind::warmstart_uncertainty:
      return "warm-start (uncertainty)";
    case PolicyKind::coldstart_pretrained:
      return "cold-start (pretrained)";
  }
  return "unknown";
}

}  // namespace

std::string policy_color(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::random_blank:
      return "green";
    case PolicyKind::warmstart_uncertainty:
      return "blue";
    case PolicyKind::coldstart_pretrained:
      return "orange";
  }
  return "black";
}

std::string render_learning_curves_svg(const std::vector<AggregateRow>& rows, std::optional<double> limit_f1,
                                       const std::string& title) {
  if (rows.empty()) throw InputError("nothing to plot");
  std::map<PolicyKind, std::vector<const AggregateRow*>> by_policy;
  std::size_t max_queries = 0;
  for (const auto& row : rows) {
    by_policy[row.policy].push_back(&row);
    max_queries = std::max(max_queries, row.queries);
  }
  for (auto& [policy, points] : by_policy) {
    std::sort(points.begin(), points.end(), [](auto* a, auto* b) { return a->queries < b->queries; });
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double x_max = static_cast<double>(std::max<std::size_t>(max_queries, 1));
  auto sx = [&](double q) { return kLeft + plot_w * q / x_max; };
  auto sy = [&](double f1) { return kTop + plot_h * (1.0 - std::clamp(f1, 0.0, 1.0)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight) << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";

  // Frame and ticks are paths so that <line> and <polyline> stay reserved for data.
  svg << "<path class=\"axes\" d=\"M" << num(kLeft) << ' ' << num(kTop) << " V" << num(kTop + plot_h) << " H"
      << num(kLeft + plot_w) << "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double f1 = 0.2 * i;
    const double y = sy(f1);
    svg << "<path class=\"tick\" d=\"M" << num(kLeft - 5) << ' ' << num(y) << " H" << num(kLeft + plot_w)
        << "\" stroke=\"#dddddd\" fill=\"none\"/>\n";
    svg << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
        << csv::format_fixed(f1, 1) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double q = x_max * i / 5.0;
    const double x = sx(q);
    svg << "<path class=\"tick\" d=\"M" << num(x) << ' ' << num(kTop + plot_h) << " V" << num(kTop + plot_h + 5)
        << "\" stroke=\"black\" fill=\"none\"/>\n";
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 20) << "\" text-anchor=\"middle\">"
        << csv::format_fixed(q, 0) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 15)
      << "\" text-anchor=\"middle\">oracle queries</text>\n";
  svg << "<text x=\"18\" y=\"" << num(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num(kTop + plot_h / 2) << ")\">F1</text>\n";

  double legend_y = kTop + 10;
  for (const auto& [policy, points] : by_policy) {
    const std::string color = policy_color(policy);
    const bool band = std::any_of(points.begin(), points.end(), [](auto* p) { return p->n_runs > 1; });
    if (band) {
      svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (auto* p : points) svg << num(sx(static_cast<double>(p->queries))) << ',' << num(sy(p->f1_mean + p->f1_std)) << ' ';
      for (auto it = points.rbegin(); it != points.rend(); ++it) {
        svg << num(sx(static_cast<double>((*it)->queries))) << ',' << num(sy((*it)->f1_mean - (*it)->f1_std)) << ' ';
      }
      svg << "\"/>\n";
    }
    svg << "<polyline class=\"curve\" data-policy=\"" << to_string(policy) << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i > 0) svg << ' ';
      svg << num(sx(static_cast<double>(points[i]->queries))) << ',' << num(sy(points[i]->f1_mean));
    }
    svg << "\"/>\n";
    const double lx = kLeft + plot_w + 15;
    svg << "<rect x=\"" << num(lx) << "\" y=\"" << num(legend_y - 8) << "\" width=\"14\" height=\"4\" fill=\"" << color
        << "\"/>\n";
    svg << "<text x=\"" << num(lx + 20) << "\" y=\"" << num(legend_y) << "\">" << escape(legend_name(policy))
        << "</text>\n";
    legend_y += 20;
  }
  if (limit_f1) {
    const double y = sy(*limit_f1);
    svg << "<line class=\"limit\" x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + plot_w)
        << "\" y2=\"" << num(y) << "\" stroke=\"" << kLimitColor << "\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    const double lx = kLeft + plot_w + 15;
    svg << "<rect x=\"" << num(lx) << "\" y=\"" << num(legend_y - 8) << "\" width=\"14\" height=\"4\" fill=\""
        << kLimitColor << "\"/>\n";
    svg << "<text x=\"" << num(lx + 20) << "\" y=\"" << num(legend_y) << "\">practical limit ("
        << csv::format_fixed(*limit_f1, 3) << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace coldpref
