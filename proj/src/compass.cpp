#include "modeloc/compass.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "modeloc/angles.hpp"
#include "modeloc/errors.hpp"

namespace modeloc {

namespace {

constexpr double kSize = 480.0;
constexpr double kCenter = kSize / 2.0;
constexpr double kRadius = 200.0;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void arrow(std::ostringstream& os, const std::string& id, const char* kind, bool highlight,
           double length, double angle_deg) {
  const double a = deg_to_rad(angle_deg);
  const double x = kCenter + kRadius * length * std::cos(a);
  const double y = kCenter - kRadius * length * std::sin(a);
  os << "  <line class=\"arrow " << kind << (highlight ? " highlight" : "") << "\" data-channel=\""
     << escape(id) << "\" x1=\"" << kCenter << "\" y1=\"" << kCenter << "\" x2=\"" << x
     << "\" y2=\"" << y << "\" marker-end=\"url(#head-" << kind << ")\"/>\n";
}

}  // namespace

std::string compass_svg(const ModeShape& forced, const ModeShape& natural,
                        const AlignmentResult& alignment) {
  std::set<std::string> common;
  for (const auto& [id, p] : forced.entries) {
    if (natural.contains(id)) common.insert(id);
  }
  if (common.empty()) throw Error(ErrorCode::invalid_input, "shapes share no channels");

  const auto ranked = rank_differences(alignment);
  const std::string top = ranked.empty() ? std::string() : ranked.front().channel;
  const double f_max = forced.max_magnitude();
  const double n_max = natural.max_magnitude();

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
     << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n"
     << "  <defs>\n"
     << "    <marker id=\"head-forced\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" "
        "orient=\"auto\"><path d=\"M0,0 L8,4 L0,8 z\" fill=\"#c0392b\"/></marker>\n"
     << "    <marker id=\"head-natural\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" "
        "orient=\"auto\"><path d=\"M0,0 L8,4 L0,8 z\" fill=\"#2471a3\"/></marker>\n"
     << "  </defs>\n"
     << "  <style>.forced{stroke:#c0392b;stroke-width:2}.natural{stroke:#2471a3;stroke-width:2;"
        "stroke-dasharray:6 3}.highlight{stroke-width:5}.label{font:11px sans-serif}</style>\n"
     << "  <circle class=\"unit-circle\" cx=\"" << kCenter << "\" cy=\"" << kCenter << "\" r=\""
     << kRadius << "\" fill=\"none\" stroke=\"#999\"/>\n"
     << "  <text class=\"title\" x=\"8\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">"
     << "f = " << forced.frequency << " Hz, delta = " << alignment.delta
     << " deg, rms = " << alignment.rms << " deg</text>\n";

  for (const auto& id : common) {
    const auto& f = forced.at(id);
    const auto& n = natural.at(id);
    const bool hl = id == top;
    arrow(os, id, "forced", hl, f_max > 0.0 ? f.magnitude / f_max : 0.0,
          wrap_degrees(f.angle_deg + alignment.delta));
    arrow(os, id, "natural", hl, n_max > 0.0 ? n.magnitude / n_max : 0.0, n.angle_deg);
    const double a = deg_to_rad(n.angle_deg);
    os << "  <text class=\"label\" data-channel=\"" << escape(id) << "\" x=\""
       << kCenter + (kRadius + 14.0) * std::cos(a) << "\" y=\""
       << kCenter - (kRadius + 14.0) * std::sin(a) << "\" text-anchor=\"middle\">" << escape(id)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void render_compass(const ModeShape& forced, const ModeShape& natural,
                    const AlignmentResult& alignment, const std::filesystem::path& path) {
  const std::string svg = compass_svg(forced, natural, alignment);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << svg;
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

}  // namespace modeloc
