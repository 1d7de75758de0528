#include "modeloc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "modeloc/errors.hpp"
#include "modeloc/signal.hpp"

namespace modeloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse, source + ":" + std::to_string(line) + ": " + what);
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  return out;
}

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::parse, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("field '") + key + "': " + e.what());
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ChannelSet parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::size_t header_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = split(line);
    header_line = line_no;
    break;
  }
  if (header.empty()) parse_fail(source, line_no, "missing header row");
  if (header.front() != "t") parse_fail(source, header_line, "missing time column 't'");
  if (header.size() < 2) parse_fail(source, header_line, "no channel columns");
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) parse_fail(source, header_line, "empty channel name");
    if (!seen.insert(header[c]).second) {
      parse_fail(source, header_line, "duplicate channel '" + header[c] + "'");
    }
  }

  const std::size_t n_ch = header.size() - 1;
  std::vector<double> times;
  std::vector<std::size_t> lines;
  std::vector<std::vector<std::optional<double>>> cols(n_ch);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      parse_fail(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                      std::to_string(fields.size()));
    }
    double time = 0.0;
    if (!parse_double(fields[0], time) || !std::isfinite(time)) {
      parse_fail(source, line_no, "invalid time value '" + fields[0] + "'");
    }
    if (!times.empty() && !(time > times.back())) parse_fail(source, line_no, "non-monotonic time");
    times.push_back(time);
    lines.push_back(line_no);
    for (std::size_t c = 0; c < n_ch; ++c) {
      const std::string& cell = fields[c + 1];
      if (cell.empty()) {
        cols[c].push_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      if (!parse_double(cell, v)) {
        parse_fail(source, line_no, "invalid number '" + cell + "' in column '" + header[c + 1] + "'");
      }
      if (!std::isfinite(v)) {
        parse_fail(source, line_no, "non-finite value in column '" + header[c + 1] + "'");
      }
      cols[c].push_back(v);
    }
  }
  if (times.size() < 2) parse_fail(source, line_no, "need at least two data rows");

  // Sample interval from a least-squares line through the timestamps, which
  // averages out the rounding of large epoch times.
  const double n_t = static_cast<double>(times.size());
  const double k_mean = (n_t - 1.0) / 2.0;
  double sxx = 0.0;
  double sxy = 0.0;
  double u_mean = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) u_mean += times[k] - times.front();
  u_mean /= n_t;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double dk = static_cast<double>(k) - k_mean;
    sxx += dk * dk;
    sxy += dk * (times[k] - times.front() - u_mean);
  }
  const double dt = sxy / sxx;
  const double offset = u_mean - dt * k_mean;
  // Epoch timestamps cannot resolve 1e-6 of a short interval, so the
  // tolerance never drops below a few ulps of the largest time value.
  const double t_max = std::max(std::abs(times.front()), std::abs(times.back()));
  const double tolerance =
      std::max(1e-6 * dt, 4.0 * t_max * std::numeric_limits<double>::epsilon());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double expected = offset + static_cast<double>(k) * dt;
    if (std::abs(times[k] - times.front() - expected) > tolerance) {
      parse_fail(source, lines[k], "sampling jitter exceeds 1e-6 of the sample interval");
    }
  }

  ChannelSet out;
  for (std::size_t c = 0; c < n_ch; ++c) {
    const auto& col = cols[c];
    std::size_t first = 0;
    while (first < col.size() && !col[first]) ++first;
    std::size_t last = col.size();
    while (last > first && !col[last - 1]) --last;
    if (last - first < 2) {
      parse_fail(source, header_line, "column '" + header[c + 1] + "' has fewer than two values");
    }
    ChannelSeries ch;
    ch.channel_id = header[c + 1];
    ch.sample_rate = 1.0 / dt;
    ch.start_time = times[first];
    for (std::size_t k = first; k < last; ++k) {
      if (!col[k]) parse_fail(source, lines[k], "empty cell inside column '" + ch.channel_id + "'");
      ch.samples.push_back(*col[k]);
    }
    out.push_back(std::move(ch));
  }
  return out;
}

ChannelSet load_csv(const fs::path& path) {
  auto in = open_in(path);
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const ChannelSet& channels) {
  check_consistent(channels);
  out << "t";
  for (const auto& ch : channels) out << ',' << ch.channel_id;
  out << '\n';
  const auto& first = channels.front();
  for (std::size_t k = 0; k < first.size(); ++k) {
    out << format_double(first.start_time + static_cast<double>(k) / first.sample_rate);
    for (const auto& ch : channels) out << ',' << format_double(ch.samples[k]);
    out << '\n';
  }
}

void write_csv(const fs::path& path, const ChannelSet& channels) {
  auto out = open_out(path);
  write_csv(out, channels);
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

ChannelSet slice_window(const ChannelSet& channels, double t0, double t1) {
  if (!(t1 > t0)) throw Error(ErrorCode::invalid_input, "window end must follow its start");
  ChannelSet out;
  for (const auto& ch : channels) {
    const double k0 = std::max(0.0, std::ceil((t0 - ch.start_time) * ch.sample_rate - 1e-6));
    const double k1 = std::min(static_cast<double>(ch.size()),
                               std::ceil((t1 - ch.start_time) * ch.sample_rate - 1e-6));
    ChannelSeries s;
    s.channel_id = ch.channel_id;
    s.sample_rate = ch.sample_rate;
    s.start_time = ch.start_time + k0 / ch.sample_rate;
    if (k1 > k0) {
      s.samples.assign(ch.samples.begin() + static_cast<std::ptrdiff_t>(k0),
                       ch.samples.begin() + static_cast<std::ptrdiff_t>(k1));
    }
    if (s.samples.size() < 2) {
      throw Error(ErrorCode::insufficient_data, "window " + format_double(t0) + ":" +
                                                    format_double(t1) + " holds fewer than two samples of '" +
                                                    ch.channel_id + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

ChannelSet trim_to_common(const ChannelSet& channels) {
  if (channels.empty()) throw Error(ErrorCode::invalid_input, "no channels supplied");
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (const auto& ch : channels) {
    t0 = std::max(t0, ch.start_time);
    t1 = std::min(t1, ch.start_time + static_cast<double>(ch.size()) / ch.sample_rate);
  }
  if (!(t1 > t0)) throw Error(ErrorCode::insufficient_data, "channels share no common time range");
  ChannelSet out = slice_window(channels, t0, t1);
  std::size_t n = out.front().size();
  for (const auto& ch : out) n = std::min(n, ch.size());
  for (auto& ch : out) ch.samples.resize(n);
  return out;
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  double lo = 0.0;
  double hi = 0.0;
  if (colon == std::string::npos || !parse_double(trim(text.substr(0, colon)), lo) ||
      !parse_double(trim(text.substr(colon + 1)), hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::invalid_input, "expected a range 'lo:hi', got '" + text + "'");
  }
  if (!(hi > lo)) throw Error(ErrorCode::invalid_input, "range '" + text + "' is empty");
  return {lo, hi};
}

GeoMap load_geo(const fs::path& path) {
  auto in = open_in(path);
  const std::string source = path.string();
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  GeoMap out;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(line);
    if (!have_header) {
      if (f.size() != 3 || f[0] != "channel" || f[1] != "lat" || f[2] != "lon") {
        parse_fail(source, line_no, "geo header must be 'channel,lat,lon'");
      }
      have_header = true;
      continue;
    }
    if (f.size() != 3) parse_fail(source, line_no, "expected 3 fields");
    GeoPoint p;
    if (!parse_double(f[1], p.latitude) || !parse_double(f[2], p.longitude)) {
      parse_fail(source, line_no, "invalid coordinate");
    }
    try {
      p.validate();
    } catch (const Error& e) {
      parse_fail(source, line_no, e.what());
    }
    if (!out.emplace(f[0], p).second) parse_fail(source, line_no, "duplicate channel '" + f[0] + "'");
  }
  if (!have_header) parse_fail(source, line_no, "missing header row");
  return out;
}

json shape_to_json(const ModeShape& shape) {
  const double peak = shape.max_magnitude();
  json entries = json::array();
  for (const auto& [id, p] : shape.entries) {
    entries.push_back({{"channel", id},
                       {"magnitude", p.magnitude},
                       {"normalized_magnitude", peak > 0.0 ? p.magnitude / peak : 0.0},
                       {"angle_deg", p.angle_deg}});
  }
  return {{"frequency", shape.frequency}, {"reference", shape.reference}, {"entries", entries}};
}

ModeShape shape_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "mode shape must be an object");
  ModeShape s;
  s.frequency = get_field<double>(j, "frequency");
  s.reference = get_field<std::string>(j, "reference");
  const json entries = get_field<json>(j, "entries");
  if (!entries.is_array()) throw Error(ErrorCode::parse, "'entries' must be an array");
  for (const auto& e : entries) {
    ComplexPhasor p;
    p.magnitude = get_field<double>(e, "magnitude");
    p.angle_deg = get_field<double>(e, "angle_deg");
    const auto id = get_field<std::string>(e, "channel");
    if (!s.entries.emplace(id, p).second) {
      throw Error(ErrorCode::parse, "duplicate channel '" + id + "' in mode shape");
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::parse, std::string("invalid mode shape: ") + e.what());
  }
  return s;
}

json config_to_json(const PipelineConfig& c) {
  return {{"band", {{"lo", c.band.lo}, {"hi", c.band.hi}}},
          {"welch_segment_seconds", c.welch_segment_seconds},
          {"threshold_fraction", c.threshold_fraction},
          {"ratio_k", c.ratio_k},
          {"min_angle", c.min_angle},
          {"mode_tol", c.mode_tol},
          {"reference_channel", c.reference_channel ? json(*c.reference_channel) : json(nullptr)},
          {"weighted_alignment", c.weighted_alignment},
          {"ringdown_order", c.ringdown_order},
          {"ringdown_min_energy", c.ringdown_min_energy},
          {"min_prominence", c.min_prominence},
          {"remove_common_mode", c.remove_common_mode}};
}

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "config must be an object");
  static const std::set<std::string> known = {
      "band",       "welch_segment_seconds", "threshold_fraction", "ratio_k",
      "min_angle",  "mode_tol",              "reference_channel",  "weighted_alignment",
      "ringdown_order", "ringdown_min_energy", "min_prominence", "remove_common_mode"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::parse, "unknown config key '" + key + "'");
  }
  PipelineConfig c;
  if (j.contains("band")) {
    c.band.lo = get_field<double>(j["band"], "lo");
    c.band.hi = get_field<double>(j["band"], "hi");
  }
  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = get_field<double>(j, key);
  };
  num("welch_segment_seconds", c.welch_segment_seconds);
  num("threshold_fraction", c.threshold_fraction);
  num("ratio_k", c.ratio_k);
  num("min_angle", c.min_angle);
  num("mode_tol", c.mode_tol);
  num("min_prominence", c.min_prominence);
  num("ringdown_min_energy", c.ringdown_min_energy);
  if (j.contains("reference_channel") && !j["reference_channel"].is_null()) {
    c.reference_channel = get_field<std::string>(j, "reference_channel");
  }
  if (j.contains("weighted_alignment")) c.weighted_alignment = get_field<bool>(j, "weighted_alignment");
  if (j.contains("remove_common_mode")) c.remove_common_mode = get_field<bool>(j, "remove_common_mode");
  if (j.contains("ringdown_order")) c.ringdown_order = get_field<std::size_t>(j, "ringdown_order");
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::parse, std::string("invalid config: ") + e.what());
  }
  return c;
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

PipelineConfig load_config(const fs::path& path) { return config_from_json(read_json(path)); }

json report_to_json(const LocationReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_to_json(r.config);
  j["forcing_frequency"] = r.forcing_frequency;
  j["peak_prominence"] = r.peak_prominence;
  j["natural_frequency"] = r.natural_frequency;
  j["natural_damping"] = optional_number(r.natural_damping);
  j["natural_origin"] = r.natural_origin.empty() ? json(nullptr) : json(r.natural_origin);
  j["forced_shape"] = r.forced_shape.entries.empty() ? json(nullptr) : shape_to_json(r.forced_shape);
  j["natural_shape"] = r.natural_shape.entries.empty() ? json(nullptr) : shape_to_json(r.natural_shape);
  if (r.alignment.diffs.empty()) {
    j["alignment"] = nullptr;
  } else {
    json diffs = json::array();
    for (const auto& [id, d] : r.alignment.diffs) diffs.push_back({{"channel", id}, {"diff_deg", d}});
    j["alignment"] = {{"delta_deg", r.alignment.delta},
                      {"rms_deg", r.alignment.rms},
                      {"weighted", r.alignment.weighted},
                      {"channels_used", r.alignment.channels_used},
                      {"diffs", diffs}};
  }
  json ranking = json::array();
  for (const auto& e : r.ranking) ranking.push_back({{"channel", e.channel}, {"abs_diff_deg", e.abs_diff}});
  j["ranking"] = ranking;
  j["verdict"] = {{"kind", to_string(r.verdict.kind)}, {"channels", r.verdict.channels}};
  j["triangulated"] = r.triangulated ? json{{"latitude", r.triangulated->latitude},
                                            {"longitude", r.triangulated->longitude}}
                                     : json(nullptr);
  json diags = json::array();
  for (const auto& d : r.diagnostics) diags.push_back({{"stage", d.stage}, {"message", d.message}});
  j["diagnostics"] = diags;
  return j;
}

LocationReport report_from_json(const json& j) {
  const auto problems = validate_report_json(j);
  if (!problems.empty()) throw Error(ErrorCode::parse, "invalid report: " + problems.front());
  LocationReport r;
  r.config = config_from_json(j["config"]);
  r.forcing_frequency = j["forcing_frequency"].get<double>();
  r.peak_prominence = j["peak_prominence"].get<double>();
  r.natural_frequency = j["natural_frequency"].get<double>();
  if (!j["natural_damping"].is_null()) r.natural_damping = j["natural_damping"].get<double>();
  if (!j["natural_origin"].is_null()) r.natural_origin = j["natural_origin"].get<std::string>();
  if (!j["forced_shape"].is_null()) r.forced_shape = shape_from_json(j["forced_shape"]);
  if (!j["natural_shape"].is_null()) r.natural_shape = shape_from_json(j["natural_shape"]);
  if (!j["alignment"].is_null()) {
    const auto& a = j["alignment"];
    r.alignment.delta = a["delta_deg"].get<double>();
    r.alignment.rms = a["rms_deg"].get<double>();
    r.alignment.weighted = a["weighted"].get<bool>();
    for (const auto& id : a["channels_used"]) r.alignment.channels_used.insert(id.get<std::string>());
    for (const auto& d : a["diffs"]) {
      r.alignment.diffs[d["channel"].get<std::string>()] = d["diff_deg"].get<double>();
    }
  }
  for (const auto& e : j["ranking"]) {
    r.ranking.push_back({e["channel"].get<std::string>(), e["abs_diff_deg"].get<double>()});
  }
  const auto kind = j["verdict"]["kind"].get<std::string>();
  for (auto k : {VerdictKind::single_source, VerdictKind::ambiguous, VerdictKind::no_source}) {
    if (kind == to_string(k)) r.verdict.kind = k;
  }
  r.verdict.channels = j["verdict"]["channels"].get<std::vector<std::string>>();
  if (!j["triangulated"].is_null()) {
    r.triangulated = GeoPoint{j["triangulated"]["latitude"].get<double>(),
                              j["triangulated"]["longitude"].get<double>()};
  }
  for (const auto& d : j["diagnostics"]) {
    r.diagnostics.push_back({d["stage"].get<std::string>(), d["message"].get<std::string>()});
  }
  return r;
}

void write_report(const LocationReport& report, const fs::path& path) {
  auto out = open_out(path);
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

LocationReport load_report(const fs::path& path) { return report_from_json(read_json(path)); }

namespace {

class Checker {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& where, const std::string& what) { problems.push_back(where + ": " + what); }

  bool object(const json& j, const std::string& where, std::initializer_list<const char*> required) {
    if (!j.is_object()) {
      fail(where, "expected object");
      return false;
    }
    bool ok = true;
    for (const char* key : required) {
      if (!j.contains(key)) {
        fail(where, std::string("missing '") + key + "'");
        ok = false;
      }
    }
    return ok;
  }

  void number(const json& j, const std::string& where, bool nullable = false) {
    if (nullable && j.is_null()) return;
    if (!j.is_number()) fail(where, "expected number");
  }

  void string(const json& j, const std::string& where, bool nullable = false) {
    if (nullable && j.is_null()) return;
    if (!j.is_string()) fail(where, "expected string");
  }

  void boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, "expected boolean");
  }

  void string_array(const json& j, const std::string& where) {
    if (!j.is_array()) return fail(where, "expected array");
    for (const auto& e : j) string(e, where + "[]");
  }

  void shape(const json& j, const std::string& where) {
    if (j.is_null()) return;
    if (!object(j, where, {"frequency", "reference", "entries"})) return;
    number(j["frequency"], where + ".frequency");
    string(j["reference"], where + ".reference");
    if (!j["entries"].is_array()) return fail(where + ".entries", "expected array");
    for (const auto& e : j["entries"]) {
      const std::string w = where + ".entries[]";
      if (!object(e, w, {"channel", "magnitude", "normalized_magnitude", "angle_deg"})) continue;
      string(e["channel"], w + ".channel");
      number(e["magnitude"], w + ".magnitude");
      number(e["normalized_magnitude"], w + ".normalized_magnitude");
      number(e["angle_deg"], w + ".angle_deg");
      if (e["magnitude"].is_number() && e["magnitude"].get<double>() < 0.0) fail(w, "negative magnitude");
      if (e["angle_deg"].is_number()) {
        const double a = e["angle_deg"].get<double>();
        if (!(a > -180.0 && a <= 180.0)) fail(w, "angle not wrapped to (-180, 180]");
      }
    }
  }
};

}  // namespace

std::vector<std::string> validate_report_json(const json& j) {
  Checker c;
  if (!c.object(j, "report",
                {"schema_version", "config", "forcing_frequency", "peak_prominence",
                 "natural_frequency", "natural_damping", "natural_origin", "forced_shape",
                 "natural_shape", "alignment", "ranking", "verdict", "triangulated", "diagnostics"})) {
    return c.problems;
  }
  if (j["schema_version"] != kReportSchemaVersion) c.fail("schema_version", "expected \"v1\"");
  try {
    config_from_json(j["config"]);
  } catch (const Error& e) {
    c.fail("config", e.what());
  }
  c.number(j["forcing_frequency"], "forcing_frequency");
  c.number(j["peak_prominence"], "peak_prominence");
  c.number(j["natural_frequency"], "natural_frequency");
  c.number(j["natural_damping"], "natural_damping", true);
  if (!j["natural_origin"].is_null() && j["natural_origin"] != "ringdown" &&
      j["natural_origin"] != "baseline") {
    c.fail("natural_origin", "expected \"ringdown\", \"baseline\" or null");
  }
  c.shape(j["forced_shape"], "forced_shape");
  c.shape(j["natural_shape"], "natural_shape");
  const auto& a = j["alignment"];
  if (!a.is_null() && c.object(a, "alignment", {"delta_deg", "rms_deg", "weighted", "channels_used", "diffs"})) {
    c.number(a["delta_deg"], "alignment.delta_deg");
    c.number(a["rms_deg"], "alignment.rms_deg");
    c.boolean(a["weighted"], "alignment.weighted");
    c.string_array(a["channels_used"], "alignment.channels_used");
    if (!a["diffs"].is_array()) {
      c.fail("alignment.diffs", "expected array");
    } else {
      for (const auto& d : a["diffs"]) {
        if (!c.object(d, "alignment.diffs[]", {"channel", "diff_deg"})) continue;
        c.string(d["channel"], "alignment.diffs[].channel");
        c.number(d["diff_deg"], "alignment.diffs[].diff_deg");
      }
    }
  }
  if (!j["ranking"].is_array()) {
    c.fail("ranking", "expected array");
  } else {
    for (const auto& e : j["ranking"]) {
      if (!c.object(e, "ranking[]", {"channel", "abs_diff_deg"})) continue;
      c.string(e["channel"], "ranking[].channel");
      c.number(e["abs_diff_deg"], "ranking[].abs_diff_deg");
    }
  }
  const auto& v = j["verdict"];
  if (c.object(v, "verdict", {"kind", "channels"})) {
    if (v["kind"] != "SingleSource" && v["kind"] != "Ambiguous" && v["kind"] != "NoSource") {
      c.fail("verdict.kind", "unknown verdict kind");
    }
    c.string_array(v["channels"], "verdict.channels");
  }
  const auto& t = j["triangulated"];
  if (!t.is_null() && c.object(t, "triangulated", {"latitude", "longitude"})) {
    c.number(t["latitude"], "triangulated.latitude");
    c.number(t["longitude"], "triangulated.longitude");
  }
  if (!j["diagnostics"].is_array()) {
    c.fail("diagnostics", "expected array");
  } else {
    for (const auto& d : j["diagnostics"]) {
      if (!c.object(d, "diagnostics[]", {"stage", "message"})) continue;
      c.string(d["stage"], "diagnostics[].stage");
      c.string(d["message"], "diagnostics[].message");
    }
  }
  return c.problems;
}

ModeShape load_baseline(const fs::path& path) {
  const json j = read_json(path);
  try {
    if (j.is_object() && j.contains("schema_version")) {
      if (!j.contains("natural_shape") || j["natural_shape"].is_null()) {
        throw Error(ErrorCode::parse, "report carries no natural shape");
      }
      return shape_from_json(j["natural_shape"]);
    }
    return shape_from_json(j);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_shape(const ModeShape& shape, const fs::path& path) {
  auto out = open_out(path);
  out << shape_to_json(shape).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

}  // namespace modeloc
