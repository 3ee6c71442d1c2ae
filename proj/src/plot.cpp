#include "signalopt/plot.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

namespace signalopt {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 86, kRight = 120, kTop = 44, kBottom = 54;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(std::string_view s) {
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

// for file names
std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

// viridis, five stops
std::string ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops = {{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1 : r < 3 ? 2 : r < 7 ? 5 : 10) * mag;
}

struct Axis {
  double lo, hi;
  double step;

  Axis(double min, double max) {
    if (!(max > min)) {
      const double pad = std::max(std::abs(min) * 0.01, 1.0);
      min -= pad;
      max += pad;
    }
    step = nice_step(max - min);
    lo = std::floor(min / step) * step;
    hi = std::ceil(max / step) * step;
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }
};

void header(std::ostringstream& os, double w, double h, const Provenance& p) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<!-- signalopt " << escape(p.version) << " config=" << escape(p.config_hash)
     << " seed=" << p.seed << " -->\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string scatter(const TraceData& trace, std::size_t gene, const std::string& title,
                    const Provenance& p) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& r : trace.rows) {
    xmin = std::min(xmin, r.genes[gene]);
    xmax = std::max(xmax, r.genes[gene]);
    ymin = std::min(ymin, r.fitness);
    ymax = std::max(ymax, r.fitness);
  }
  const Axis xa(xmin, xmax), ya(ymin, ymax);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + xa.frac(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ya.frac(v)) * ph; };
  const auto gens = trace.generation_count();
  auto colour = [&](std::size_t g) { return ramp(gens > 1 ? double(g) / double(gens - 1) : 0.0); };

  std::ostringstream os;
  header(os, kWidth, kHeight, p);
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";
  os << "<g stroke=\"#ddd\">\n";
  for (double v = xa.lo; v <= xa.hi + xa.step * 1e-9; v += xa.step)
    os << "<line x1=\"" << num(px(v)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(v))
       << "\" y2=\"" << num(kTop + ph) << "\"/>\n";
  for (double v = ya.lo; v <= ya.hi + ya.step * 1e-9; v += ya.step)
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(kLeft + pw)
       << "\" y2=\"" << num(py(v)) << "\"/>\n";
  os << "</g>\n<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  os << "<g font-size=\"11\">\n";
  for (double v = xa.lo; v <= xa.hi + xa.step * 1e-9; v += xa.step)
    os << "<text x=\"" << num(px(v)) << "\" y=\"" << num(kTop + ph + 16)
       << "\" text-anchor=\"middle\">" << label(std::abs(v) < xa.step * 1e-9 ? 0.0 : v)
       << "</text>\n";
  for (double v = ya.lo; v <= ya.hi + ya.step * 1e-9; v += ya.step)
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(v) + 4)
       << "\" text-anchor=\"end\">" << label(std::abs(v) < ya.step * 1e-9 ? 0.0 : v)
       << "</text>\n";
  os << "</g>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 14)
     << "\" text-anchor=\"middle\">phase duration (s)</text>\n";
  os << "<text transform=\"translate(18 " << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">fitness (-veh h)</text>\n";

  os << "<g fill-opacity=\"0.8\">\n";
  for (const auto& r : trace.rows)
    os << "<circle cx=\"" << num(px(r.genes[gene])) << "\" cy=\"" << num(py(r.fitness))
       << "\" r=\"3\" fill=\"" << colour(r.generation) << "\"/>\n";
  os << "</g>\n";

  // generation colour bar
  const double bx = kWidth - kRight + 30, bw = 14;
  const std::size_t steps = std::max<std::size_t>(gens, 1);
  for (std::size_t g = 0; g < steps; ++g) {
    const double y0 = kTop + ph * double(steps - 1 - g) / double(steps);
    os << "<rect x=\"" << num(bx) << "\" y=\"" << num(y0) << "\" width=\"" << num(bw)
       << "\" height=\"" << num(ph / double(steps) + 0.5) << "\" fill=\"" << colour(g)
       << "\"/>\n";
  }
  os << "<text x=\"" << num(bx + bw + 5) << "\" y=\"" << num(kTop + 10) << "\">" << gens - 1
     << "</text>\n<text x=\"" << num(bx + bw + 5) << "\" y=\"" << num(kTop + ph)
     << "\">0</text>\n<text x=\"" << num(bx - 4) << "\" y=\"" << num(kTop - 8)
     << "\">generation</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::vector<SvgFile> convergence_plots(const TraceData& trace, const Provenance& p) {
  if (trace.rows.empty()) throw InputError("no generations");
  if (trace.layout.empty())
    throw InputError("trace has no layout line; supply the network to label genes");
  std::size_t total = 0;
  for (const auto& s : trace.layout) total += s.phase_count;
  for (const auto& r : trace.rows)
    if (r.genes.size() != total) throw InputError("malformed trace: gene count mismatch");

  std::vector<SvgFile> out;
  std::size_t gene = 0;
  for (const auto& seg : trace.layout)
    for (std::size_t k = 0; k < seg.phase_count; ++k, ++gene)
      out.push_back({"convergence_" + slug(seg.junction) + "_phase" + std::to_string(k + 1) + ".svg",
                     scatter(trace, gene,
                             "Phase " + std::to_string(k + 1) + " at " + seg.junction, p)});
  return out;
}

SvgFile flow_map(const Network& net, std::span<const FlowRow> flows, const Provenance& p) {
  const auto n = net.links().size();
  std::vector<const FlowRow*> row_of(n, nullptr);
  for (const auto& r : flows) {
    const auto a = net.link_index(r.link);
    if (row_of[a]) throw InputError("flows CSV lists link '" + r.link + "' twice");
    row_of[a] = &r;
  }
  for (std::size_t a = 0; a < n; ++a)
    if (!row_of[a]) throw InputError("flows CSV is missing link '" + net.link(a).id + "'");

  struct Edge {
    std::size_t from, to;
    double flow = 0, effective_capacity = 0;
  };
  std::map<std::pair<std::size_t, std::size_t>, Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    const auto& l = net.link(a);
    auto& e = edges[{l.from, l.to}];
    e.from = l.from;
    e.to = l.to;
    e.flow += row_of[a]->flow;
    e.effective_capacity += row_of[a]->lambda * l.capacity;
  }

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY, fmax = 0;
  for (const auto& nd : net.nodes()) {
    xmin = std::min(xmin, nd.x);
    xmax = std::max(xmax, nd.x);
    ymin = std::min(ymin, nd.y);
    ymax = std::max(ymax, nd.y);
  }
  for (const auto& [k, e] : edges) fmax = std::max(fmax, e.flow);
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
  const double size = 560, margin = 60, w = size + 2 * margin, h = size + 2 * margin + 40;
  auto px = [&](double x) { return margin + (x - xmin) / span * size; };
  auto py = [&](double y) { return margin + 30 + (ymax - y) / span * size; };

  std::ostringstream os;
  header(os, w, h, p);
  os << "<text x=\"" << num(w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << "Link flows (veh/h), colour = flow / green capacity</text>\n";
  os << "<g stroke-linecap=\"round\">\n";
  for (const auto& [k, e] : edges) {
    const auto& a = net.node(e.from);
    const auto& b = net.node(e.to);
    double x1 = px(a.x), y1 = py(a.y), x2 = px(b.x), y2 = py(b.y);
    const double len = std::hypot(x2 - x1, y2 - y1);
    if (len == 0) continue;
    // offset to the left of travel so opposing directions do not overlap
    const double ox = (y2 - y1) / len * 6, oy = -(x2 - x1) / len * 6;
    x1 += ox; y1 += oy; x2 += ox; y2 += oy;
    const double ratio = e.effective_capacity > 0 ? e.flow / e.effective_capacity : 0;
    const double width = 1 + (fmax > 0 ? 9 * e.flow / fmax : 0);
    os << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
       << "\" y2=\"" << num(y2) << "\" stroke=\"" << ramp(std::min(ratio, 1.5) / 1.5)
       << "\" stroke-width=\"" << num(width) << "\"><title>" << escape(a.id) << " -&gt; "
       << escape(b.id) << ": " << num(e.flow) << " veh/h, ratio " << num(ratio)
       << "</title></line>\n";
    os << "<text x=\"" << num((x1 + x2) / 2 + ox * 2) << "\" y=\"" << num((y1 + y2) / 2 + oy * 2 + 4)
       << "\" font-size=\"10\" text-anchor=\"middle\">" << std::lround(e.flow) << "</text>\n";
  }
  os << "</g>\n<g>\n";
  for (const auto& nd : net.nodes()) {
    const bool c = nd.kind == NodeKind::centroid;
    os << "<circle cx=\"" << num(px(nd.x)) << "\" cy=\"" << num(py(nd.y)) << "\" r=\""
       << (c ? 9 : 14) << "\" fill=\"" << (c ? "#fff" : "#333") << "\" stroke=\"#333\"/>\n"
       << "<text x=\"" << num(px(nd.x)) << "\" y=\"" << num(py(nd.y) + 4)
       << "\" text-anchor=\"middle\" font-size=\"10\" fill=\"" << (c ? "#000" : "#fff") << "\">"
       << escape(nd.id) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return {"flow_map.svg", os.str()};
}

}  // namespace signalopt
