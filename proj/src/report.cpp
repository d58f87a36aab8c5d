#include "vortexlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vortexlab {

using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

json grid_spec(const Background& bg) {
  return json{{"h", bg.grid().h()},
              {"root_order", bg.group().root_order()},
              {"branch_offsets", bg.group().branch_offsets()}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema != 1) throw ConfigError("unsupported config schema");
  if (grid_h <= 0.0 || grid_h > 0.1) throw ConfigError("grid_h out of range");
  if (dt <= 0.0 || dt > 1e-2) throw ConfigError("dt out of range (0, 1e-2]");
  if (weight.num <= 0 || weight.den <= 0)
    throw ConfigError("weight m/n must be positive");
  if (weight.value() <= 1.0)
    throw ConfigError("differential weight must exceed 1");
  if (root_order % weight.den != 0)
    throw ConfigError("root order must be divisible by the weight denominator");
  if (orbit_count < 1) throw ConfigError("orbit count must be positive");
  const double steps = orbit_T / dt;
  if (std::abs(steps - std::lround(steps)) > 1e-9)
    throw ConfigError("dt must divide the sampling interval T");
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  c.schema = j.value("schema", 1);
  c.root_order = j.value("root_order", 1);
  if (j.contains("branch_offsets")) {
    auto v = j["branch_offsets"].get<std::vector<int>>();
    if (v.size() != 4) throw ConfigError("branch_offsets needs 4 entries");
    std::copy(v.begin(), v.end(), c.branch_offsets.begin());
  }
  c.grid_h = j.value("grid_h", c.grid_h);
  if (j.contains("weight"))
    c.weight = make_rational(j["weight"].value("m", 3), j["weight"].value("n", 1));
  c.solver_tol = j.value("solver_tol", c.solver_tol);
  if (j.contains("ensemble")) {
    const auto& e = j["ensemble"];
    c.orbit_count = e.value("count", c.orbit_count);
    c.orbit_T = e.value("T", c.orbit_T);
    c.dt = e.value("dt", c.dt);
    c.seed = e.value("seed", c.seed);
  }
  c.out_dir = j.value("out", c.out_dir);
  if (j.contains("coefficients"))
    for (const auto& p : j["coefficients"])
      c.coefficients.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  c.validate();
  return c;
}

void write_field(const std::string& dir, const std::string& name,
                 const Background& bg, const WeightedField& f) {
  ensure_dir(dir);
  json j;
  j["weight"] = {{"m", f.weight.num}, {"n", f.weight.den}};
  j["metric_tag"] = f.metric_tag;
  j["grid"] = grid_spec(bg);
  j["values"] = name + ".csv";
  j["order"] = "row-major, index = j*nx + i, unmasked nodes written as 0 0";
  std::ofstream hdr(dir + "/" + name + ".json");
  hdr << j.dump(2) << "\n";

  std::ofstream csv(dir + "/" + name + ".csv");
  csv << "re,im\n";
  csv.precision(17);
  const Grid& g = bg.grid();
  for (int idx = 0; idx < g.size(); ++idx) {
    const cplx v = g.masked(idx) ? f.amp[idx] : cplx(0.0, 0.0);
    csv << v.real() << "," << v.imag() << "\n";
  }
}

WeightedField read_field(const std::string& json_path, const Background& bg) {
  std::ifstream in(json_path);
  if (!in) throw ConfigError("cannot open field header " + json_path);
  json j;
  in >> j;
  const double h = j.at("grid").at("h").get<double>();
  if (std::abs(h - bg.grid().h()) > 1e-14)
    throw ConfigError("field grid spacing does not match the session grid");
  if (j.at("grid").at("root_order").get<int>() != bg.group().root_order())
    throw ConfigError("field root order does not match the session group");

  WeightedField f;
  f.weight = make_rational(j.at("weight").at("m").get<int>(),
                           j.at("weight").at("n").get<int>());
  f.metric_tag = j.value("metric_tag", "g0");
  f.amp.assign(bg.grid().size(), cplx(0.0, 0.0));

  const std::string csv_path =
      (std::filesystem::path(json_path).parent_path() /
       j.at("values").get<std::string>())
          .string();
  std::ifstream csv(csv_path);
  if (!csv) throw ConfigError("cannot open field values " + csv_path);
  std::string line;
  std::getline(csv, line);  // header
  for (int idx = 0; idx < bg.grid().size(); ++idx) {
    if (!std::getline(csv, line))
      throw ConfigError("field values truncated: " + csv_path);
    const auto comma = line.find(',');
    f.amp[idx] = cplx(std::stod(line.substr(0, comma)),
                      std::stod(line.substr(comma + 1)));
  }
  return f;
}

void write_group_json(const std::string& path, const FuchsianGroup& g) {
  json j;
  j["root_order"] = g.root_order();
  j["branch_offsets"] = g.branch_offsets();
  json gens = json::array();
  for (int k = 0; k < 8; ++k) {
    const auto& m = g.maps()[k];
    gens.push_back({m.a.real(), m.a.imag(), m.b.real(), m.b.imag()});
  }
  j["generators"] = gens;
  json verts = json::array();
  for (const auto& v : g.domain().vertices)
    verts.push_back({v.real(), v.imag()});
  j["vertices"] = verts;
  j["relator"] = FuchsianGroup::relator();
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void write_manifest(const std::string& dir, const std::string& name,
                    const VortexData& d) {
  ensure_dir(dir);
  write_field(dir, name + "_A", *d.bg, d.A);
  json j;
  j["schema"] = 1;
  j["ell"] = {{"m", d.ell.num}, {"n", d.ell.den}};
  j["coupling"] = d.coupling;
  j["grid"] = grid_spec(*d.bg);
  j["fields"]["A"] = name + "_A.json";
  if (d.has_theta()) {
    write_field(dir, name + "_theta", *d.bg, d.theta);
    j["fields"]["theta"] = name + "_theta.json";
  }
  WeightedField uf;
  uf.weight = make_rational(0, 1);
  uf.metric_tag = "g0";
  uf.amp.assign(d.bg->grid().size(), cplx(0.0, 0.0));
  for (int idx = 0; idx < d.bg->grid().size(); ++idx)
    if (d.bg->grid().masked(idx)) uf.amp[idx] = d.u[idx];
  write_field(dir, name + "_u", *d.bg, uf);
  j["fields"]["u"] = name + "_u.json";
  std::ofstream out(dir + "/" + name + ".json");
  out << j.dump(2) << "\n";
}

VortexData read_manifest(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ConfigError("cannot open manifest " + json_path);
  json j;
  in >> j;
  const auto& gs = j.at("grid");
  std::array<int, 4> offs{0, 0, 0, 0};
  if (gs.contains("branch_offsets")) {
    auto v = gs["branch_offsets"].get<std::vector<int>>();
    std::copy(v.begin(), v.end(), offs.begin());
  }
  auto group =
      std::make_shared<FuchsianGroup>(gs.at("root_order").get<int>(), offs);
  auto grid = std::make_shared<Grid>(group, gs.at("h").get<double>());
  auto bg = std::make_shared<Background>(group, grid);

  const std::filesystem::path base =
      std::filesystem::path(json_path).parent_path();
  VortexData d;
  d.ell = make_rational(j.at("ell").at("m").get<int>(),
                        j.at("ell").at("n").get<int>());
  d.coupling = j.value("coupling", d.ell.value());
  d.A = read_field((base / j.at("fields").at("A").get<std::string>()).string(),
                   *bg);
  if (j.at("fields").contains("theta"))
    d.theta = read_field(
        (base / j["fields"]["theta"].get<std::string>()).string(), *bg);
  WeightedField uf = read_field(
      (base / j.at("fields").at("u").get<std::string>()).string(), *bg);
  d.u.assign(grid->size(), std::numeric_limits<double>::quiet_NaN());
  for (int idx = 0; idx < grid->size(); ++idx)
    if (grid->masked(idx)) d.u[idx] = uf.amp[idx].real();
  d.bg = bg;
  d.bg->set_conformal_factor(d.u);
  return d;
}

void write_orbit_csv(const std::string& path, const OrbitTrace& trace) {
  std::ofstream out(path);
  out << "t,Re z,Im z,phi,lambda,Vlambda,Hlambda,Kg,kappa,p,kappa_p\n";
  out.precision(17);
  for (int k = 0; k < trace.size(); ++k) {
    out << trace.time(k) << "," << trace.states[k].z.real() << ","
        << trace.states[k].z.imag() << "," << trace.states[k].phi;
    if (trace.sampled()) {
      out << "," << trace.lambda[k] << "," << trace.vlambda[k] << ","
          << trace.hlambda[k] << "," << trace.Kg[k] << "," << trace.kappa[k]
          << "," << trace.p[k] << "," << trace.kappa_p[k];
    } else {
      out << ",,,,,,,";
    }
    out << "\n";
  }
}

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& log) {
  std::ofstream out(path);
  out << "iteration,residual_sup,step_norm\n";
  out.precision(17);
  for (const auto& r : log)
    out << r.iteration << "," << r.residual_sup << "," << r.step_norm << "\n";
}

namespace {
json verdict_json(const OrbitVerdict& v) {
  return json{{"orbit_id", v.orbit_id},
              {"r_u", {{"min", v.ru_min}, {"max", v.ru_max}}},
              {"r_s", {{"min", v.rs_min}, {"max", v.rs_max}}},
              {"kappa_p", {{"min", v.kappa_p_min}, {"max", v.kappa_p_max}}},
              {"alt1_margins", {v.alt1_margin_u, v.alt1_margin_s}},
              {"alt2_margins", {v.alt2_margin_u, v.alt2_margin_s}},
              {"mu_fit", v.mu_fit},
              {"C_fit", v.C_fit},
              {"chi", {v.chi_plus, v.chi_minus}},
              {"domination_pass", v.domination_pass}};
}
}  // namespace

void write_verdicts_json(const std::string& path,
                         const std::vector<OrbitVerdict>& verdicts, double ell,
                         int expected_alternative) {
  json j;
  j["ell"] = ell;
  j["expected_alternative"] = expected_alternative;
  j["orbits"] = json::array();
  for (const auto& v : verdicts) j["orbits"].push_back(verdict_json(v));
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void write_verdicts_csv(const std::string& path,
                        const std::vector<OrbitVerdict>& verdicts) {
  std::ofstream out(path);
  out << "orbit_id,ru_min,ru_max,rs_min,rs_max,kappa_p_min,kappa_p_max,"
         "alt1_margin_u,alt1_margin_s,alt2_margin_u,alt2_margin_s,mu_fit,"
         "C_fit,chi_plus,chi_minus,domination_pass\n";
  out.precision(17);
  for (const auto& v : verdicts) {
    out << v.orbit_id << "," << v.ru_min << "," << v.ru_max << "," << v.rs_min
        << "," << v.rs_max << "," << v.kappa_p_min << "," << v.kappa_p_max
        << "," << v.alt1_margin_u << "," << v.alt1_margin_s << ","
        << v.alt2_margin_u << "," << v.alt2_margin_s << "," << v.mu_fit << ","
        << v.C_fit << "," << v.chi_plus << "," << v.chi_minus << ","
        << (v.domination_pass ? 1 : 0) << "\n";
  }
}

// ---- SVG --------------------------------------------------------------------
namespace {

constexpr int kW = 720, kH = 420, kMargin = 56;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b"};

void svg_frame(std::ostream& out, const std::string& title, double x0,
               double x1, double y0, double y1) {
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW
      << "' height='" << kH << "' viewBox='0 0 " << kW << " " << kH << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  out << "<rect x='" << kMargin << "' y='" << kMargin << "' width='"
      << kW - 2 * kMargin << "' height='" << kH - 2 * kMargin
      << "' fill='none' stroke='#444'/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + k * (x1 - x0) / 4.0;
    const double fy = y0 + k * (y1 - y0) / 4.0;
    const double px = kMargin + k * (kW - 2.0 * kMargin) / 4.0;
    const double py = kH - kMargin - k * (kH - 2.0 * kMargin) / 4.0;
    out << "<text x='" << px << "' y='" << kH - kMargin + 18
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << fx << "</text>\n";
    out << "<text x='" << kMargin - 8 << "' y='" << py + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << fy
        << "</text>\n";
  }
}

}  // namespace

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<PlotSeries>& series) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  std::ofstream out(path);
  svg_frame(out, title, x0, x1, y0, y1);
  int color = 0;
  for (const auto& s : series) {
    out << "<polyline fill='none' stroke='" << kColors[color % 6]
        << "' stroke-width='1.4' points='";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      const double px =
          kMargin + (s.x[k] - x0) / (x1 - x0) * (kW - 2.0 * kMargin);
      const double py =
          kH - kMargin - (s.y[k] - y0) / (y1 - y0) * (kH - 2.0 * kMargin);
      out << px << "," << py << " ";
    }
    out << "'/>\n";
    out << "<text x='" << kW - kMargin - 6 << "' y='"
        << kMargin + 16 + 16 * color << "' text-anchor='end' "
        << "font-family='sans-serif' font-size='12' fill='"
        << kColors[color % 6] << "'>" << s.label << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

void write_svg_histogram(const std::string& path, const std::string& title,
                         const std::vector<double>& values, int bins) {
  double v0 = 1e300, v1 = -1e300;
  for (double v : values)
    if (std::isfinite(v)) {
      v0 = std::min(v0, v);
      v1 = std::max(v1, v);
    }
  if (v1 <= v0) v1 = v0 + 1e-12;
  std::vector<int> count(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    int b = static_cast<int>((v - v0) / (v1 - v0) * bins);
    count[std::clamp(b, 0, bins - 1)]++;
  }
  const int cmax = *std::max_element(count.begin(), count.end());

  std::ofstream out(path);
  svg_frame(out, title, v0, v1, 0.0, cmax);
  const double bw = (kW - 2.0 * kMargin) / bins;
  for (int b = 0; b < bins; ++b) {
    const double bh = (kH - 2.0 * kMargin) * count[b] / std::max(cmax, 1);
    out << "<rect x='" << kMargin + b * bw << "' y='" << kH - kMargin - bh
        << "' width='" << bw * 0.92 << "' height='" << bh
        << "' fill='#1f77b4'/>\n";
  }
  out << "</svg>\n";
}

}  // namespace vortexlab
