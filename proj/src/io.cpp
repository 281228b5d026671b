#include "freemix/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace freemix {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, std::size_t line_no) {
  const std::string t = trim(field);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("line " + std::to_string(line_no) + ": cannot parse number '" + t + "'");
  return x;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Spectrum read_spectrum(std::istream& in) {
  std::vector<double> values;
  std::vector<Atom> atoms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      values.push_back(parse_double(t, line_no));
    } else {
      atoms.push_back({parse_double(t.substr(0, comma), line_no), parse_double(t.substr(comma + 1), line_no)});
    }
  }
  if (!values.empty() && !atoms.empty())
    throw std::invalid_argument("spectrum file mixes plain values and value,weight lines");
  if (!atoms.empty()) return Spectrum::from_atoms(std::move(atoms));
  if (values.empty()) throw std::invalid_argument("spectrum file has no atoms");
  return Spectrum::from_values(std::move(values));
}

Spectrum read_spectrum(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_spectrum(in);
}

void write_spectrum(std::ostream& out, const Spectrum& s) {
  for (const Atom& a : s.atoms()) {
    if (s.is_unweighted())
      out << format_double(a.value) << '\n';
    else
      out << format_double(a.value) << ',' << format_double(a.weight) << '\n';
  }
}

void write_density_csv(std::ostream& out, const DensityCurve& c) {
  out << "x,density\n";
  const GridSpec& g = c.grid();
  for (std::size_t i = 0; i < g.points; ++i)
    out << format_double(g.at(i)) << ',' << format_double(c.values()(static_cast<Index>(i))) << '\n';
}

void write_density_csv(const std::filesystem::path& path, const DensityCurve& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  write_density_csv(out, c);
}

DensityCurve read_density_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,density")
    throw std::invalid_argument("density CSV must start with the header x,density");
  std::vector<double> xs, fs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("line " + std::to_string(line_no) + ": expected x,density");
    xs.push_back(parse_double(t.substr(0, comma), line_no));
    fs.push_back(parse_double(t.substr(comma + 1), line_no));
  }
  if (xs.size() < 2) throw std::invalid_argument("density CSV needs at least two rows");
  GridSpec g{xs.front(), xs.back(), xs.size()};
  const double tol = 1e-12 * std::max({1.0, std::abs(g.xmin), std::abs(g.xmax)}) + 1e-9 * g.step();
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - g.at(i)) > tol) throw std::invalid_argument("density CSV grid is not uniform");
  return DensityCurve(g, Eigen::Map<const Eigen::VectorXd>(fs.data(), static_cast<Index>(fs.size())));
}

DensityCurve read_density_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_density_csv(in);
}

template <typename Scalar>
void write_matrix_csv(std::ostream& out, const Matrix<Scalar>& a) {
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      if constexpr (is_complex_v<Scalar>) {
        const double im = a(i, j).imag();
        out << format_double(a(i, j).real()) << (std::signbit(im) ? "-" : "+") << format_double(std::abs(im)) << 'j';
      } else {
        out << format_double(a(i, j));
      }
    }
    out << '\n';
  }
}

template void write_matrix_csv<double>(std::ostream&, const Matrix<double>&);
template void write_matrix_csv<cplx>(std::ostream&, const Matrix<cplx>&);

nlohmann::ordered_json to_json(const MomentReport& r) {
  nlohmann::ordered_json j;
  j["m1"] = r.m1;
  j["m2"] = r.m2;
  j["m3"] = r.m3;
  j["m4"] = r.m4;
  j["m4_exact"] = r.m4_exact;
  j["m4_classical"] = r.m4_classical;
  j["m4_free"] = r.m4_free;
  j["kappa2_1"] = r.kappa2_1;
  j["kappa2_2"] = r.kappa2_2;
  j["cross_classical"] = r.cross_classical;
  j["cross_exact"] = r.cross_exact;
  j["cross_free"] = r.cross_free;
  j["ipr"] = r.ipr;
  j["p_raw"] = r.p_raw;
  j["p_clamped"] = r.p_clamped;
  j["p_stderr"] = r.p_stderr;
  j["p_method"] = to_string(r.p_method);
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["p_moments"] = opt(r.p_moments);
  j["p_fourth_moment"] = opt(r.p_fourth_moment);
  j["p_ipr"] = opt(r.p_ipr);
  j["p_closed"] = opt(r.p_closed);
  j["samples"] = r.samples;
  j["dimension"] = r.dimension;
  j["beta"] = r.beta;
  j["warnings"] = r.warnings;
  return j;
}

nlohmann::ordered_json to_json(const GridSpec& g) {
  return {{"xmin", g.xmin}, {"xmax", g.xmax}, {"points", g.points}};
}

nlohmann::ordered_json to_json(const std::vector<PointDiagnostics>& diagnostics) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const PointDiagnostics& d : diagnostics) {
    nlohmann::ordered_json j;
    j["x"] = d.x;
    j["n_real"] = d.n_real;
    j["n_complex"] = d.n_complex;
    j["max_residual"] = d.max_residual;
    j["skipped"] = d.skipped;
    if (!d.error.empty()) j["error"] = d.error;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace freemix
