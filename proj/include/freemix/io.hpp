#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "freemix/density.hpp"
#include "freemix/free_convolution.hpp"
#include "freemix/mixture.hpp"
#include "freemix/spectrum.hpp"

namespace freemix {

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double x);

/// One value per line (weight 1/m each) or "value,weight" per line. Blank
/// lines and lines starting with '#' are ignored; the two forms cannot mix.
Spectrum read_spectrum(std::istream& in);
Spectrum read_spectrum(const std::filesystem::path& path);
void write_spectrum(std::ostream& out, const Spectrum& s);

/// Header "x,density", one row per grid point.
void write_density_csv(std::ostream& out, const DensityCurve& c);
void write_density_csv(const std::filesystem::path& path, const DensityCurve& c);
DensityCurve read_density_csv(std::istream& in);
DensityCurve read_density_csv(const std::filesystem::path& path);

/// Row-major, comma separated; complex entries as "re+imj".
template <typename Scalar>
void write_matrix_csv(std::ostream& out, const Matrix<Scalar>& a);

nlohmann::ordered_json to_json(const MomentReport& r);
nlohmann::ordered_json to_json(const GridSpec& g);
nlohmann::ordered_json to_json(const std::vector<PointDiagnostics>& diagnostics);

}  // namespace freemix
