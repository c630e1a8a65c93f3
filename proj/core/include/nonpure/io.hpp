/// @file io.hpp
/// @brief Plain-text serialization of grids, densities, nonpure maps,
/// parameter forms and matrices. Floats are written with 17 significant
/// digits so that reading back reproduces every value bit for bit.
///
/// Every document starts with a `nonpure-<kind> <version>` header line
/// followed by `key value...` lines; blank lines and `#` comments are
/// ignored.
#pragma once

#include <iosfwd>
#include <string>

#include "nonpure/error.hpp"
#include "nonpure/forms.hpp"
#include "nonpure/grid.hpp"
#include "nonpure/nc.hpp"
#include "nonpure/nonpure_map.hpp"

namespace nonpure {

/// Malformed input; the message names the offending line.
class FormatError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kFormatVersion = 1;

/// Formats with "%.17g".
std::string format_double(double x);

void write_grid_scalar(std::ostream& os, const GridScalar& f);
GridScalar read_grid_scalar(std::istream& is);
/// Reads a scalar and validates it as a density.
GridDensity read_density(std::istream& is);
GridDensity read_density_file(const std::string& path);

/// Manifest (parameter box, space grid, field count) followed by the
/// density and field values of every parameter node.
void write_map(std::ostream& os, const NonpureMap& f);
NonpureMap read_map(std::istream& is);

void write_param_form(std::ostream& os, const ParamForm& alpha);
ParamForm read_param_form(std::istream& is);

/// `n` line, then one line per row of real/imaginary pairs.
void write_matrix(std::ostream& os, const Matrix& a);
Matrix read_matrix(std::istream& is);

/// Parameter box, matrix size and field count, then rho and the fields at
/// every parameter node.
void write_nc_map(std::ostream& os, const NcNonpureMap& f);
NcNonpureMap read_nc_map(std::istream& is, bool require_states = true);

}  // namespace nonpure
