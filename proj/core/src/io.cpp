#include "nonpure/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace nonpure {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

constexpr std::size_t kValuesPerLine = 8;

class TokenReader {
 public:
  explicit TokenReader(std::istream& is) : is_(is) {}

  /// Next non-empty, non-comment line split on whitespace.
  std::vector<std::string> line() {
    std::string raw;
    while (std::getline(is_, raw)) {
      ++line_no_;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      std::istringstream ss(raw);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    fail("unexpected end of input");
  }

  std::vector<std::string> keyed(const std::string& key, std::size_t min_values) {
    auto t = line();
    if (t.front() != key) fail("expected '" + key + "', found '" + t.front() + "'");
    if (t.size() < min_values + 1) fail("'" + key + "' needs " + std::to_string(min_values) + " values");
    t.erase(t.begin());
    return t;
  }

  void header(const std::string& kind) {
    const auto t = line();
    if (t.size() != 2 || t[0] != "nonpure-" + kind) fail("expected header 'nonpure-" + kind + "'");
    if (to_int(t[1]) != kFormatVersion) fail("unsupported version " + t[1]);
  }

  /// `count` numbers, possibly spread over several lines.
  std::vector<double> numbers(std::size_t count) {
    std::vector<double> out;
    out.reserve(count);
    while (out.size() < count) {
      for (const auto& t : line()) {
        if (out.size() == count) fail("too many values on line");
        out.push_back(to_double(t));
      }
    }
    return out;
  }

  double to_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') fail("not a number: '" + s + "'");
    return v;
  }

  int to_int(const std::string& s) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') fail("not an integer: '" + s + "'");
    return static_cast<int>(v);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& is_;
  int line_no_ = 0;
};

template <typename T>
void write_row(std::ostream& os, const char* key, const std::vector<T>& v) {
  os << key;
  for (const T& x : v) {
    if constexpr (std::is_floating_point_v<T>) {
      os << ' ' << format_double(x);
    } else {
      os << ' ' << x;
    }
  }
  os << '\n';
}

void write_values(std::ostream& os, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << format_double(v[i]) << ((i + 1) % kValuesPerLine == 0 || i + 1 == v.size() ? '\n' : ' ');
  }
}

void write_box(std::ostream& os, const BoxGrid& g) {
  write_row(os, "lo", g.lo_vec());
  write_row(os, "hi", g.hi_vec());
  write_row(os, "shape", g.shape_vec());
}

BoxGrid read_box(TokenReader& r) {
  std::vector<double> lo, hi;
  std::vector<int> shape;
  for (const auto& t : r.keyed("lo", 1)) lo.push_back(r.to_double(t));
  for (const auto& t : r.keyed("hi", 1)) hi.push_back(r.to_double(t));
  for (const auto& t : r.keyed("shape", 1)) shape.push_back(r.to_int(t));
  if (lo.size() != hi.size() || lo.size() != shape.size()) r.fail("box rows differ in length");
  try {
    return BoxGrid(lo, hi, shape);
  } catch (const Error& e) {
    r.fail(e.what());
  }
}

GridScalar read_scalar_body(TokenReader& r) {
  BoxGrid g = read_box(r);
  r.keyed("values", 0);
  std::vector<double> v = r.numbers(g.size());
  return GridScalar(std::move(g), std::move(v));
}

}  // namespace

void write_grid_scalar(std::ostream& os, const GridScalar& f) {
  os << "nonpure-grid " << kFormatVersion << '\n';
  write_box(os, f.grid());
  os << "values\n";
  write_values(os, f.values());
}

GridScalar read_grid_scalar(std::istream& is) {
  TokenReader r(is);
  r.header("grid");
  return read_scalar_body(r);
}

GridDensity read_density(std::istream& is) { return GridDensity(read_grid_scalar(is)); }

GridDensity read_density_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return read_density(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_map(std::ostream& os, const NonpureMap& f) {
  os << "nonpure-map " << kFormatVersion << '\n';
  os << "# parameter box\n";
  write_box(os, f.params());
  os << "# space grid\n";
  write_box(os, f.space());
  os << "fields " << f.param_dim() << '\n';
  for (std::size_t node = 0; node < f.params().size(); ++node) {
    const MapSlice s = f.slice(node);
    os << "node " << node << "\nrho\n";
    write_values(os, s.rho.values());
    for (int j = 0; j < f.param_dim(); ++j) {
      for (int a = 0; a < f.space().dim(); ++a) {
        os << "field " << j << ' ' << a << '\n';
        write_values(os, s.fields[j].component(a).values());
      }
    }
  }
}

NonpureMap read_map(std::istream& is) {
  TokenReader r(is);
  r.header("map");
  ParamBox params(read_box(r));
  const BoxGrid space = read_box(r);
  const int m = r.to_int(r.keyed("fields", 1)[0]);
  if (m != params.dim()) r.fail("field count must equal the parameter dimension");
  std::vector<MapSlice> slices;
  slices.reserve(params.size());
  for (std::size_t node = 0; node < params.size(); ++node) {
    if (r.to_int(r.keyed("node", 1)[0]) != static_cast<int>(node)) r.fail("nodes out of order");
    r.keyed("rho", 0);
    GridScalar rho(space, r.numbers(space.size()));
    std::vector<GridVectorField> fields;
    for (int j = 0; j < m; ++j) {
      std::vector<GridScalar> comps;
      for (int a = 0; a < space.dim(); ++a) {
        const auto t = r.keyed("field", 2);
        if (r.to_int(t[0]) != j || r.to_int(t[1]) != a) r.fail("fields out of order");
        comps.emplace_back(space, r.numbers(space.size()));
      }
      fields.emplace_back(std::move(comps));
    }
    slices.push_back(MapSlice{GridDensity(std::move(rho)), std::move(fields)});
  }
  return NonpureMap::from_slices(std::move(params), space, std::move(slices));
}

void write_param_form(std::ostream& os, const ParamForm& alpha) {
  os << "nonpure-param-form " << kFormatVersion << '\n';
  os << "degree " << alpha.degree() << '\n';
  write_box(os, alpha.params());
  for (std::size_t i = 0; i < alpha.indices().size(); ++i) {
    write_row(os, "index", alpha.indices()[i]);
    write_values(os, alpha.coefficients(i));
  }
}

ParamForm read_param_form(std::istream& is) {
  TokenReader r(is);
  r.header("param-form");
  const int k = r.to_int(r.keyed("degree", 1)[0]);
  ParamBox params(read_box(r));
  const auto indices = increasing_multi_indices(params.dim(), k);
  std::vector<std::vector<double>> coeffs;
  for (const MultiIndex& expected : indices) {
    const auto t = r.line();
    if (t.front() != "index") r.fail("expected 'index'");
    MultiIndex got;
    for (std::size_t i = 1; i < t.size(); ++i) got.push_back(r.to_int(t[i]));
    if (got != expected) r.fail("multi-indices out of order");
    coeffs.push_back(r.numbers(params.size()));
  }
  return ParamForm(std::move(params), k, std::move(coeffs));
}

namespace {

void write_matrix_rows(std::ostream& os, const Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      os << (j ? " " : "") << format_double(a(i, j).real()) << ' ' << format_double(a(i, j).imag());
    }
    os << '\n';
  }
}

Matrix read_matrix_rows(TokenReader& r, int n) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    const auto row = r.numbers(2 * static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) a(i, j) = Complex(row[2 * j], row[2 * j + 1]);
  }
  return a;
}

int read_matrix_size(TokenReader& r) {
  const int n = r.to_int(r.keyed("n", 1)[0]);
  if (n < 1 || n > kMaxMatrixSize) r.fail("matrix size out of range");
  return n;
}

}  // namespace

void write_matrix(std::ostream& os, const Matrix& a) {
  os << "nonpure-matrix " << kFormatVersion << '\n';
  os << "n " << a.rows() << '\n';
  write_matrix_rows(os, a);
}

Matrix read_matrix(std::istream& is) {
  TokenReader r(is);
  r.header("matrix");
  return read_matrix_rows(r, read_matrix_size(r));
}

void write_nc_map(std::ostream& os, const NcNonpureMap& f) {
  os << "nonpure-nc-map " << kFormatVersion << '\n';
  os << "# parameter box\n";
  write_box(os, f.params());
  os << "n " << f.matrix_size() << '\n';
  os << "fields " << f.param_dim() << '\n';
  for (std::size_t node = 0; node < f.size(); ++node) {
    const NcSlice& s = f.slice(node);
    os << "node " << node << "\nrho\n";
    write_matrix_rows(os, s.rho);
    for (int j = 0; j < f.param_dim(); ++j) {
      os << "field " << j << '\n';
      write_matrix_rows(os, s.fields[j]);
    }
  }
}

NcNonpureMap read_nc_map(std::istream& is, bool require_states) {
  TokenReader r(is);
  r.header("nc-map");
  ParamBox params(read_box(r));
  const int n = read_matrix_size(r);
  const int m = r.to_int(r.keyed("fields", 1)[0]);
  if (m != params.dim()) r.fail("field count must equal the parameter dimension");
  std::vector<NcSlice> slices;
  slices.reserve(params.size());
  for (std::size_t node = 0; node < params.size(); ++node) {
    if (r.to_int(r.keyed("node", 1)[0]) != static_cast<int>(node)) r.fail("nodes out of order");
    r.keyed("rho", 0);
    NcSlice s{read_matrix_rows(r, n), {}};
    for (int j = 0; j < m; ++j) {
      if (r.to_int(r.keyed("field", 1)[0]) != j) r.fail("fields out of order");
      s.fields.push_back(read_matrix_rows(r, n));
    }
    slices.push_back(std::move(s));
  }
  return NcNonpureMap(std::move(params), std::move(slices), require_states);
}

}  // namespace nonpure
