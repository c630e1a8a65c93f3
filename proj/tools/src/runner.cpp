#include "nonpure_cli/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "nonpure/continuity.hpp"
#include "nonpure/convergence.hpp"
#include "nonpure/error.hpp"
#include "nonpure/forms.hpp"
#include "nonpure/io.hpp"
#include "nonpure/nc.hpp"
#include "nonpure/transport.hpp"
#include "nonpure/wasserstein.hpp"
#include "nonpure_cli/fixtures.hpp"

namespace nonpure::cli {

namespace {

/// Residuals of one check across refinement levels.
struct Series {
  explicit Series(std::string name) : check(std::move(name)) {}

  std::string check;
  std::vector<double> steps;
  std::vector<double> values;
  std::optional<double> tol;
  std::optional<double> min_order;
  std::string note;
  bool failed = false;

  void add(double step, double value) {
    steps.push_back(step);
    values.push_back(value);
  }
  void fail(double step, const std::string& why, double value = NAN) {
    add(step, value);
    failed = true;
    if (note.empty()) note = why;
  }
};

Row finish(const Series& s) {
  Row row;
  row.check = s.check;
  row.tol = s.tol;
  row.min_order = s.min_order;
  row.note = s.note;
  row.residual = s.values.empty() ? NAN : s.values.back();
  bool finite = true;
  for (double v : s.values) finite = finite && std::isfinite(v);
  if (s.values.size() >= 3 && finite) {
    const OrderFit fit = fit_order(s.steps, s.values);
    row.at_floor = fit.at_floor;
    if (!fit.at_floor) row.order = fit.order;
  }
  judge(row);
  if (s.failed || !finite) {
    row.pass = false;
    if (row.note.empty()) row.note = "non-finite residual";
  }
  return row;
}

/// Runs `check` and records its value; library errors become a failed row.
void attempt(Series& s, double step, const std::function<double()>& check) {
  try {
    s.add(step, check());
  } catch (const PreconditionViolated& e) {
    s.fail(step, e.what(), e.residual());
  } catch (const Error& e) {
    s.fail(step, e.what());
  }
}

constexpr std::size_t kMaterializeNodes = 64;
constexpr double kBrokenFactor = 1e3;

double pow2(int level) { return std::ldexp(1.0, -level); }

Report base_report(const Scenario& s) {
  Report r;
  r.command = std::string(kind_name(s.kind()));
  r.scenario_hash = s.hash();
  r.levels = s.levels();
  return r;
}

FamilyConfig read_family(const Scenario& s, std::vector<std::string_view> fixtures) {
  FamilyConfig config;
  config.fixture = s.choice("fixture", std::string(fixtures.front()), fixtures);
  config.h = s.positive("h", config.fixture == "surface" ? 0.1 : 0.05);
  config.radius = s.positive("radius", config.fixture == "surface" ? 0.6 : 0.8);
  config.sharpness = s.positive("sharpness", 6.0);
  // Two-parameter families default to a small patch: a full box at fine h
  // does not fit in memory.
  const bool two = family_param_dim(config.fixture) == 2;
  config.patch = s.choice("params", two ? "patch" : "box", {"box", "patch"}) == "patch";
  // Non-commensurate with h, so that no stencil cancels exactly.
  config.du = s.positive("du", config.patch ? 1.3 * config.h : 1.0 / 13.0);
  config.patch_nodes = s.integer("patch.nodes", 5, BoxGrid::kMinNodes, 64);
  config.patch_center = s.numbers("patch.center", {});
  return config;
}

FamilyConfig at_level(FamilyConfig config, int level) {
  config.h *= pow2(level);
  config.du *= pow2(level);
  return config;
}

// ---------------------------------------------------------------------------
// validate

RunOutput run_validate(const Scenario& s) {
  s.allow_only({"fixture", "h", "du", "radius", "sharpness", "params", "patch.nodes",
                "patch.center", "tol.continuity", "tol.compatibility", "tol.mixed",
                "order.min"});
  const FamilyConfig config = read_family(s, kFamilyNames);
  const int m = family_param_dim(config.fixture);
  const double min_order = s.number("order.min", 1.9);

  // Raw residuals scale with the steepness of rho, which is largest for the
  // three-dimensional bump.
  const bool surface = config.fixture == "surface";
  const bool broken = config.fixture == "planar-stream";
  Series cont("continuity"), compat(broken ? "compatibility-broken" : "compatibility"),
      mixed("mixed-partials");
  cont.tol = s.nonnegative("tol.continuity", surface ? 50.0 : 0.5);
  cont.min_order = min_order;
  compat.tol = s.nonnegative("tol.compatibility", 1e-10);
  mixed.tol = s.nonnegative("tol.mixed", surface ? 50.0 : 1.0);
  mixed.min_order = min_order;

  RunOutput out{base_report(s), {}, {}};
  for (int level = 0; level < s.levels(); ++level) {
    const FamilyConfig ls = at_level(config, level);
    NonpureMap f = build_family(ls);
    // Materialized slices are reused by every check below.
    if (f.params().size() <= kMaterializeNodes) f = f.materialize();
    attempt(cont, ls.h, [&] {
      double worst = 0.0;
      for (int j = 0; j < m; ++j) worst = std::max(worst, continuity_residual(f, j).max_abs);
      return worst;
    });
    attempt(compat, ls.h, [&] { return compatibility_residual(f).max_abs; });
    if (m >= 2) {
      attempt(mixed, ls.h, [&] {
        return mixed_theorem_residual(f, 0, 1, std::isfinite(cont.values.back())
                                                   ? std::max(*cont.tol, cont.values.back())
                                                   : *cont.tol)
            .max_abs;
      });
    }
    out.report.h = ls.h;
    out.report.du = ls.du;
  }
  out.report.rows.push_back(finish(cont));
  // Compatibility either holds to rounding or fails outright; no order.
  Row c = finish(compat);
  c.order.reset();
  c.at_floor = false;
  c.min_order.reset();
  judge(c);
  if (broken) {
    // The stream perturbation must break compatibility by a wide margin.
    c.tol = kBrokenFactor * *compat.tol;
    c.pass = c.residual > *c.tol;
    c.note = "expected above tol";
  }
  if (compat.failed) c.pass = false;
  out.report.rows.push_back(c);
  if (m >= 2) out.report.rows.push_back(finish(mixed));
  return out;
}

// ---------------------------------------------------------------------------
// evolve

RunOutput run_evolve(const Scenario& s) {
  s.allow_only({"h", "box.lo", "box.hi", "velocity", "center", "radius", "sharpness", "t_end",
                "cfl", "tol.mass", "tol.l1", "order.min"});
  const std::vector<double> lo = s.numbers("box.lo", {-1.0, -1.0});
  const std::vector<double> hi = s.numbers("box.hi", {2.0, 1.0});
  const std::vector<double> v = s.numbers("velocity", {1.0, 0.0});
  const std::vector<double> center = s.numbers("center", std::vector<double>(lo.size(), 0.0));
  const double h0 = s.positive("h", 0.02);
  const double radius = s.positive("radius", 0.5);
  const double sharpness = s.positive("sharpness", 6.0);
  const double t_end = s.positive("t_end", 0.5);
  const double cfl = s.positive("cfl", 0.8);
  if (lo.size() != hi.size() || v.size() != lo.size() || center.size() != lo.size()) {
    throw ConstructorError("box.lo, box.hi, velocity and center need the same length");
  }
  if (cfl > 1.0) throw ConstructorError("cfl must not exceed 1");
  double speed = 0.0;
  for (double c : v) speed = std::max(speed, std::abs(c));
  if (speed == 0.0) throw ConstructorError("velocity must be nonzero");

  Series mass("mass-drift"), l1("l1-vs-characteristics");
  mass.tol = s.nonnegative("tol.mass", 1e-12);
  l1.tol = s.nonnegative("tol.l1", 0.5);
  l1.min_order = s.number("order.min", 0.8);

  RunOutput out{base_report(s), {}, {}};
  for (int level = 0; level < s.levels(); ++level) {
    const double h = h0 * pow2(level);
    BoxGrid g;
    Bump sigma;
    try {
      g = BoxGrid::with_spacing(lo, hi, h);
      sigma = Bump::normalized_on(g, center, radius, sharpness);
    } catch (const Error& e) {
      throw ConstructorError(std::string("evolve fixture: ") + e.what());
    }
    const int steps = static_cast<int>(std::ceil(t_end * speed / (cfl * 0.5 * g.min_spacing())));
    std::vector<double> times(steps + 1);
    for (int i = 0; i <= steps; ++i) times[i] = t_end * i / steps;
    const GridVectorField field = constant_field(g, v);
    const GridDensity rho0(sample(g, [&](std::span<const double> p) { return sigma(p); }));
    std::vector<GridDensity> path;
    try {
      path = transport_evolve(rho0, [&](double) { return field; }, times);
    } catch (const Error& e) {
      mass.fail(h, e.what());
      l1.fail(h, e.what());
      continue;
    }
    const GridDensity& last = path.back();
    mass.add(h, std::abs(integrate(last) - integrate(rho0)));
    std::vector<double> shift(v.size());
    for (std::size_t a = 0; a < v.size(); ++a) shift[a] = v[a] * t_end;
    const GridScalar exact =
        sample(g, [&](std::span<const double> p) { return sigma.shifted(p, shift); });
    GridScalar diff = last.scalar() - exact;
    std::vector<double> abs_values(diff.values().begin(), diff.values().end());
    for (double& x : abs_values) x = std::abs(x);
    l1.add(h, integrate(GridScalar(g, std::move(abs_values))));
    out.report.h = h;
    if (level + 1 == s.levels()) {
      std::ostringstream os;
      write_grid_scalar(os, last.scalar());
      out.artifacts.emplace_back("final_density.txt", os.str());
    }
  }
  out.report.rows.push_back(finish(mass));
  out.report.rows.push_back(finish(l1));
  return out;
}

// ---------------------------------------------------------------------------
// stokes

RunOutput run_stokes(const Scenario& s) {
  s.allow_only({"fixture", "h", "du", "radius", "sharpness", "tol.stokes", "tol.naturality",
                "order.min"});
  FamilyConfig config = read_family(s, {"surface", "planar-translation"});
  config.patch = false;
  if (!s.has("du")) config.du = 2.0 * config.h;
  if (config.fixture == "surface") config.radius = s.positive("radius", 0.4);
  const double min_order = s.number("order.min", 1.9);
  const SpaceForm omega = stokes_form(family_space_dim(config.fixture));
  const SpaceForm d_omega = d_space(omega);

  Series stokes("stokes"), nat("naturality");
  stokes.tol = s.nonnegative("tol.stokes", 0.1);
  stokes.min_order = min_order;
  nat.tol = s.nonnegative("tol.naturality", 0.5);
  nat.min_order = min_order;

  RunOutput out{base_report(s), {}, {}};
  std::ostringstream sides;
  for (int level = 0; level < s.levels(); ++level) {
    const FamilyConfig ls = at_level(config, level);
    const NonpureMap f = build_family(ls);
    std::vector<ParamForm> pb;
    try {
      pb = pullback(f, {omega, d_omega});
    } catch (const Error& e) {
      stokes.fail(ls.h, e.what());
      nat.fail(ls.h, e.what());
      continue;
    }
    const double lhs = integrate_box(pb[1]);
    const double rhs = integrate_boundary(pb[0]);
    stokes.add(ls.h, std::abs(lhs - rhs));
    sides.str("");
    sides << "lhs " << format_double(lhs) << " rhs " << format_double(rhs);
    const ParamForm d_pb = d_param(pb[0]);
    double worst = 0.0;
    const ParamBox& params = f.params();
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (!params.interior(k)) continue;
      for (std::size_t i = 0; i < d_pb.indices().size(); ++i) {
        worst = std::max(worst, std::abs(d_pb.at(i, k) - pb[1].at(i, k)));
      }
    }
    nat.add(params.size() > 0 ? ls.h : 0.0, worst);
    out.report.h = ls.h;
    out.report.du = ls.du;
  }
  stokes.note = sides.str();
  out.report.rows.push_back(finish(stokes));
  out.report.rows.push_back(finish(nat));
  return out;
}

// ---------------------------------------------------------------------------
// nc-stokes

RunOutput run_nc_stokes(const Scenario& s) {
  s.allow_only({"n", "m", "generators", "seed", "du", "tol.stokes", "tol.naturality",
                "tol.continuity", "tol.compatibility", "order.min"});
  const std::string gens = s.choice("generators", "pauli", {"pauli", "random"});
  const int n = s.integer("n", 2, kMinMatrixSize, kMaxMatrixSize);
  const int m = s.integer("m", 2, 1, 3);
  const std::uint64_t seed = gens == "random" ? s.seed() : 0;
  const double du0 = s.positive("du", m == 3 ? 0.125 : 0.1);
  const double min_order = s.number("order.min", 1.9);
  const NcFixture fx = build_nc_fixture(gens, n, m, seed);
  const NcForm omega = nc_stokes_form(fx.c, m);

  Series stokes("nc-stokes"), nat("nc-naturality"), cont("nc-continuity"),
      compat{"nc-compatibility"};
  stokes.tol = s.nonnegative("tol.stokes", 0.05);
  nat.tol = s.nonnegative("tol.naturality", 0.05);
  cont.tol = s.nonnegative("tol.continuity", 0.05);
  compat.tol = s.nonnegative("tol.compatibility", 0.05);
  // One parameter makes the discrete Stokes identity exact by telescoping.
  if (m >= 2) stokes.min_order = min_order;
  nat.min_order = cont.min_order = compat.min_order = min_order;

  RunOutput out{base_report(s), {}, {}};
  std::ostringstream sides;
  for (int level = 0; level < s.levels(); ++level) {
    const double du = du0 * pow2(level);
    NcNonpureMap f = [&] {
      try {
        return make_conjugation_family(fx.generators, fx.rho0, unit_param_box(m, du));
      } catch (const Error& e) {
        throw ConstructorError(std::string("conjugation family: ") + e.what());
      }
    }();
    attempt(stokes, du, [&] {
      const NcStokesResult r = nc_stokes_residual(f, omega);
      sides.str("");
      sides << "lhs (" << format_double(r.lhs.real()) << ", " << format_double(r.lhs.imag())
            << ") rhs (" << format_double(r.rhs.real()) << ", " << format_double(r.rhs.imag())
            << ")";
      return r.diff;
    });
    attempt(nat, du, [&] { return nc_naturality_residual(f, omega).max_abs; });
    attempt(cont, du, [&] {
      double worst = 0.0;
      for (int j = 0; j < m; ++j) worst = std::max(worst, nc_continuity_residual(f, j).max_abs);
      return worst;
    });
    if (m >= 2) {
      attempt(compat, du, [&] {
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
          for (int j = i + 1; j < m; ++j) {
            worst = std::max(worst, nc_compatibility_residual(f, i, j).max_abs);
          }
        }
        return worst;
      });
    }
    out.report.du = du;
  }
  stokes.note = sides.str();
  for (const Series* row : {&stokes, &nat, &cont}) out.report.rows.push_back(finish(*row));
  if (m >= 2) out.report.rows.push_back(finish(compat));
  return out;
}

// ---------------------------------------------------------------------------
// metric

RunOutput run_metric(const Scenario& s) {
  s.allow_only({"density.a", "density.b", "expect", "tol.metric", "lp.bins", "tol.lp"});
  s.require("density.a");
  s.require("density.b");
  GridDensity a = [&] {
    try {
      return read_density_file(s.path("density.a"));
    } catch (const Error& e) {
      throw ConstructorError(std::string("density.a: ") + e.what());
    }
  }();
  GridDensity b = [&] {
    try {
      return read_density_file(s.path("density.b"));
    } catch (const Error& e) {
      throw ConstructorError(std::string("density.b: ") + e.what());
    }
  }();
  if (a.grid() != b.grid() || a.grid().dim() != 1) {
    throw ConstructorError("metric needs two densities on the same 1-D grid");
  }
  RunOutput out{base_report(s), {}, {}};
  out.report.h = a.grid().h(0);
  const double d = w1_1d(a, b);
  out.stdout_extra = "distance " + format_double(d) + "\n";

  Row w1;

  w1.check = "w1";
  w1.residual = d;
  out.report.rows.push_back(w1);
  if (auto expect = s.optional_number("expect")) {
    Row e;
    e.check = "w1-expected";
    e.residual = std::abs(d - *expect);
    e.tol = s.nonnegative("tol.metric", 1e-9);
    judge(e);
    out.report.rows.push_back(e);
  }
  if (s.has("lp.bins")) {
    const int bins = s.integer("lp.bins", 32, 1, static_cast<int>(kMaxLpAtoms));
    Row lp;
    lp.check = "w1-lp-agreement";
    lp.tol = s.nonnegative("tol.lp", 2.0 * a.grid().h(0));
    try {
      lp.residual = std::abs(d - w1_lp(discretize(a, bins), discretize(b, bins)));
      judge(lp);
    } catch (const Error& e) {
      lp.residual = NAN;
      lp.pass = false;
      lp.note = e.what();
    }
    out.report.rows.push_back(lp);
  }
  return out;
}

// ---------------------------------------------------------------------------
// identity-suite

/// Random polynomial vector field of total degree <= 2 in two variables.
VectorPointFn random_planar_field(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::array<std::array<double, 6>, 2> c{};
  for (auto& row : c) {
    for (double& x : row) x = d(rng);
  }
  return [c](std::span<const double> p, std::span<double> out) {
    const double x = p[0], y = p[1];
    const double mono[6] = {1.0, x, y, x * x, x * y, y * y};
    for (int a = 0; a < 2; ++a) {
      double s = 0.0;
      for (int i = 0; i < 6; ++i) s += c[a][i] * mono[i];
      out[a] = s;
    }
  };
}

Matrix random_matrix(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = Complex(d(rng), d(rng));
  }
  return a;
}

RunOutput run_identity_suite(const Scenario& s) {
  s.allow_only({"seed", "count", "h", "tol.identity", "tol.trace", "tol.ce", "order.min"});
  const std::uint64_t seed = s.seed();
  const int count = s.integer("count", 5, 1, 64);
  const double h0 = s.positive("h", 0.05);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  struct Fixture {
    std::vector<double> center;
    double radius;
    VectorPointFn v, w;
  };
  std::vector<Fixture> fixtures;
  for (int i = 0; i < count; ++i) {
    Fixture f{{0.2 * unit(rng), 0.2 * unit(rng)}, 0.8 + 0.2 * unit(rng), random_planar_field(rng),
              random_planar_field(rng)};
    fixtures.push_back(std::move(f));
  }

  Series ident("divergence-identity");
  ident.tol = s.nonnegative("tol.identity", 0.5);
  ident.min_order = s.number("order.min", 1.9);
  RunOutput out{base_report(s), {}, {}};
  for (int level = 0; level < s.levels(); ++level) {
    const double h = h0 * pow2(level);
    const BoxGrid g = BoxGrid::with_spacing({-1.5, -1.5}, {1.5, 1.5}, h);
    attempt(ident, h, [&] {
      double worst = 0.0;
      for (const Fixture& f : fixtures) {
        const GridDensity rho = make_bump(g, f.center, f.radius, 6.0);
        worst = std::max(worst, divergence_identity_residual(rho, sample_field(g, f.v),
                                                             sample_field(g, f.w))
                                    .max_abs);
      }
      return worst;
    });
    out.report.h = h;
  }
  out.report.rows.push_back(finish(ident));

  Row tr;

  tr.check = "trace-commutator";
  tr.tol = s.nonnegative("tol.trace", 1e-12);
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 2;
    const Matrix a = random_matrix(n, rng), b = random_matrix(n, rng);
    tr.residual = std::max(tr.residual, std::abs(trace(commutator(a, b))));
  }
  judge(tr);
  out.report.rows.push_back(tr);

  Row ce;

  ce.check = "ce-d-squared";
  ce.tol = s.nonnegative("tol.ce", 1e-11);
  const Matrix a = random_matrix(3, rng), b = random_matrix(3, rng), c = random_matrix(3, rng);
  const std::vector<NcForm> forms{
      NcForm::constant(a),
      NcForm(1, [a, b](const std::vector<Matrix>& x) { return Matrix(a * x[0] * b - b * x[0] * a); }),
      NcForm(2, [a, c](const std::vector<Matrix>& x) {
        return Matrix(a * x[0] * c * x[1] - a * x[1] * c * x[0]);
      })};
  for (const NcForm& w : forms) {
    const NcForm dd = ce_differential(ce_differential(w));
    for (int t = 0; t < 10; ++t) {
      std::vector<Matrix> args;
      for (int i = 0; i < dd.degree(); ++i) args.push_back(random_matrix(3, rng));
      ce.residual = std::max(ce.residual, dd(args).norm());
    }
  }
  judge(ce);
  out.report.rows.push_back(ce);
  return out;
}

}  // namespace

RunOutput run_scenario(const Scenario& s) {
  switch (s.kind()) {
    case Kind::kValidate:
      return run_validate(s);
    case Kind::kEvolve:
      return run_evolve(s);
    case Kind::kStokes:
      return run_stokes(s);
    case Kind::kNcStokes:
      return run_nc_stokes(s);
    case Kind::kMetric:
      return run_metric(s);
    case Kind::kIdentitySuite:
      return run_identity_suite(s);
  }
  throw ParseError("unknown kind");
}

int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  RunOutput result;
  try {
    Scenario s = Scenario::load(options.scenario_path);
    if (s.kind() != options.command) {
      throw ParseError("scenario kind '" + std::string(kind_name(s.kind())) +
                       "' does not match command '" + std::string(kind_name(options.command)) +
                       "'");
    }
    if (options.levels) s.set_levels(*options.levels);
    result = run_scenario(s);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ConstructorError& e) {
    err << "constructor error: " << e.what() << "\n";
    return kExitConstructor;
  } catch (const Error& e) {
    err << "constructor error: " << e.what() << "\n";
    return kExitConstructor;
  }

  const std::string text = to_text(result.report);
  out << text << result.stdout_extra;
  if (!options.out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    auto write = [&](const std::string& name, const std::string& content) {
      std::ofstream f(fs::path(options.out_dir) / name, std::ios::binary);
      f << content;
      if (!f) err << "cannot write " << (fs::path(options.out_dir) / name).string() << "\n";
    };
    write("report.txt", text);
    write("report.jsonl", to_jsonl(result.report));
    for (const auto& [name, content] : result.artifacts) write(name, content);
  }
  return result.report.pass() ? kExitPass : kExitCheckFail;
}

}  // namespace nonpure::cli
