#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cli.hpp"

namespace latticevar::cli {

namespace {

constexpr const char* kCsvTag = "# latticevar-csv v1\n";
constexpr const char* kScanHeader =
    "x_name,x,y_name,y,energy,phase,phi_o,phi_e,rho_o,rho_e,converged,error\n";
constexpr const char* kBoundaryHeader = "sweep_name,sweep,critical_name,critical,iterations,error\n";

struct ModelHandle {
  lv_model* model = nullptr;
  ~ModelHandle() { lv_model_destroy(model); }
};

std::string scan_row(const std::string& x_name, double x, const std::string& y_name,
                     std::optional<double> y, const PointRow& row) {
  const lv_point_result& r = row.result;
  std::string line = x_name + "," + csv_number(x) + "," + y_name + "," +
                     (y ? csv_number(*y) : std::string()) + ",";
  if (row.status != LV_OK) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    line += csv_number(nan) + ",NA,";
    for (int i = 0; i < 4; ++i) line += csv_number(nan) + ",";
    return line + "0," + lv_status_name(row.status) + "\n";
  }
  line += csv_number(r.energy) + "," + lv_phase_name(r.phase) + ",";
  line += csv_number(std::hypot(r.phi_o_re, r.phi_o_im)) + ",";
  line += csv_number(std::hypot(r.phi_e_re, r.phi_e_im)) + ",";
  line += csv_number(r.rho_o) + "," + csv_number(r.rho_e) + ",";
  line += std::string(r.converged ? "1" : "0") + ",\n";
  return line;
}

int resolved_workers(const Config& config) { return config.workers > 0 ? config.workers : 1; }

// Integer label of a point for the bisection; -1 aborts.
struct BisectContext {
  const Config* config;
  Ratios base;
  std::string axis;
  std::uint64_t seed;
};

int classify_point(double value, void* user) {
  const auto& ctx = *static_cast<BisectContext*>(user);
  const Config& config = *ctx.config;
  const Ratios ratios = apply_axes(ctx.base, {{ctx.axis, value}});
  const bool density_wave = config.boundary->classifier == "density_wave";
  if (config.method == Method::coherent && density_wave) {
    ModelHandle h;
    if (lv_model_create(ratios.mu, ratios.two_j, ratios.two_v, ratios.eps, config.sites,
                        config.n_max, &h.model) != LV_OK) {
      return -1;
    }
    int staggered = 0;
    if (lv_coherent_is_staggered(h.model, &staggered) != LV_OK) return -1;
    return staggered;
  }
  const PointRow row = evaluate_point(config, ratios, config.sites, ctx.seed);
  if (row.status != LV_OK) return -1;
  const int phase = row.result.phase;
  if (density_wave) return phase == LV_PHASE_DW || phase == LV_PHASE_SS ? 1 : 0;
  return phase == LV_PHASE_SF || phase == LV_PHASE_SS ? 1 : 0;
}

std::string format_report(const Config& config, const Ratios& p, const PointRow& row) {
  std::ostringstream out;
  out << "method       " << method_name(config.method) << "\n";
  out << "mu/U         " << csv_number(p.mu) << "\n";
  out << "2J/U         " << csv_number(p.two_j) << "\n";
  out << "2V/U         " << csv_number(p.two_v) << "\n";
  out << "eps/U        " << csv_number(p.eps) << "\n";
  out << "L            " << config.sites << "\n";
  if (row.status != LV_OK) {
    out << "status       " << lv_status_name(row.status) << "\n";
    return out.str();
  }
  const lv_point_result& r = row.result;
  out << "energy       " << csv_number(r.energy) << "\n";
  out << "energy/site  " << csv_number(r.energy / config.sites) << "\n";
  out << "phase        " << lv_phase_name(r.phase) << "\n";
  out << "phi_o        " << csv_number(r.phi_o_re) << " " << csv_number(r.phi_o_im) << "i\n";
  out << "phi_e        " << csv_number(r.phi_e_re) << " " << csv_number(r.phi_e_im) << "i\n";
  out << "rho_o        " << csv_number(r.rho_o) << "\n";
  out << "rho_e        " << csv_number(r.rho_e) << "\n";
  out << "converged    " << (r.converged ? "yes" : "no") << "\n";
  out << "iterations   " << r.iterations << "\n";
  out << "residual     " << csv_number(r.residual) << "\n";
  if (config.method == Method::gaussian) {
    out << "purity       " << csv_number(r.purity_defect) << "\n";
  }
  if (!std::isnan(r.binder)) out << "binder       " << csv_number(r.binder) << "\n";
  return out.str();
}

}  // namespace

std::string csv_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Ratios apply_axes(Ratios base, const std::vector<std::pair<std::string, double>>& values) {
  std::optional<double> nu;
  for (const auto& [name, value] : values) {
    if (name == "mu/U") {
      base.mu = value;
    } else if (name == "2J/U") {
      base.two_j = value;
    } else if (name == "2V/U") {
      base.two_v = value;
    } else if (name == "eps/U") {
      base.eps = value;
    } else if (name == "nu") {
      nu = value;
    } else {
      throw CliError(kConfigError, "unknown axis " + name);
    }
  }
  if (nu) base.mu = *nu * base.two_j - base.eps;
  return base;
}

std::uint64_t point_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PointRow evaluate_point(const Config& config, const Ratios& ratios, int sites, std::uint64_t seed,
                        bool binder) {
  PointRow row;
  ModelHandle h;
  row.status = lv_model_create(ratios.mu, ratios.two_j, ratios.two_v, ratios.eps, sites,
                               config.n_max, &h.model);
  if (row.status != LV_OK) return row;
  switch (config.method) {
    case Method::mf:
      row.status = lv_solve_mf(h.model, &config.mf, seed, &row.result);
      break;
    case Method::coherent:
      row.status = lv_solve_coherent(h.model, &config.coherent, seed, &row.result);
      break;
    case Method::gaussian: {
      lv_gaussian_options o = config.gaussian;
      o.compute_binder = binder ? 1 : o.compute_binder;
      row.status = lv_solve_gaussian(h.model, &o, seed, &row.result);
      break;
    }
    case Method::ed:
      row.status = lv_solve_ed(h.model, &config.ed, &row.result);
      break;
  }
  return row;
}

SolveOutput run_solve(const Config& config) {
  if (config.x || config.boundary || config.fss) {
    throw CliError(kConfigError, "config error: solve takes no scan, boundary or fss block");
  }
  const PointRow row = evaluate_point(config, config.params, config.sites, config.seed);
  SolveOutput out;
  out.ok = row.status == LV_OK;
  out.report = format_report(config, config.params, row);
  if (!out.ok) out.report += std::string("error        ") + lv_last_error() + "\n";
  out.csv = std::string(kCsvTag) + kScanHeader +
            scan_row("mu/U", config.params.mu, "2J/U", config.params.two_j, row);
  return out;
}

std::pair<std::string, int> run_scan(const Config& config) {
  if (!config.x) throw CliError(kConfigError, "config error: scan needs a scan block");
  const Axis& x = *config.x;
  const int ny = config.y ? config.y->steps : 1;
  const std::size_t count = static_cast<std::size_t>(x.steps) * static_cast<std::size_t>(ny);
  const auto rows = parallel_map<PointRow>(count, resolved_workers(config), [&](std::size_t i) {
    const int ix = static_cast<int>(i / static_cast<std::size_t>(ny));
    const int iy = static_cast<int>(i % static_cast<std::size_t>(ny));
    std::vector<std::pair<std::string, double>> values{{x.name, x.at(ix)}};
    if (config.y) values.emplace_back(config.y->name, config.y->at(iy));
    return evaluate_point(config, apply_axes(config.params, values), config.sites,
                          point_seed(config.seed, i));
  });
  std::string csv = std::string(kCsvTag) + kScanHeader;
  int failures = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const int ix = static_cast<int>(i / static_cast<std::size_t>(ny));
    const int iy = static_cast<int>(i % static_cast<std::size_t>(ny));
    std::optional<double> y;
    if (config.y) y = config.y->at(iy);
    csv += scan_row(x.name, x.at(ix), config.y ? config.y->name : "", y, rows[i]);
    if (rows[i].status != LV_OK) ++failures;
  }
  return {csv, failures};
}

std::pair<std::string, int> run_boundary(const Config& config) {
  if (!config.boundary) throw CliError(kConfigError, "config error: boundary needs a boundary block");
  const BoundarySpec& spec = *config.boundary;
  struct Row {
    double critical = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    lv_status status = LV_OK;
  };
  const auto n = static_cast<std::size_t>(spec.sweep.steps);
  const auto rows = parallel_map<Row>(n, resolved_workers(config), [&](std::size_t i) {
    BisectContext ctx{&config,
                      apply_axes(config.params, {{spec.sweep.name, spec.sweep.at(static_cast<int>(i))}}),
                      spec.bisect.name, point_seed(config.seed, i)};
    Row row;
    row.status = lv_boundary_bisect(classify_point, &ctx, spec.bisect.min, spec.bisect.max,
                                    spec.tol, &row.critical, &row.iterations);
    if (row.status != LV_OK) row.critical = std::numeric_limits<double>::quiet_NaN();
    return row;
  });
  std::string csv = std::string(kCsvTag) + kBoundaryHeader;
  int failures = 0;
  for (std::size_t i = 0; i < n; ++i) {
    csv += spec.sweep.name + "," + csv_number(spec.sweep.at(static_cast<int>(i))) + "," +
           spec.bisect.name + "," + csv_number(rows[i].critical) + "," +
           std::to_string(rows[i].iterations) + "," +
           (rows[i].status == LV_OK ? "" : lv_status_name(rows[i].status)) + "\n";
    if (rows[i].status != LV_OK) ++failures;
  }
  return {csv, failures};
}

CurveProvider default_curve_provider(const Config& config) {
  return [config](int sites, const std::vector<double>& xs) {
    const auto rows = parallel_map<PointRow>(xs.size(), resolved_workers(config), [&](std::size_t i) {
      const Ratios r = apply_axes(config.params, {{config.fss->axis.name, xs[i]}});
      return evaluate_point(config, r, sites,
                            point_seed(config.seed, static_cast<std::uint64_t>(sites) * 1000003ULL + i),
                            true);
    });
    std::vector<double> ys;
    ys.reserve(xs.size());
    for (const auto& row : rows) {
      if (row.status != LV_OK) {
        throw CliError(kMethodError, std::string("solve failed during fss: ") +
                                         lv_status_name(row.status));
      }
      // Binder undefined where the staggered moments vanish; the curve is zero there.
      ys.push_back(std::isnan(row.result.binder) ? 0.0 : row.result.binder);
    }
    return ys;
  };
}

FssOutput run_fss(const Config& config, const CurveProvider& provider) {
  if (!config.fss) throw CliError(kConfigError, "config error: fss needs an fss block");
  const FssSpec& spec = *config.fss;
  if (spec.sizes.size() < 2) {
    throw CliError(kConfigError, "config error: fss needs at least two sizes");
  }
  std::vector<double> xs;
  for (int i = 0; i < spec.axis.steps; ++i) xs.push_back(spec.axis.at(i));
  FssOutput out;
  std::vector<double> sizes, mus;
  for (int sites : spec.sizes) {
    const std::vector<double> ys = provider(sites, xs);
    double mu_c = 0.0;
    const lv_status s = lv_zero_threshold(xs.data(), ys.data(), xs.size(), spec.zero_tol, &mu_c);
    if (s != LV_OK) {
      throw CliError(kMethodError, "L=" + std::to_string(sites) + ": " + lv_last_error());
    }
    out.points.emplace_back(sites, mu_c);
    sizes.push_back(sites);
    mus.push_back(mu_c);
  }
  const lv_status s = lv_fss_fit(sizes.data(), mus.data(), sizes.size(), &out.mu_inf, &out.beta,
                                 &out.eta, &out.rms);
  if (s != LV_OK) throw CliError(kMethodError, std::string("fit failed: ") + lv_last_error());
  out.csv = std::string(kCsvTag) + "L,mu_c\n";
  for (const auto& [sites, mu_c] : out.points) {
    out.csv += std::to_string(sites) + "," + csv_number(mu_c) + "\n";
  }
  out.csv += "# fit mu_inf=" + csv_number(out.mu_inf) + " beta=" + csv_number(out.beta) +
             " eta=" + csv_number(out.eta) + " rms=" + csv_number(out.rms) + "\n";
  return out;
}

}  // namespace latticevar::cli
