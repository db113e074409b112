#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

namespace latticevar::cli {

namespace {

struct Flags {
  std::string config;
  std::string out;
  int workers = 0;
  std::optional<std::uint64_t> seed;
};

void add_run_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration")->required();
  sub->add_option("--out", f.out, "output path (default: config output, else stdout)");
  sub->add_option("--workers", f.workers, "worker threads")->check(CLI::Range(1, 4096));
  sub->add_option("--seed", f.seed, "master seed");
}

Config resolve(const Flags& f) {
  Config c = load_config(f.config);
  if (f.workers > 0) {
    c.workers = f.workers;
  } else if (c.workers <= 0) {
    c.workers = 1;
    if (const char* env = std::getenv("LATTICEVAR_WORKERS")) {
      try {
        const int n = std::stoi(env);
        if (n >= 1 && n <= 4096) c.workers = n;
      } catch (const std::exception&) {
        std::cerr << "warning: ignoring LATTICEVAR_WORKERS=" << env << "\n";
      }
    }
  }
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.output = f.out;
  return c;
}

void emit(const Config& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
  } else {
    write_file(c.output, text);
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Variational and exact ground states of an extended Bose-Hubbard chain with pair injection",
               "latticevar"};
  app.require_subcommand(1);
  Flags solve_f, scan_f, boundary_f, fss_f;
  auto* solve = app.add_subcommand("solve", "single point");
  auto* scan = app.add_subcommand("scan", "one or two axis grid");
  auto* boundary = app.add_subcommand("boundary", "phase boundary by bisection");
  auto* fss = app.add_subcommand("fss", "finite-size extrapolation of the onset");
  auto* plot = app.add_subcommand("plot", "render a CSV as SVG");
  add_run_flags(solve, solve_f);
  add_run_flags(scan, scan_f);
  add_run_flags(boundary, boundary_f);
  add_run_flags(fss, fss_f);
  std::string plot_in, plot_out;
  PlotOptions plot_options;
  plot->add_option("csv", plot_in, "CSV written by this tool")->required();
  plot->add_option("--out", plot_out, "SVG path (default stdout)");
  plot->add_option("--kind", plot_options.kind, "heatmap or lines")
      ->check(CLI::IsMember({"heatmap", "lines"}));
  plot->add_option("--column", plot_options.column, "column to draw");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*solve) {
      const Config c = resolve(solve_f);
      const SolveOutput out = run_solve(c);
      std::cout << out.report;
      if (!c.output.empty()) write_file(c.output, out.csv);
      return out.ok ? kOk : kMethodError;
    }
    if (*scan) {
      const Config c = resolve(scan_f);
      const auto [csv, failures] = run_scan(c);
      emit(c, csv);
      if (failures > 0) std::cerr << "warning: " << failures << " grid points failed\n";
      return kOk;
    }
    if (*boundary) {
      const Config c = resolve(boundary_f);
      const auto [csv, failures] = run_boundary(c);
      emit(c, csv);
      if (failures > 0) std::cerr << "warning: " << failures << " sweep points have no boundary\n";
      return kOk;
    }
    if (*fss) {
      const Config c = resolve(fss_f);
      const FssOutput out = run_fss(c, default_curve_provider(c));
      emit(c, out.csv);
      if (!c.output.empty()) {
        for (const auto& [sites, mu_c] : out.points) {
          std::cout << "L=" << sites << " mu_c/U=" << csv_number(mu_c) << "\n";
        }
        std::cout << "mu_c/U(L->inf)=" << csv_number(out.mu_inf) << " beta=" << csv_number(out.beta)
                  << " eta=" << csv_number(out.eta) << " rms=" << csv_number(out.rms) << "\n";
      }
      return kOk;
    }
    const std::string svg = render_plot(read_file(plot_in), plot_options);
    if (plot_out.empty()) {
      std::cout << svg;
    } else {
      write_file(plot_out, svg);
    }
    return kOk;
  } catch (const CliError& e) {
    std::cerr << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMethodError;
  }
}

}  // namespace latticevar::cli
