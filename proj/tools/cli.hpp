#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "latticevar/latticevar.h"

namespace latticevar::cli {

enum ExitCode : int {
  kOk = 0,
  kMethodError = 1,
  kConfigError = 2,
  kIoError = 3,
  kSchemaError = 4,
};

class CliError : public std::runtime_error {
 public:
  CliError(ExitCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

enum class Method { ed, mf, coherent, gaussian };
const char* method_name(Method method);

/// Dimensionless couplings mu/U, 2J/U, 2V/U, eps/U.
struct Ratios {
  double mu = 0.0;
  double two_j = 0.0;
  double two_v = 0.0;
  double eps = 0.0;
};

/// Grid axis over one of mu/U, 2J/U, 2V/U, eps/U or nu = (mu+eps)/2J.
struct Axis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int steps = 1;
  double at(int index) const;
};

struct BoundarySpec {
  Axis sweep;
  Axis bisect;  // steps unused
  double tol = 1e-4;
  std::string classifier = "density_wave";  // or "superfluid"
};

struct FssSpec {
  std::vector<int> sizes;
  Axis axis;
  double zero_tol = 1e-6;
};

struct Config {
  Method method = Method::mf;
  Ratios params;
  int sites = 4;
  int n_max = 3;
  std::optional<Axis> x;
  std::optional<Axis> y;
  std::optional<BoundarySpec> boundary;
  std::optional<FssSpec> fss;
  lv_mf_options mf{};
  lv_coherent_options coherent{};
  lv_gaussian_options gaussian{};
  lv_ed_options ed{};
  std::uint64_t seed = 0;
  int workers = 0;  // 0 when unset
  std::string output;
};

/// Parses a JSON document. Throws CliError(kConfigError) whose message names
/// the offending line.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

/// Sets one named axis on the ratios; nu is applied after the others.
Ratios apply_axes(Ratios base, const std::vector<std::pair<std::string, double>>& values);

std::uint64_t point_seed(std::uint64_t master, std::uint64_t index);

struct PointRow {
  lv_point_result result{};
  lv_status status = LV_OK;
};

PointRow evaluate_point(const Config& config, const Ratios& ratios, int sites,
                        std::uint64_t seed, bool binder = false);

/// Runs fn(i) for i in [0, n) on `workers` threads; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, int workers, const std::function<T(std::size_t)>& fn);

std::string csv_number(double value);

/// Single point report (human readable) plus a one-row scan CSV.
struct SolveOutput {
  std::string report;
  std::string csv;
  bool ok = true;
};
SolveOutput run_solve(const Config& config);

/// Scan CSV text; the second member counts rows that carry an error.
std::pair<std::string, int> run_scan(const Config& config);
std::pair<std::string, int> run_boundary(const Config& config);

/// Binder values of a size-L system along the fss axis.
using CurveProvider = std::function<std::vector<double>(int sites, const std::vector<double>& xs)>;
CurveProvider default_curve_provider(const Config& config);

struct FssOutput {
  std::string csv;
  std::vector<std::pair<int, double>> points;
  double mu_inf = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double rms = 0.0;
};
FssOutput run_fss(const Config& config, const CurveProvider& provider);

struct PlotOptions {
  std::string kind;    // heatmap | lines | empty for automatic
  std::string column;  // column to colour or plot; empty for the default
};
/// Throws CliError(kSchemaError) on anything this tool did not emit.
std::string render_plot(const std::string& csv_text, const PlotOptions& options);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, char** argv);

}  // namespace latticevar::cli

#include "cli_parallel.hpp"
