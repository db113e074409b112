#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace latticevar::cli {

namespace {

using json = nlohmann::json;

const std::set<std::string> kAxisNames = {"mu/U", "2J/U", "2V/U", "eps/U", "nu"};

// Resolves a key path to a 1-based line by walking the raw text.
class Locator {
 public:
  explicit Locator(const std::string& text) : text_(text) {}

  int line(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      const std::size_t found = text_.find('"' + key + '"', pos);
      if (found == std::string::npos) break;
      pos = found + 1;
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + std::min(pos, text_.size()), '\n'));
  }

 private:
  const std::string& text_;
};

class Reader {
 public:
  explicit Reader(const std::string& text) : locator_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::string dotted;
    for (const auto& p : path) dotted += (dotted.empty() ? "" : ".") + p;
    throw CliError(kConfigError, "config error: line " + std::to_string(locator_.line(path)) +
                                     ": " + (dotted.empty() ? "" : dotted + ": ") + what);
  }

  void only_keys(const json& obj, const std::vector<std::string>& path,
                 const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.contains(key)) {
        auto p = path;
        p.push_back(key);
        fail(p, "unknown key");
      }
    }
  }

  double number(const json& obj, const std::vector<std::string>& path, const std::string& key,
                double fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    auto p = path;
    p.push_back(key);
    if (!v.is_number()) fail(p, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(p, "expected a finite number");
    return d;
  }

  long integer(const json& obj, const std::vector<std::string>& path, const std::string& key,
               long fallback, long lo, long hi) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    auto p = path;
    p.push_back(key);
    if (!v.is_number_integer()) fail(p, "expected an integer");
    const long n = v.get<long>();
    if (n < lo || n > hi) {
      fail(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return n;
  }

  std::string string(const json& obj, const std::vector<std::string>& path, const std::string& key,
                     const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    auto p = path;
    p.push_back(key);
    if (!v.is_string()) fail(p, "expected a string");
    return v.get<std::string>();
  }

  Axis axis(const json& obj, const std::vector<std::string>& path, bool needs_steps) const {
    only_keys(obj, path, {"name", "min", "max", "steps"});
    Axis a;
    a.name = string(obj, path, "name", "");
    if (!kAxisNames.contains(a.name)) {
      auto p = path;
      p.push_back("name");
      fail(p, "axis must be one of mu/U, 2J/U, 2V/U, eps/U, nu");
    }
    for (const char* k : {"min", "max"}) {
      if (!obj.contains(k)) fail(path, std::string("missing ") + k);
    }
    a.min = number(obj, path, "min", 0.0);
    a.max = number(obj, path, "max", 0.0);
    if (needs_steps) {
      if (!obj.contains("steps")) fail(path, "missing steps");
      a.steps = static_cast<int>(integer(obj, path, "steps", 1, 1, 1000000));
      if (a.steps >= 2 && !(a.min < a.max)) fail(path, "min must be below max");
      if (a.steps == 1 && a.min > a.max) fail(path, "min must not exceed max");
    } else {
      if (obj.contains("steps")) {
        auto p = path;
        p.push_back("steps");
        fail(p, "unknown key");
      }
      if (!(a.min < a.max)) fail(path, "min must be below max");
    }
    return a;
  }

 private:
  Locator locator_;
};

Method parse_method(const Reader& r, const std::string& name) {
  if (name == "ed") return Method::ed;
  if (name == "mf") return Method::mf;
  if (name == "coherent") return Method::coherent;
  if (name == "gaussian") return Method::gaussian;
  r.fail({"method"}, "method must be ed, mf, coherent or gaussian");
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::ed: return "ed";
    case Method::mf: return "mf";
    case Method::coherent: return "coherent";
    case Method::gaussian: return "gaussian";
  }
  return "?";
}

double Axis::at(int index) const {
  if (steps <= 1) return min;
  if (index == steps - 1) return max;
  return min + (max - min) * static_cast<double>(index) / static_cast<double>(steps - 1);
}

Config parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
    std::string what = e.what();
    const auto cut = what.find("syntax error");
    if (cut != std::string::npos) what = what.substr(cut);
    throw CliError(kConfigError, "config error: line " + std::to_string(line) + ": " + what);
  }
  const Reader r(text);
  r.only_keys(doc, {}, {"method", "params", "lattice", "scan", "boundary", "fss", "mf", "coherent",
                        "gaussian", "ed", "seed", "workers", "output"});

  Config c;
  lv_mf_options_default(&c.mf);
  lv_coherent_options_default(&c.coherent);
  lv_gaussian_options_default(&c.gaussian);
  lv_ed_options_default(&c.ed);

  if (!doc.contains("method")) r.fail({}, "missing method");
  c.method = parse_method(r, r.string(doc, {}, "method", ""));

  if (doc.contains("params")) {
    const auto& p = doc.at("params");
    r.only_keys(p, {"params"}, {"mu/U", "2J/U", "2V/U", "eps/U"});
    c.params.mu = r.number(p, {"params"}, "mu/U", 0.0);
    c.params.two_j = r.number(p, {"params"}, "2J/U", 0.0);
    c.params.two_v = r.number(p, {"params"}, "2V/U", 0.0);
    c.params.eps = r.number(p, {"params"}, "eps/U", 0.0);
    if (c.params.two_j < 0) r.fail({"params", "2J/U"}, "must be nonnegative");
    if (c.params.two_v < 0) r.fail({"params", "2V/U"}, "must be nonnegative");
    if (c.params.eps < 0) r.fail({"params", "eps/U"}, "must be nonnegative");
  }
  if (doc.contains("lattice")) {
    const auto& l = doc.at("lattice");
    r.only_keys(l, {"lattice"}, {"L", "n_max"});
    c.sites = static_cast<int>(r.integer(l, {"lattice"}, "L", c.sites, 4, 1 << 20));
    if (c.sites % 2 != 0) r.fail({"lattice", "L"}, "L must be even");
    c.n_max = static_cast<int>(r.integer(l, {"lattice"}, "n_max", c.n_max, 1, 1000));
  }
  if (doc.contains("scan")) {
    const auto& s = doc.at("scan");
    r.only_keys(s, {"scan"}, {"x", "y"});
    if (!s.contains("x")) r.fail({"scan"}, "missing x axis");
    c.x = r.axis(s.at("x"), {"scan", "x"}, true);
    if (s.contains("y")) {
      c.y = r.axis(s.at("y"), {"scan", "y"}, true);
      if (c.y->name == c.x->name) r.fail({"scan", "y", "name"}, "axes must differ");
    }
  }
  if (doc.contains("boundary")) {
    const auto& b = doc.at("boundary");
    const std::vector<std::string> path{"boundary"};
    r.only_keys(b, path, {"sweep", "bisect", "tol", "classifier"});
    BoundarySpec spec;
    if (!b.contains("sweep") || !b.contains("bisect")) r.fail(path, "needs sweep and bisect axes");
    spec.sweep = r.axis(b.at("sweep"), {"boundary", "sweep"}, true);
    spec.bisect = r.axis(b.at("bisect"), {"boundary", "bisect"}, false);
    if (spec.sweep.name == spec.bisect.name) r.fail({"boundary", "bisect", "name"}, "axes must differ");
    spec.tol = r.number(b, path, "tol", spec.tol);
    if (!(spec.tol > 0)) r.fail({"boundary", "tol"}, "must be positive");
    spec.classifier = r.string(b, path, "classifier", spec.classifier);
    if (spec.classifier != "density_wave" && spec.classifier != "superfluid") {
      r.fail({"boundary", "classifier"}, "must be density_wave or superfluid");
    }
    if (c.method == Method::ed) r.fail({"method"}, "boundary traces need mf, coherent or gaussian");
    c.boundary = spec;
  }
  if (doc.contains("fss")) {
    const auto& f = doc.at("fss");
    const std::vector<std::string> path{"fss"};
    r.only_keys(f, path, {"sizes", "axis", "zero_tol"});
    FssSpec spec;
    if (!f.contains("sizes") || !f.at("sizes").is_array()) r.fail(path, "sizes must be an array");
    for (const auto& v : f.at("sizes")) {
      if (!v.is_number_integer() || v.get<long>() < 2 || v.get<long>() % 2 != 0) {
        r.fail({"fss", "sizes"}, "sizes must be even integers >= 2");
      }
      spec.sizes.push_back(v.get<int>());
    }
    if (spec.sizes.empty()) r.fail({"fss", "sizes"}, "at least one size");
    if (!f.contains("axis")) r.fail(path, "missing axis");
    spec.axis = r.axis(f.at("axis"), {"fss", "axis"}, true);
    if (spec.axis.steps < 4) r.fail({"fss", "axis", "steps"}, "at least 4 points per curve");
    spec.zero_tol = r.number(f, path, "zero_tol", spec.zero_tol);
    if (c.method != Method::gaussian && c.method != Method::ed) {
      r.fail({"method"}, "finite-size studies need gaussian or ed");
    }
    c.fss = spec;
  }
  if (doc.contains("mf")) {
    const auto& m = doc.at("mf");
    const std::vector<std::string> path{"mf"};
    r.only_keys(m, path, {"n_max", "mixing", "tol_energy", "tol_param", "max_iterations", "n_random"});
    c.mf.n_max = static_cast<int>(r.integer(m, path, "n_max", c.mf.n_max, 1, 1000));
    c.mf.mixing = r.number(m, path, "mixing", c.mf.mixing);
    c.mf.tol_energy = r.number(m, path, "tol_energy", c.mf.tol_energy);
    c.mf.tol_param = r.number(m, path, "tol_param", c.mf.tol_param);
    c.mf.max_iterations = static_cast<int>(r.integer(m, path, "max_iterations", c.mf.max_iterations, 1, 100000000));
    c.mf.n_random = static_cast<int>(r.integer(m, path, "n_random", c.mf.n_random, 0, 100000));
    if (!(c.mf.mixing > 0 && c.mf.mixing <= 1)) r.fail({"mf", "mixing"}, "must lie in (0, 1]");
  }
  if (doc.contains("coherent")) {
    const auto& m = doc.at("coherent");
    const std::vector<std::string> path{"coherent"};
    r.only_keys(m, path, {"step", "grad_tol", "max_steps", "n_starts"});
    c.coherent.step = r.number(m, path, "step", c.coherent.step);
    c.coherent.grad_tol = r.number(m, path, "grad_tol", c.coherent.grad_tol);
    c.coherent.max_steps = r.integer(m, path, "max_steps", c.coherent.max_steps, 0, 1L << 40);
    c.coherent.n_starts = static_cast<int>(r.integer(m, path, "n_starts", c.coherent.n_starts, 0, 100000));
  }
  if (doc.contains("gaussian")) {
    const auto& m = doc.at("gaussian");
    const std::vector<std::string> path{"gaussian"};
    r.only_keys(m, path, {"step", "velocity_tol", "max_steps", "purity_tol", "n_starts"});
    c.gaussian.step = r.number(m, path, "step", c.gaussian.step);
    c.gaussian.velocity_tol = r.number(m, path, "velocity_tol", c.gaussian.velocity_tol);
    c.gaussian.max_steps = r.integer(m, path, "max_steps", c.gaussian.max_steps, 0, 1L << 40);
    c.gaussian.purity_tol = r.number(m, path, "purity_tol", c.gaussian.purity_tol);
    c.gaussian.n_starts = static_cast<int>(r.integer(m, path, "n_starts", c.gaussian.n_starts, 0, 100000));
  }
  if (doc.contains("ed")) {
    const auto& m = doc.at("ed");
    r.only_keys(m, {"ed"}, {"tol"});
    c.ed.tol = r.number(m, {"ed"}, "tol", c.ed.tol);
    if (!(c.ed.tol > 0)) r.fail({"ed", "tol"}, "must be positive");
  }
  if (doc.contains("seed")) {
    const auto& v = doc.at("seed");
    if (!v.is_number_unsigned()) r.fail({"seed"}, "expected a nonnegative integer");
    c.seed = v.get<std::uint64_t>();
  }
  if (doc.contains("workers")) c.workers = static_cast<int>(r.integer(doc, {}, "workers", 1, 1, 4096));
  c.output = r.string(doc, {}, "output", "");

  const int modes = (c.x ? 1 : 0) + (c.boundary ? 1 : 0) + (c.fss ? 1 : 0);
  if (modes > 1) r.fail({}, "scan, boundary and fss are mutually exclusive");
  return c;
}

Config load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kIoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw CliError(kIoError, "cannot read " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError(kIoError, "cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw CliError(kIoError, "cannot write " + path);
}

}  // namespace latticevar::cli
