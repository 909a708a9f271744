#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "bcb/bcb.hpp"
#include "json.hpp"

namespace bcb::cli {

namespace {

using json = nlohmann::ordered_json;

/// A failure that maps straight to an exit code.
struct CliFailure : std::runtime_error {
  CliFailure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

[[noreturn]] void invalid(const std::string& what) { throw CliFailure(kInvalidInput, what); }

// ---- configuration -------------------------------------------------------------

// section.key for every setting that can come from a flag or a config file.
const std::vector<std::pair<std::string, std::string>> kKeys = {
    {"dim", "map.dim"},
    {"tl", "map.tl"},
    {"sl", "map.sl"},
    {"dl", "map.dl"},
    {"tr", "map.tr"},
    {"sr", "map.sr"},
    {"dr", "map.dr"},
    {"matrix-file", "map.matrix_file"},
    {"x0", "orbit.x0"},
    {"transient", "orbit.transient"},
    {"keep", "orbit.keep"},
    {"escape-radius", "orbit.escape_radius"},
    {"tol", "tolerances.tol"},
    {"grid", "sampling.grid"},
    {"param", "sampling.param"},
    {"values", "sampling.values"},
    {"seed", "sampling.seed"},
    {"format", "output.format"},
    {"out", "output.out"},
};

using Settings = std::map<std::string, std::string>;  // keyed by section.key

struct RunConfig {
  std::string command;
  std::optional<PwlMap> map;
  std::optional<BcnfParams> bcnf_params;
  std::optional<Vector> x0;
  OrbitSettings orbit;
  double tol = kSharedMatchTol;
  std::optional<std::string> grid;
  std::optional<std::string> param;
  std::optional<std::string> values;
  std::uint64_t seed = 0;
  std::string format;
  std::optional<std::string> out;
};

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(last[-1]))) --last;
  if (first < last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) invalid(key + ": not a number: '" + text + "'");
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) invalid(key + ": expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

Vector parse_list(const std::string& key, const std::string& text) {
  Vector out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) invalid(key + ": empty list");
  return out;
}

/// "lo:hi:count" → count evenly spaced values (count = 1 gives lo).
Vector parse_range(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) invalid(key + ": expected lo:hi:count, got '" + text + "'");
  const double lo = parse_double(key, parts[0]);
  const double hi = parse_double(key, parts[1]);
  const auto count = parse_count(key, parts[2]);
  if (count == 0) invalid(key + ": count must be positive");
  Vector v(count);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return v;
}

/// Plain text: n, then n rows of A_L, n rows of A_R, one row b, one row c.
PwlMap read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open matrix file '" + path + "'");
  std::vector<Vector> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Vector row;
    std::string tok;
    while (ls >> tok) row.push_back(parse_double("matrix-file", tok));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty() || rows[0].size() != 1) invalid("matrix file: first line must hold n");
  const double nd = rows[0][0];
  if (!(nd >= 1.0) || nd != std::floor(nd)) invalid("matrix file: n must be a positive integer");
  const auto n = static_cast<std::size_t>(nd);
  if (rows.size() != 1 + 2 * n + 2) invalid("matrix file: expected " + std::to_string(2 * n + 2) + " data rows");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].size() != n) invalid("matrix file: row " + std::to_string(i + 1) + " must have n entries");
  const Matrix al = Matrix::from_rows({rows.begin() + 1, rows.begin() + 1 + static_cast<std::ptrdiff_t>(n)});
  const Matrix ar = Matrix::from_rows(
      {rows.begin() + 1 + static_cast<std::ptrdiff_t>(n), rows.begin() + 1 + 2 * static_cast<std::ptrdiff_t>(n)});
  return PwlMap(al, ar, rows[1 + 2 * n], rows[2 + 2 * n]);
}

Settings read_config_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    invalid("config file: " + std::string(e.what()));
  }
  Settings s;
  for (const auto& [section, body] : tree) {
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const bool known =
          std::any_of(kKeys.begin(), kKeys.end(), [&](const auto& k) { return k.second == full; }) ||
          full == "run.command";
      if (!known) invalid("config file: unknown key '" + full + "'");
      s[full] = value.get_value<std::string>();
    }
  }
  return s;
}

void write_config_file(const std::string& path, const std::string& command, const Settings& s) {
  std::ostringstream os;
  os << "# bcbreduce run configuration\n[run]\ncommand = " << command << "\n";
  std::string current;
  for (const auto& [flag, full] : kKeys) {
    const auto it = s.find(full);
    if (it == s.end()) continue;
    const std::string section = full.substr(0, full.find('.'));
    if (section != current) {
      os << "\n[" << section << "]\n";
      current = section;
    }
    os << full.substr(full.find('.') + 1) << " = " << it->second << "\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) invalid("cannot write config dump '" + path + "'");
  f << os.str();
}

RunConfig build_config(const std::string& command, const Settings& s) {
  RunConfig cfg;
  cfg.command = command;
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = s.find(k);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };

  const bool any_bcnf = get("map.dim") || get("map.tl") || get("map.dl") || get("map.tr") || get("map.dr") ||
                        get("map.sl") || get("map.sr");
  const auto matrix_file = get("map.matrix_file");
  if (any_bcnf && matrix_file) invalid("give either BCNF coefficients or --matrix-file, not both");
  if (!any_bcnf && !matrix_file) invalid("no map given: use --dim/--tl/... or --matrix-file");

  if (matrix_file) {
    cfg.map = read_matrix_file(*matrix_file);
  } else {
    BcnfParams p;
    const auto dim = get("map.dim");
    if (!dim) invalid("--dim is required with BCNF coefficients");
    p.dimension = static_cast<int>(parse_count("dim", *dim));
    if (p.dimension != 2 && p.dimension != 3) invalid("--dim must be 2 or 3");
    auto coeff = [&](const char* key, double& dst, bool required) {
      if (auto v = get(std::string("map.") + key)) dst = parse_double(key, *v);
      else if (required) invalid(std::string("missing --") + key);
    };
    coeff("tl", p.left.tau, true);
    coeff("dl", p.left.delta, true);
    coeff("tr", p.right.tau, true);
    coeff("dr", p.right.delta, true);
    coeff("sl", p.left.sigma, p.dimension == 3);
    coeff("sr", p.right.sigma, p.dimension == 3);
    if (p.dimension == 2 && (get("map.sl") || get("map.sr"))) invalid("--sl/--sr only apply with --dim 3");
    cfg.bcnf_params = p;
    cfg.map = bcnf(p);
  }

  if (auto v = get("orbit.x0")) {
    cfg.x0 = parse_list("x0", *v);
    if (cfg.x0->size() != cfg.map->dim()) invalid("--x0 must have " + std::to_string(cfg.map->dim()) + " entries");
  }
  if (auto v = get("orbit.transient")) cfg.orbit.transient = parse_count("transient", *v);
  if (auto v = get("orbit.keep")) cfg.orbit.keep = parse_count("keep", *v);
  if (cfg.orbit.keep < 1) invalid("--keep must be at least 1");
  if (auto v = get("orbit.escape_radius")) cfg.orbit.escape_radius = parse_double("escape-radius", *v);
  if (!(cfg.orbit.escape_radius > 0.0)) invalid("--escape-radius must be positive");
  if (auto v = get("tolerances.tol")) cfg.tol = parse_double("tol", *v);
  if (!(cfg.tol > 0.0)) invalid("--tol must be positive");
  cfg.grid = get("sampling.grid");
  cfg.param = get("sampling.param");
  cfg.values = get("sampling.values");
  if (auto v = get("sampling.seed")) cfg.seed = parse_count("seed", *v);
  const bool json_default = command == "analyze" || command == "restrict";
  cfg.format = get("output.format").value_or(json_default ? "json" : "csv");
  if (cfg.format != "csv" && cfg.format != "json") invalid("--format must be csv or json");
  cfg.out = get("output.out");
  return cfg;
}

// ---- output helpers ----------------------------------------------------------------

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json to_json(const Matrix& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) a.push_back(to_json(m.row(i)));
  return a;
}

json to_json(const Spectrum& s) {
  json real = json::array();
  for (const auto& t : s.real)
    real.push_back({{"lambda", num(t.lambda)},
                    {"multiplicity", t.multiplicity},
                    {"u", to_json(t.u)},
                    {"v", to_json(t.v)},
                    {"canonical", t.canonical}});
  json cplx = json::array();
  for (const auto& c : s.complex) cplx.push_back({{"re", num(c.re)}, {"im", num(c.im)}, {"modulus", num(c.modulus)}});
  return {{"real", real}, {"complex", cplx}};
}

json to_json(const AffineHyperplane& h) {
  return {{"normal", to_json(h.normal)},
          {"base_point", h.base_point ? to_json(*h.base_point) : json(nullptr)},
          {"offset", num(h.offset)}};
}

json to_json(const Chart& c) {
  json basis = json::array();
  for (const auto& e : c.basis) basis.push_back(to_json(e));
  return {{"base", to_json(c.base)}, {"basis", basis}};
}

json to_json(const ReducedPwlMap& r) {
  json j = {{"dimension", r.dim()},
            {"chart", to_json(r.chart)},
            {"left", {{"matrix", to_json(r.left.m)}, {"offset", to_json(r.left.k)}}},
            {"right", {{"matrix", to_json(r.right.m)}, {"offset", to_json(r.right.k)}}},
            {"switch_normal", to_json(r.switch_normal)},
            {"switch_offset", num(r.switch_offset)}};
  if (r.dim() == 1) {
    j["slopes"] = {num(r.left.m(0, 0)), num(r.right.m(0, 0))};
    // Reduced switching point y* with switch_normal·y* + switch_offset = 0.
    j["switch_point"] = num(-r.switch_offset / r.switch_normal[0]);
  }
  return j;
}

json fixed_point_json(const FixedPoint& f, const char* piece) {
  if (!f.point)
    return {{"point", nullptr},
            {"admissible", false},
            {"borderline", false},
            {"reason", std::string("1 is an eigenvalue of ") + piece + " (I - " + piece + " is singular)"}};
  return {{"point", to_json(*f.point)}, {"admissible", f.admissible}, {"borderline", f.borderline}};
}

std::string format_row(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

std::string axis_names(const char* prefix, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ',';
    s += prefix + std::to_string(i + 1);
  }
  return s;
}

/// Writes to the --out file via temp-then-rename, else to `out`.
void emit(const RunConfig& cfg, const std::string& data, std::ostream& out) {
  if (!cfg.out) {
    out << data;
    return;
  }
  const std::filesystem::path target(*cfg.out);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) invalid("cannot write '" + tmp.string() + "'");
    f << data;
    if (!f) invalid("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) invalid("cannot rename output into '" + target.string() + "': " + ec.message());
}

Vector initial_condition(const RunConfig& cfg) { return cfg.x0 ? *cfg.x0 : default_initial_condition(cfg.map->b()); }

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnsupportedDimension:
    case ErrorKind::NotContinuous:
    case ErrorKind::ZeroNormal:
      return kInvalidInput;
    case ErrorKind::HypothesisViolated:
    case ErrorKind::NonTransversal:
    case ErrorKind::NotSingular:
    case ErrorKind::MultipleZero:
    case ErrorKind::NoFixedPoint:
      return kReductionFailure;
    default:
      return kDynamicsFailure;
  }
}

// ---- subcommands ----------------------------------------------------------------------

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  if (cfg.format != "json") invalid("analyze only emits json");
  const PwlMap& map = *cfg.map;
  const ReductionReport rep = analyze_map(map, cfg.tol);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  auto random_point = [&] {
    Vector x(map.dim());
    for (double& xi : x) xi = unif(rng);
    return x;
  };

  json j;
  j["dimension"] = map.dim();
  j["map"] = {{"a_left", to_json(map.a_left())},
              {"a_right", to_json(map.a_right())},
              {"b", to_json(map.b())},
              {"c", to_json(map.c())}};
  j["continuity"] = {{"p", to_json(rep.p)}};
  j["eigenvalues"] = {{"left", to_json(rep.left)}, {"right", to_json(rep.right)}};
  j["fixed_points"] = {{"X", fixed_point_json(rep.fixed.x, "A_R")}, {"Y", fixed_point_json(rep.fixed.y, "A_L")}};

  if (rep.shared) {
    const auto& s = *rep.shared;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vector x = random_point();
      const double f = phi(s, x);
      worst = std::max(worst, std::abs(phi(s, map(x)) - s.lambda * f) / (1.0 + std::abs(f)));
    }
    json r = {{"lambda", num(s.lambda)},
              {"lambda_left", num(s.lambda_left)},
              {"u", to_json(s.u)},
              {"v", to_json(s.v)},
              {"phi_offset", num(s.phi_offset)},
              {"manifold", to_json(s.manifold)},
              {"transversal", s.transversal},
              {"other_shared", to_json(s.other_shared)},
              {"restricted", s.restricted ? to_json(*s.restricted) : json(nullptr)},
              {"phi_check", {{"samples", 100}, {"seed", cfg.seed}, {"max_relative_residual", num(worst)}}}};
    j["shared_eigenvalue"] = r;
  } else {
    j["shared_eigenvalue"] = nullptr;
  }
  j["shared_eigenvalue_error"] = rep.shared_error ? json(*rep.shared_error) : json(nullptr);

  if (rep.zero) {
    const auto& z = *rep.zero;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vector x = random_point();
      worst = std::max(worst, std::abs(z.plane.residual(map.apply(Side::L, x))) / (1.0 + norm(x)));
    }
    j["zero_eigenvalue"] = {{"w", to_json(z.w)},
                            {"Y", to_json(z.y)},
                            {"plane", to_json(z.plane)},
                            {"chart", to_json(z.chart)},
                            {"range_residual", num(z.range_residual)},
                            {"range_check", {{"samples", 100}, {"seed", cfg.seed}, {"max_relative_residual", num(worst)}}}};
  } else {
    j["zero_eigenvalue"] = nullptr;
  }
  j["zero_eigenvalue_error"] = rep.zero_error ? json(*rep.zero_error) : json(nullptr);

  json unit = json::array();
  for (const auto& u : rep.unit_modulus)
    unit.push_back({{"side", std::string(1, static_cast<char>(u.side))},
                    {"kind", std::string(to_string(u.kind))},
                    {"theta", num(u.theta)},
                    {"resonant", u.resonant}});
  j["unit_modulus"] = unit;
  j["transversal"] = rep.shared ? json(rep.shared->transversal) : json(nullptr);

  emit(cfg, j.dump(2) + "\n", out);
  return kOk;
}

int cmd_orbit(const RunConfig& cfg, bool portrait, std::ostream& out, std::ostream& err) {
  const PwlMap& map = *cfg.map;
  const OrbitData o = orbit(map, initial_condition(cfg), cfg.orbit);
  if (o.points.empty()) {
    err << "orbit escaped at iterate " << o.escape_index << " before any point was retained\n";
    return kDynamicsFailure;
  }
  if (o.escaped)
    err << "warning: orbit escaped at iterate " << o.escape_index << "; " << o.points.size() << " points kept\n";

  std::string data;
  if (cfg.format == "csv") {
    const std::size_t n = map.dim();
    data = portrait ? axis_names("x", n) + "\n" : "k," + axis_names("x", n) + ",side\n";
    for (std::size_t i = 0; i < o.points.size(); ++i) {
      if (!portrait) data += std::to_string(o.transient_discarded + i) + ",";
      data += format_row(o.points[i]);
      if (!portrait) data += std::string(",") + static_cast<char>(o.itinerary[i]);
      data += "\n";
    }
  } else {
    json pts = json::array();
    for (const auto& p : o.points) pts.push_back(to_json(p));
    json j = {{"points", pts}};
    if (!portrait) {
      std::string it;
      for (Side s : o.itinerary) it += static_cast<char>(s);
      j["first_index"] = o.transient_discarded;
      j["itinerary"] = it;
    }
    j["escaped"] = o.escaped;
    j["escape_index"] = o.escaped ? json(o.escape_index) : json(nullptr);
    data = j.dump(2) + "\n";
  }
  emit(cfg, data, out);
  return kOk;
}

/// Iterates a reduced map from y0 with the orbit settings.
std::vector<Vector> reduced_orbit(const ReducedPwlMap& r, Vector y, const OrbitSettings& s, bool& escaped) {
  std::vector<Vector> pts;
  escaped = false;
  for (std::size_t k = 0; k < s.transient + s.keep; ++k) {
    if (k > 0) y = r(y);
    if (!all_finite(y) || norm(y) > s.escape_radius) {
      escaped = true;
      break;
    }
    if (k >= s.transient) pts.push_back(y);
  }
  return pts;
}

int cmd_restrict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const PwlMap& map = *cfg.map;
  const auto red = detect_shared_eigenvalue(map, cfg.tol);
  if (!red) {
    err << "HypothesisViolated: A_L and A_R share no real eigenvalue (tolerance " << format_double(cfg.tol) << ")\n";
    return kReductionFailure;
  }
  const ReducedPwlMap r = restrict_to_manifold(map, *red);
  bool escaped = false;
  const std::vector<Vector> pts = reduced_orbit(r, r.chart.project(initial_condition(cfg)), cfg.orbit, escaped);
  if (pts.empty()) {
    err << "reduced orbit escaped before any point was retained\n";
    return kDynamicsFailure;
  }

  std::string data;
  if (cfg.format == "csv") {
    data = "k," + axis_names("y", r.dim()) + ",side\n";
    for (std::size_t i = 0; i < pts.size(); ++i)
      data += std::to_string(cfg.orbit.transient + i) + "," + format_row(pts[i]) + "," +
              static_cast<char>(r.side(pts[i])) + "\n";
  } else {
    json j = {{"lambda", num(red->lambda)}, {"reduced", to_json(r)}};
    json orb = json::array();
    for (const auto& p : pts) orb.push_back(to_json(p));
    j["orbit"] = orb;
    j["escaped"] = escaped;
    if (r.dim() == 1) {
      double lo = pts.front()[0], hi = lo;
      for (const auto& p : pts) {
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
      }
      const double pad = 0.05 * std::max(hi - lo, 1e-12);
      lo -= pad;
      hi += pad;
      json graph = json::array();
      constexpr int kGraphSamples = 401;
      for (int i = 0; i < kGraphSamples; ++i) {
        const double y = lo + (hi - lo) * i / (kGraphSamples - 1);
        graph.push_back({num(y), num(r(Vector{y})[0])});
      }
      // Cobweb polyline (y0,y0) → (y0,f(y0)) → (f(y0),f(y0)) → …
      json cobweb = json::array();
      const std::size_t steps = std::min<std::size_t>(pts.size() - 1, 200);
      for (std::size_t i = 0; i < steps; ++i) {
        const double a = pts[i][0], b = pts[i + 1][0];
        cobweb.push_back({num(a), num(a)});
        cobweb.push_back({num(a), num(b)});
      }
      if (steps) cobweb.push_back({num(pts[steps][0]), num(pts[steps][0])});
      j["cobweb"] = {{"interval", {num(lo), num(hi)}}, {"graph", graph}, {"path", cobweb}};
    }
    data = j.dump(2) + "\n";
  }
  emit(cfg, data, out);
  return kOk;
}

std::vector<Vector> parse_grid(const std::string& text, std::size_t dim) {
  std::vector<Vector> axes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) axes.push_back(parse_range("grid", item));
  if (axes.size() != dim)
    invalid("--grid needs " + std::to_string(dim) + " comma-separated lo:hi:count axes for this map");
  std::vector<Vector> pts{{}};
  for (const auto& axis : axes) {
    std::vector<Vector> next;
    for (const auto& p : pts)
      for (double v : axis) {
        Vector q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

/// Chart coordinates of orbit points that land on 𝒩 (predecessor on the left).
std::vector<Vector> landings(const PwlMap& map, const ZeroEigReduction& z, const RunConfig& cfg) {
  const OrbitData o = orbit(map, initial_condition(cfg), cfg.orbit);
  std::vector<Vector> out;
  for (std::size_t i = 1; i < o.points.size(); ++i)
    if (o.itinerary[i - 1] == Side::L) out.push_back(z.chart.project(o.points[i]));
  return out;
}

int cmd_induced(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const PwlMap& map = *cfg.map;
  const ZeroEigReduction z = zero_eig_reduction(map, cfg.tol);
  const std::size_t d = z.chart.dim();
  InducedSettings is;
  is.escape_radius = cfg.orbit.escape_radius;

  std::vector<Vector> land;
  std::vector<Vector> grid;
  if (cfg.grid) {
    grid = parse_grid(*cfg.grid, d);
  } else {
    land = landings(map, z, cfg);
    if (land.empty()) {
      err << "the orbit never entered the left half-space; give --grid explicitly\n";
      return kDynamicsFailure;
    }
    std::string spec;
    const std::size_t per_axis = d == 1 ? 2000 : d == 2 ? 50 : 10;
    for (std::size_t a = 0; a < d; ++a) {
      double lo = land.front()[a], hi = lo;
      for (const auto& p : land) {
        lo = std::min(lo, p[a]);
        hi = std::max(hi, p[a]);
      }
      spec += (a ? "," : "") + format_double(lo) + ":" + format_double(hi) + ":" + std::to_string(per_axis);
    }
    grid = parse_grid(spec, d);
  }

  struct Sample {
    Vector in, out;
    std::size_t j = 0;
    std::string status;
  };
  std::vector<Sample> samples;
  std::size_t ok = 0;
  for (const auto& y : grid) {
    Sample s{y, Vector(d, std::nan("")), 0, "ok"};
    try {
      const auto r = induced_map(map, z, z.chart.lift(y), is);
      s.out = z.chart.project(r.image);
      s.j = r.return_time;
      ++ok;
    } catch (const Error& e) {
      s.status = std::string(to_string(e.kind()));
    }
    samples.push_back(std::move(s));
  }
  if (ok == 0) {
    err << "no grid sample returned to N\n";
    return kDynamicsFailure;
  }

  std::string data;
  if (cfg.format == "csv") {
    data = axis_names("in", d) + "," + axis_names("out", d) + ",j,status\n";
    for (const auto& s : samples)
      data += format_row(s.in) + "," + format_row(s.out) + "," + std::to_string(s.j) + "," + s.status + "\n";
  } else {
    json rows = json::array();
    for (const auto& s : samples)
      rows.push_back({{"in", to_json(s.in)}, {"out", to_json(s.out)}, {"j", s.j}, {"status", s.status}});
    json j = {{"plane", to_json(z.plane)}, {"chart", to_json(z.chart)}, {"samples", rows}};
    // Orbit of G itself from the first landing of the default orbit.
    if (land.empty()) land = landings(map, z, cfg);
    json gorb = json::array();
    if (!land.empty()) {
      Vector y = land.front();
      try {
        for (std::size_t k = 0; k < cfg.orbit.keep; ++k) {
          gorb.push_back(to_json(y));
          y = z.chart.project(induced_map(map, z, z.chart.lift(y), is).image);
        }
      } catch (const Error&) {
      }
    }
    j["orbit"] = gorb;
    if (d == 1 && gorb.size() > 1) {
      json cobweb = json::array();
      const std::size_t steps = std::min<std::size_t>(gorb.size() - 1, 200);
      for (std::size_t i = 0; i < steps; ++i) {
        cobweb.push_back({gorb[i][0], gorb[i][0]});
        cobweb.push_back({gorb[i][0], gorb[i + 1][0]});
      }
      j["cobweb"] = cobweb;
    }
    data = j.dump(2) + "\n";
  }
  emit(cfg, data, out);
  return kOk;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.bcnf_params) invalid("scan needs BCNF coefficients (--dim/--tl/...)");
  if (!cfg.param) invalid("scan needs --param");
  if (!cfg.values || cfg.values->empty()) invalid("scan needs a non-empty --values list");
  const Vector values =
      cfg.values->find(':') != std::string::npos ? parse_range("values", *cfg.values) : parse_list("values", *cfg.values);
  ScanSettings ss;
  ss.orbit = cfg.orbit;
  ss.x0 = cfg.x0;
  const ScanResult res = scan(*cfg.bcnf_params, *cfg.param, values, ss);
  const BcnfParam which = parse_param(*cfg.param, cfg.bcnf_params->dimension);
  const std::size_t n = static_cast<std::size_t>(cfg.bcnf_params->dimension);

  struct Row {
    std::size_t count;
    bool escaped;
    std::string error;
    Vector lo, hi;
    double dist_m;  // max |φ| / ‖u‖ over the cloud, NaN without a reduction
  };
  std::vector<Row> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto& cloud = res.clouds[k];
    Row r{cloud.points.size(), cloud.escaped, res.errors[k].value_or(""), Vector(n, std::nan("")),
          Vector(n, std::nan("")), std::nan("")};
    if (!cloud.points.empty()) {
      r.lo = r.hi = cloud.points.front();
      for (const auto& p : cloud.points)
        for (std::size_t i = 0; i < n; ++i) {
          r.lo[i] = std::min(r.lo[i], p[i]);
          r.hi[i] = std::max(r.hi[i], p[i]);
        }
      try {
        if (const auto red = detect_shared_eigenvalue(bcnf(with_param(*cfg.bcnf_params, which, values[k])), cfg.tol)) {
          double worst = 0.0;
          for (const auto& p : cloud.points) worst = std::max(worst, std::abs(phi(*red, p)));
          r.dist_m = worst / norm(red->u);
        }
      } catch (const Error&) {
      }
    }
    rows.push_back(std::move(r));
  }

  std::string data;
  if (cfg.format == "csv") {
    data = "value,points,escaped,error," + axis_names("min", n) + "," + axis_names("max", n) +
           ",dist_to_M,hausdorff_next\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Row& r = rows[k];
      std::string err_field = r.error;
      std::replace(err_field.begin(), err_field.end(), ',', ';');
      data += format_double(values[k]) + "," + std::to_string(r.count) + "," + (r.escaped ? "1" : "0") + "," +
              err_field + "," + format_row(r.lo) + "," + format_row(r.hi) + "," + format_double(r.dist_m) + ",";
      if (k + 1 < rows.size() && res.consecutive_hausdorff[k]) data += format_double(*res.consecutive_hausdorff[k]);
      else data += "nan";
      data += "\n";
    }
  } else {
    json arr = json::array();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Row& r = rows[k];
      json h = nullptr;
      if (k + 1 < rows.size() && res.consecutive_hausdorff[k]) h = num(*res.consecutive_hausdorff[k]);
      arr.push_back({{"value", num(values[k])},
                     {"points", r.count},
                     {"escaped", r.escaped},
                     {"error", r.error.empty() ? json(nullptr) : json(r.error)},
                     {"min", to_json(r.lo)},
                     {"max", to_json(r.hi)},
                     {"dist_to_M", num(r.dist_m)},
                     {"hausdorff_next", h}});
    }
    data = json{{"param", *cfg.param}, {"rows", arr}}.dump(2) + "\n";
  }
  emit(cfg, data, out);
  return kOk;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Border-collision bifurcation analysis of continuous piecewise-linear maps"};
  app.require_subcommand(1);

  std::map<std::string, std::string> flag_values;
  std::optional<std::string> config_path, dump_path;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"analyze", "eigenvalues, fixed points and all reductions as JSON"},
      {"orbit", "forward orbit with iterate index and itinerary"},
      {"portrait", "post-transient orbit points only"},
      {"restrict", "map restricted to the shared-eigenvalue manifold"},
      {"induced", "first-return map to the zero-eigenvalue hyperplane"},
      {"scan", "one-parameter attractor scan with Hausdorff distances"},
  };
  const std::map<std::string, std::string> help = {
      {"dim", "BCNF dimension (2 or 3)"},
      {"tl", "tau_L"},
      {"sl", "sigma_L (3D)"},
      {"dl", "delta_L"},
      {"tr", "tau_R"},
      {"sr", "sigma_R (3D)"},
      {"dr", "delta_R"},
      {"matrix-file", "explicit A_L, A_R, b, c"},
      {"x0", "initial condition, comma separated"},
      {"transient", "iterates discarded before output (default 1000)"},
      {"keep", "iterates retained (default 3000)"},
      {"escape-radius", "escape threshold on |x| (default 1e12)"},
      {"tol", "matching / membership tolerance (default 1e-9)"},
      {"grid", "lo:hi:count per chart axis, comma separated (induced)"},
      {"param", "scan parameter: tl sl dl tr sr dr"},
      {"values", "scan values: comma list or lo:hi:count"},
      {"seed", "seed for randomized checks"},
      {"format", "csv or json"},
      {"out", "output file (written atomically)"},
  };

  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    for (const auto& [flag, full] : kKeys) {
      sub->add_option_function<std::string>(
             "--" + flag, [&flag_values, full = full](const std::string& v) { flag_values[full] = v; },
             help.at(flag))
          ->allow_extra_args(false);
    }
    sub->add_option_function<std::string>(
        "--config", [&config_path](const std::string& v) { config_path = v; }, "configuration file (INI)");
    sub->add_option_function<std::string>(
        "--dump-config", [&dump_path](const std::string& v) { dump_path = v; },
        "write the effective configuration to this file");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kInvalidInput;
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();

  try {
    Settings settings;
    if (config_path) settings = read_config_file(*config_path);
    settings.erase("run.command");
    for (const auto& [k, v] : flag_values) settings[k] = v;
    if (dump_path) write_config_file(*dump_path, command, settings);
    const RunConfig cfg = build_config(command, settings);

    if (command == "analyze") return cmd_analyze(cfg, out);
    if (command == "orbit") return cmd_orbit(cfg, false, out, err);
    if (command == "portrait") return cmd_orbit(cfg, true, out, err);
    if (command == "restrict") return cmd_restrict(cfg, out, err);
    if (command == "induced") return cmd_induced(cfg, out, err);
    if (command == "scan") return cmd_scan(cfg, out);
    err << "unknown command\n";
    return kInvalidInput;
  } catch (const CliFailure& e) {
    err << e.what() << "\n";
    return e.code;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDynamicsFailure;
  }
}

}  // namespace bcb::cli
