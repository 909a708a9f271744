#ifndef BCB_ANALYSIS_HPP
#define BCB_ANALYSIS_HPP

// Attractor sampling, Hausdorff distances between point clouds and
// one-parameter scans of the normal form.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bcb/error.hpp"
#include "bcb/linalg.hpp"
#include "bcb/pwl_map.hpp"

namespace bcb {

struct AttractorCloud {
  std::vector<Vector> points;
  std::string provenance;
  bool escaped = false;
};

inline AttractorCloud attractor(const PwlMap& map, std::span<const double> x0, const OrbitSettings& settings = {},
                                std::string provenance = {}) {
  OrbitData o = orbit(map, x0, settings);
  AttractorCloud cloud{std::move(o.points), std::move(provenance), o.escaped};
  if (cloud.escaped) cloud.points.clear();
  return cloud;
}

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// max over a of min over b of |a − b|²
inline double directed_hausdorff_sq(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) {
      best = std::min(best, squared_distance(p, q));
      if (best <= worst) break;  // cannot raise the maximum any more
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace detail

/// Exact Hausdorff distance between finite Euclidean point sets.
inline double hausdorff(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyCloud, "hausdorff: empty point cloud");
  return std::sqrt(std::max(detail::directed_hausdorff_sq(a, b), detail::directed_hausdorff_sq(b, a)));
}

inline double hausdorff(const AttractorCloud& a, const AttractorCloud& b) { return hausdorff(a.points, b.points); }

// ---- scans ------------------------------------------------------------------------

enum class BcnfParam { TauL, SigmaL, DeltaL, TauR, SigmaR, DeltaR };

/// Accepts tl, sl, dl, tr, sr, dr.
inline BcnfParam parse_param(const std::string& name, int dimension) {
  BcnfParam p;
  if (name == "tl") p = BcnfParam::TauL;
  else if (name == "sl") p = BcnfParam::SigmaL;
  else if (name == "dl") p = BcnfParam::DeltaL;
  else if (name == "tr") p = BcnfParam::TauR;
  else if (name == "sr") p = BcnfParam::SigmaR;
  else if (name == "dr") p = BcnfParam::DeltaR;
  else throw Error(ErrorKind::InvalidArgument, "unknown parameter '" + name + "'");
  if (dimension == 2 && (p == BcnfParam::SigmaL || p == BcnfParam::SigmaR))
    throw Error(ErrorKind::InvalidArgument, "parameter '" + name + "' only exists in three dimensions");
  return p;
}

inline BcnfParams with_param(BcnfParams base, BcnfParam which, double value) {
  switch (which) {
    case BcnfParam::TauL: base.left.tau = value; break;
    case BcnfParam::SigmaL: base.left.sigma = value; break;
    case BcnfParam::DeltaL: base.left.delta = value; break;
    case BcnfParam::TauR: base.right.tau = value; break;
    case BcnfParam::SigmaR: base.right.sigma = value; break;
    case BcnfParam::DeltaR: base.right.delta = value; break;
  }
  return base;
}

/// x₀ = b + 10⁻³ e₂, the image of the origin nudged off any special line.
inline Vector default_initial_condition(const Vector& b) {
  Vector x = b;
  if (x.size() > 1) x[1] += 1e-3;
  return x;
}

struct ScanSettings {
  OrbitSettings orbit;
  std::optional<Vector> x0;  // default_initial_condition when absent
  unsigned threads = 0;      // 0: hardware concurrency
};

struct ScanResult {
  std::vector<double> values;
  std::vector<AttractorCloud> clouds;
  std::vector<std::optional<std::string>> errors;  // per value
  /// hausdorff(clouds[k], clouds[k+1]); empty when either side has no points.
  std::vector<std::optional<double>> consecutive_hausdorff;
};

inline ScanResult scan(const BcnfParams& base, const std::string& param, const std::vector<double>& values,
                       const ScanSettings& settings = {}) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "scan: empty value list");
  const BcnfParam which = parse_param(param, base.dimension);
  const Vector x0 =
      settings.x0 ? *settings.x0 : default_initial_condition(unit_vector(static_cast<std::size_t>(base.dimension), 0));

  ScanResult res;
  res.values = values;
  res.clouds.resize(values.size());
  res.errors.resize(values.size());

  auto run_one = [&](std::size_t k) {
    const BcnfParams params = with_param(base, which, values[k]);
    std::string tag = param + "=" + std::to_string(values[k]);
    try {
      res.clouds[k] = attractor(bcnf(params), x0, settings.orbit, tag);
      if (res.clouds[k].escaped) res.errors[k] = "Escaped";
    } catch (const Error& e) {
      res.clouds[k] = AttractorCloud{{}, tag, false};
      res.errors[k] = e.what();
    }
  };

  unsigned workers = settings.threads ? settings.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(values.size()));
  if (workers <= 1) {
    for (std::size_t k = 0; k < values.size(); ++k) run_one(k);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t k = w; k < values.size(); k += workers) run_one(k);
      }));
    for (auto& j : jobs) j.get();
  }

  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    if (res.clouds[k].points.empty() || res.clouds[k + 1].points.empty())
      res.consecutive_hausdorff.emplace_back(std::nullopt);
    else
      res.consecutive_hausdorff.emplace_back(hausdorff(res.clouds[k], res.clouds[k + 1]));
  }
  return res;
}

}  // namespace bcb

#endif  // BCB_ANALYSIS_HPP
