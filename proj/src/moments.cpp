#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracstab/error.hpp"
#include "fracstab/format.hpp"
#include "fracstab/moments.hpp"

namespace fracstab {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

std::string MomentCurve::to_csv() const {
  std::string out = "t,m,ci_half_width\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    out += format_double(t[i]) + ',' + format_double(m[i]) + ',' + format_double(half_width[i]) + '\n';
  return out;
}

MomentCurve pth_moment_curve(const PathEnsemble& ensemble, int p, bool weighted, int first_node) {
  if (p < 1) throw Error(ErrorKind::domain, "pth_moment_curve: p must be >= 1", "p");
  if (first_node < 0) first_node = weighted ? 0 : 1;
  if (!weighted && first_node == 0)
    throw Error(ErrorKind::domain, "pth_moment_curve: X(0) is not finite, only the weighted curve has node 0",
                "first_node");
  if (const int bad = ensemble.first_failure(); bad >= 0)
    throw Error(ErrorKind::numeric,
                "pth_moment_curve: path " + std::to_string(bad) + " failed (" + ensemble.diagnostics[bad] + ")",
                "ensemble.path[" + std::to_string(bad) + "]");

  MomentCurve curve;
  curve.p = p;
  curve.n_paths = ensemble.n_paths;
  curve.weighted = weighted;
  const int n = ensemble.dim;
  const auto& data = weighted ? ensemble.weighted : ensemble.values;
  std::vector<double> powers(ensemble.n_paths);
  for (int j = first_node; j <= ensemble.grid.N; ++j) {
    for (int i = 0; i < ensemble.n_paths; ++i) {
      const double* x = data.data() + ensemble.offset(i, j);
      double sq = 0.0;
      for (int c = 0; c < n; ++c) sq += x[c] * x[c];
      powers[i] = std::pow(std::sqrt(sq), p);
    }
    const double mean = pairwise_sum(powers) / ensemble.n_paths;
    double hw = std::numeric_limits<double>::quiet_NaN();
    if (ensemble.n_paths >= 30) {
      std::vector<double> dev(powers.size());
      for (std::size_t i = 0; i < powers.size(); ++i) dev[i] = (powers[i] - mean) * (powers[i] - mean);
      const double var = pairwise_sum(dev) / (ensemble.n_paths - 1);
      hw = 1.959963984540054 * std::sqrt(var / ensemble.n_paths);
    }
    curve.t.push_back(ensemble.grid.t(j));
    curve.m.push_back(mean);
    curve.half_width.push_back(hw);
  }
  return curve;
}

double h_norm(const PathEnsemble& ensemble, int p) {
  const MomentCurve curve = pth_moment_curve(ensemble, p, true, 0);
  return *std::max_element(curve.m.begin(), curve.m.end());
}

DecayVerdict decay_fit(const MomentCurve& curve, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction < 1.0))
    throw Error(ErrorKind::domain, "decay_fit: window_fraction must lie in (0, 1)", "window_fraction");
  std::size_t first_positive = 0;
  while (first_positive < curve.t.size() && !(curve.t[first_positive] > 0.0)) ++first_positive;
  const std::size_t available = curve.t.size() - first_positive;
  const auto count = static_cast<std::size_t>(std::ceil(window_fraction * available));
  if (count < 4) throw Error(ErrorKind::domain, "decay_fit: fewer than 4 nodes in the window", "window_fraction");
  const std::size_t start = curve.t.size() - count;

  std::vector<double> x(count), y(count);
  for (std::size_t i = 0; i < count; ++i) {
    x[i] = std::log(curve.t[start + i]);
    y[i] = std::log(std::max(curve.m[start + i], 1e-300));
  }
  const double mx = pairwise_sum(x) / count, my = pairwise_sum(y) / count;
  std::vector<double> sxx(count), sxy(count);
  for (std::size_t i = 0; i < count; ++i) {
    sxx[i] = (x[i] - mx) * (x[i] - mx);
    sxy[i] = (x[i] - mx) * (y[i] - my);
  }
  const double Sxx = pairwise_sum(sxx);
  DecayVerdict v;
  v.slope = pairwise_sum(sxy) / Sxx;
  std::vector<double> res(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = y[i] - (my + v.slope * (x[i] - mx));
    res[i] = r * r;
  }
  const double se = std::sqrt(pairwise_sum(res) / double(count - 2) / Sxx);
  v.slope_ci = {v.slope - 1.959963984540054 * se, v.slope + 1.959963984540054 * se};
  v.window = {curve.t[start], curve.t.back()};
  return v;
}

DecayVerdict stability_verdict(std::span<const TaggedCurves> curves, double epsilon, double delta,
                               double tail_tol, double window_fraction) {
  if (curves.empty()) throw Error(ErrorKind::domain, "stability_verdict: no curves", "curves");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::domain, "stability_verdict: epsilon must be positive", "epsilon");
  if (!(tail_tol > 0.0)) throw Error(ErrorKind::domain, "stability_verdict: tail_tol must be positive", "tail_tol");

  DecayVerdict out;
  bool stable = true, decays = true;
  std::vector<std::string> notes;
  out.slope = -std::numeric_limits<double>::infinity();
  out.slope_ci = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& c : curves) {
    if (c.rho_norm > delta) {
      stable = false;
      notes.push_back("initial datum larger than delta");
    }
    const double sup = *std::max_element(c.weighted.m.begin(), c.weighted.m.end());
    out.sup_moment = std::max(out.sup_moment, sup);
    if (!(sup < epsilon)) stable = false;

    const double horizon = c.unweighted.t.back();
    std::vector<double> tail;
    for (std::size_t i = 0; i < c.unweighted.t.size(); ++i)
      if (c.unweighted.t[i] >= horizon / 10.0) tail.push_back(c.unweighted.m[i]);
    const double tail_mean = tail.empty() ? 0.0 : pairwise_sum(tail) / tail.size();
    out.tail_mean = std::max(out.tail_mean, tail_mean);
    if (!(tail_mean < tail_tol)) decays = false;

    const bool identically_zero = std::all_of(tail.begin(), tail.end(), [](double m) { return m == 0.0; });
    if (identically_zero) {
      notes.push_back("tail identically zero");
      continue;
    }
    const DecayVerdict fit = decay_fit(c.unweighted, window_fraction);
    // report the least favourable fit
    if (fit.slope_ci.second > out.slope_ci.second) {
      out.slope = fit.slope;
      out.slope_ci = fit.slope_ci;
      out.window = fit.window;
    }
    if (!(fit.slope_ci.second < 0.0)) decays = false;
  }
  out.stable_p = stable;
  out.asymptotically_stable_p = stable && decays;
  if (!std::isfinite(out.slope)) {
    out.slope = 0.0;
    out.slope_ci = {0.0, 0.0};
  }
  for (const auto& n : notes) {
    if (out.note.find(n) != std::string::npos) continue;
    out.note += out.note.empty() ? n : "; " + n;
  }
  return out;
}

std::string DecayVerdict::to_text() const {
  std::ostringstream s;
  s << "slope = " << format_double(slope) << '\n'
    << "slope_ci_low = " << format_double(slope_ci.first) << '\n'
    << "slope_ci_high = " << format_double(slope_ci.second) << '\n'
    << "window_start = " << format_double(window.first) << '\n'
    << "window_end = " << format_double(window.second) << '\n'
    << "sup_weighted_moment = " << format_double(sup_moment) << '\n'
    << "tail_mean = " << format_double(tail_mean) << '\n'
    << "stable_p = " << (stable_p ? "true" : "false") << '\n'
    << "asymptotically_stable_p = " << (asymptotically_stable_p ? "true" : "false") << '\n'
    << "horizon_note = suprema are taken over the simulated horizon\n"
    << "note = " << (note.empty() ? "none" : note) << '\n';
  return s.str();
}

}  // namespace fracstab
