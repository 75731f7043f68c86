#include <cmath>
#include <limits>
#include <sstream>

#include "fracstab/criteria.hpp"
#include "fracstab/error.hpp"
#include "fracstab/format.hpp"

namespace fracstab {

void CriterionInputs::validate() const {
  order.validate();
  const auto nonneg = [](double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorKind::domain, "criteria: value must be finite and >= 0", field);
  };
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::domain, "criteria: T must be positive", "inputs.T");
  if (!(M > 0.0) || !std::isfinite(M)) throw Error(ErrorKind::domain, "criteria: M must be positive", "inputs.M");
  nonneg(L_g, "inputs.L_g");
  nonneg(L_b, "inputs.L_b");
  nonneg(L_sigma, "inputs.L_sigma");
  nonneg(A_norm, "inputs.A_norm");
  if (!(2.0 * order.alpha - 1.0 > 0.0))
    throw Error(ErrorKind::domain, "criteria: 2 alpha - 1 must be positive", "inputs.order.alpha");
}

double c_p(int p) { return std::pow(p * (p - 1) / 2.0, p / 2.0); }

double theta(const CriterionInputs& in) {
  in.validate();
  const double a = in.order.alpha;
  const int p = in.order.p;
  const double q = (p * a - 1.0) / (p - 1.0);
  if (!(q > 0.0)) throw Error(ErrorKind::domain, "theta: (p alpha - 1)/(p - 1) must be positive", "inputs.order");
  const double Mp = std::pow(in.M, p);
  const double bq = std::pow(beta_fn(q, q), p - 1);
  const double tpow = std::pow(in.T, p * a - 1.0);
  const double neutral = std::pow(in.L_g, p) * std::pow(in.A_norm, p) * Mp * bq * tpow;
  const double drift = std::pow(in.L_b, p) * Mp * bq * tpow;
  const double noise = c_p(p) * std::pow(in.L_sigma, p) * Mp *
                       std::pow(in.T, p * (a - 1.0) + p / 2.0) *
                       std::pow(beta_fn(2.0 * a - 1.0, 2.0 * a - 1.0), p / 2.0);
  return std::pow(4.0, p - 1) * (neutral + drift + noise);
}

double contraction_constant(const CriterionInputs& in) {
  const double th = theta(in);
  const int p = in.order.p;
  const double neutral = std::pow(4.0, p - 1) * std::pow(in.L_g, p);
  if (neutral >= 1.0)
    throw Error(ErrorKind::precondition, "neutral term too strong: 4^{p-1} L_g^p >= 1", "inputs.L_g");
  return th / (1.0 - neutral);
}

namespace {

double stab_bracket(const CriterionInputs& in, double memory_factor) {
  const double a = in.order.alpha;
  const int p = in.order.p;
  const double Mp = std::pow(in.M, p);
  const double tpow = std::pow(in.T, p * a - 1.0);
  const double lg = std::pow(in.L_g, p);
  const double sum = lg + lg * std::pow(in.A_norm, p) * Mp * memory_factor * tpow +
                     std::pow(in.L_b, p) * Mp * memory_factor * tpow +
                     c_p(p) * std::pow(in.L_sigma, p) * Mp *
                         std::pow(std::pow(in.T, 2.0 * a - 1.0) / (2.0 * a - 1.0), p / 2.0);
  return std::pow(6.0, p - 1) * sum;
}

}  // namespace

double k_stab(const CriterionInputs& in) {
  in.validate();
  const int p = in.order.p;
  const double r = (p - 1.0) / (p * in.order.alpha - 1.0);
  return stab_bracket(in, std::pow(r, p - 1));
}

double k_stab_beta(const CriterionInputs& in) {
  in.validate();
  const int p = in.order.p;
  const double q = (p * in.order.alpha - 1.0) / (p - 1.0);
  return stab_bracket(in, std::pow(beta_fn(q, q), p - 1));
}

double delta_for_epsilon(const CriterionInputs& in, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorKind::domain, "delta_for_epsilon: epsilon must be positive", "epsilon");
  const double k = k_stab(in);
  if (k >= 1.0) throw Error(ErrorKind::precondition, "criterion fails: k_stab >= 1", "inputs");
  const int p = in.order.p;
  const double scale = std::pow(6.0, p - 1) * std::pow(in.M, p) * std::pow(in.T, p * (in.order.alpha - 1.0));
  return 0.99 * std::min(epsilon, (1.0 - k) * epsilon / scale);
}

double caputo_ms_criterion(const CriterionInputs& in) {
  in.validate();
  if (in.order.p != 2)
    throw Error(ErrorKind::domain, "caputo_ms_criterion: only the mean-square case p = 2 is defined", "inputs.order.p");
  const double a = in.order.alpha;
  const double m2 = in.M * in.M;
  const double w = std::pow(in.T, 2.0 * a - 1.0) / (2.0 * a - 1.0);
  return 4.0 * (in.L_g * in.L_g * in.A_norm * in.A_norm * m2 + in.L_b * in.L_b * m2 +
                in.L_sigma * in.L_sigma * m2) * w;
}

Certificate certify(const SystemSpec& system, double T, const CertifyOptions& options) {
  system.validate();
  Certificate cert;
  CriterionInputs& in = cert.inputs;
  in.order = system.order;
  in.T = T;
  in.L_g = system.coeffs.L_g;
  in.L_b = system.coeffs.L_b;
  in.L_sigma = system.coeffs.L_sigma;
  in.A_norm = row_sum_norm(system.A);
  in.M = options.M_override ? *options.M_override
                            : ml_norm_sup(system.A, system.order.alpha, T, options.m_nodes);
  in.validate();

  const int p = in.order.p;
  cert.c_p = c_p(p);
  cert.theta = theta(in);
  cert.neutral_factor = std::pow(4.0, p - 1) * std::pow(in.L_g, p);
  cert.contraction = cert.neutral_factor < 1.0 ? cert.theta / (1.0 - cert.neutral_factor)
                                               : std::numeric_limits<double>::infinity();
  cert.k_stab = k_stab(in);
  cert.k_stab_beta = k_stab_beta(in);
  cert.epsilon = options.epsilon;
  cert.delta = cert.k_stab < 1.0 ? delta_for_epsilon(in, options.epsilon) : 0.0;
  cert.caputo_ms = p == 2 ? caputo_ms_criterion(in) : std::numeric_limits<double>::quiet_NaN();
  cert.sector = sector_check(eigenvalues(system.A), in.order.alpha);
  cert.verdict_existence = cert.theta < 1.0 && cert.neutral_factor < 1.0;
  cert.verdict_stability = cert.k_stab < 1.0 && cert.sector.in_sector;
  cert.assumptions_verified = system.coeffs.assumptions_verified && !system.coeffs.allow_nonvanishing;
  cert.integrability_implied = !system.coeffs.allow_nonvanishing;

  if (cert.neutral_factor >= 1.0) cert.note = "neutral term too strong";
  else if (cert.theta >= 1.0) cert.note = "theta >= 1";
  else if (!cert.sector.in_sector) cert.note = "spectrum outside the stability sector";
  else if (cert.k_stab >= 1.0) cert.note = "criterion fails: k_stab >= 1";
  return cert;
}

std::string Certificate::to_text() const {
  std::ostringstream out;
  const auto line = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  const auto num = [](double v) { return format_double(v); };
  const auto flag = [](bool v) { return std::string(v ? "true" : "false"); };
  line("alpha", num(inputs.order.alpha));
  line("p", std::to_string(inputs.order.p));
  line("T", num(inputs.T));
  line("L_g", num(inputs.L_g));
  line("L_b", num(inputs.L_b));
  line("L_sigma", num(inputs.L_sigma));
  line("A_norm", num(inputs.A_norm));
  line("M", num(inputs.M));
  line("c_p", num(c_p));
  line("theta", num(theta));
  line("neutral_factor", num(neutral_factor));
  line("contraction", num(contraction));
  line("k_stab", num(k_stab));
  line("k_stab_beta", num(k_stab_beta));
  line("epsilon", num(epsilon));
  line("delta", num(delta));
  line("caputo_ms", num(caputo_ms));
  line("sector_margin", num(sector.margin));
  line("in_sector", flag(sector.in_sector));
  line("verdict_existence", flag(verdict_existence));
  line("verdict_stability", flag(verdict_stability));
  line("assumptions_verified", flag(assumptions_verified));
  line("integrability_implied_by_vanishing", flag(integrability_implied));
  line("note", note.empty() ? "none" : note);
  return out.str();
}

}  // namespace fracstab
