#pragma once

// Closed-form stability constants: the existence constant Theta, the
// contraction constant of the fixed-point map, the delta-epsilon margin and
// the mean-square criterion for the Caputo variant.

#include "fracstab/fraccalc.hpp"
#include "fracstab/spectral.hpp"
#include "fracstab/system.hpp"

namespace fracstab {

struct CriterionInputs {
  FractionalOrder order;
  double T = 1.0;
  double L_g = 0.0, L_b = 0.0, L_sigma = 0.0;
  double A_norm = 0.0;  // max row sum
  double M = 1.0;       // sup_{[0,T]} ||E_{a,a}(t^a A)||

  void validate() const;
};

struct Certificate {
  CriterionInputs inputs;
  double theta = 0.0;
  double c_p = 0.0;
  double neutral_factor = 0.0;  // 4^{p-1} L_g^p
  double contraction = 0.0;     // +inf when neutral_factor >= 1
  double k_stab = 0.0;          // ((p-1)/(pa-1))^{p-1} form
  double k_stab_beta = 0.0;     // same bracket with B(q,q)^{p-1}, for comparison
  double epsilon = 1.0;
  double delta = 0.0;           // 0 when k_stab >= 1
  double caputo_ms = 0.0;       // only for p = 2, NaN otherwise
  SectorVerdict sector;
  bool verdict_existence = false;
  bool verdict_stability = false;
  bool assumptions_verified = true;  // coefficient verifiers passed
  bool integrability_implied = true;  // b(t,0), sigma(t,0) integrability follows from vanishing
  std::string note;             // reason a verdict failed, empty otherwise

  /// Flat `key = value` lines, 17 significant digits.
  std::string to_text() const;
};

double c_p(int p);

double theta(const CriterionInputs& in);

/// Theta / (1 - 4^{p-1} L_g^p). Throws Error(precondition, "neutral term too
/// strong") when 4^{p-1} L_g^p >= 1.
double contraction_constant(const CriterionInputs& in);

/// 6^{p-1} [L_g^p + L_g^p ||A||^p M^p r^{p-1} T^{pa-1} + L_b^p M^p r^{p-1}
/// T^{pa-1} + C_p L_s^p M^p (T^{2a-1}/(2a-1))^{p/2}], r = (p-1)/(pa-1).
double k_stab(const CriterionInputs& in);

/// The k_stab bracket with B(q,q)^{p-1} in place of r^{p-1}.
double k_stab_beta(const CriterionInputs& in);

/// 0.99 min(eps, (1 - k_stab) eps / (6^{p-1} M^p T^{p(a-1)})). Throws
/// Error(precondition, "criterion fails") when k_stab >= 1.
double delta_for_epsilon(const CriterionInputs& in, double epsilon);

/// 4 (L_g^2 ||A||^2 + L_b^2 + L_s^2) M^2 T^{2a-1} / (2a-1); p must be 2.
double caputo_ms_criterion(const CriterionInputs& in);

struct CertifyOptions {
  double epsilon = 1.0;
  int m_nodes = 1025;            // grid for ml_norm_sup
  std::optional<double> M_override;
};

Certificate certify(const SystemSpec& system, double T, const CertifyOptions& options = {});

}  // namespace fracstab
