#pragma once

#include <string>
#include <vector>

#include "camp/quad.hpp"

namespace camp {

enum class SpectrumKind {
  Empirical,            // finite list of Gram eigenvalues (plus zeros)
  AsymptoticGeometric,  // constant-ratio singular values, large-system limit
  MarchenkoPastur,      // iid entries of variance 1/M, large-system limit
  ExplicitMoments       // caller-supplied moment list
};

// Moment sequence mu_0..mu_K of the Gram spectrum A^T A together with an
// evaluator for its eta-transform eta(z) = E[1 / (1 + z lambda)].
struct SpectralProfile {
  SpectrumKind kind = SpectrumKind::ExplicitMoments;
  std::vector<double> moments;  // mu_0 = 1 first
  double delta = 0.0;           // AsymptoticGeometric / MarchenkoPastur
  double kappa = 0.0;           // AsymptoticGeometric
  std::vector<double> gram_eigenvalues;  // Empirical: sigma_m^2 values
  int N = 0;                             // Empirical: ambient dimension

  double eta(double z) const;

  // Extended-precision moments mu_0..mu_k_max regenerated from the profile's
  // defining parameters. The tap recursion must consume moments at full
  // precision: feeding it double-rounded moments forfeits the accuracy the
  // extended arithmetic exists to protect.
  std::vector<qreal> moments_quad(int k_max) const;
};

SpectralProfile empirical_moments(const std::vector<double>& singular_values,
                                  int N, int k_max);
SpectralProfile asymptotic_moments_geometric(double delta, double kappa,
                                             int k_max);
SpectralProfile marchenko_pastur_moments(double delta, int k_max);
SpectralProfile profile_from_moments(const std::vector<double>& moments);

// Triangular tap table g[t][k] for t = 0..T and k = k_lo..T+1-t, with the
// extracted convolution taps g_t^(1). k_lo is normally 1; k_lo = 0 adds the
// shadow row whose entries must vanish identically for any unit-mass,
// unit-trace spectrum.
struct TapTable {
  int T = 0;
  int k_lo = 1;
  std::vector<std::vector<double>> g;  // g[t][k - k_lo]
  std::vector<double> taps;            // g_t^(1), t = 0..T
  bool overflowed = false;
  int first_bad_t = -1;

  double at(int t, int k) const { return g[t][k - k_lo]; }
  std::string serialize() const;  // lines "t k value"
};

// Moment-driven dynamical system producing the convolution taps. Needs
// moments up to k = T + 2; runs internally in extended precision.
TapTable tap_recursion(const SpectralProfile& profile, int T, int k_lo = 1);

// Closed-form taps for the constant-ratio (geometric) singular-value profile,
// kappa > 1. Stable in double precision at any practical horizon.
std::vector<double> taps_geometric_closed_form(double delta, double kappa,
                                               int T);

// kappa = 1 limit: the equal-eigenvalue spectrum has constant taps
// g_t^(1) = (1 - delta) / delta.
std::vector<double> taps_equal_spectrum(double delta, int T);

// One evaluation row of the generating-function consistency check: the tap
// generating function G1 and the spectrum's eta-transform must satisfy
// eta(x_s) = 1 - y with x_s = y / ((1 - y) (1 - y G1(y))).
struct EtaCheckRow {
  double y = 0.0;
  double g1 = 0.0;        // truncated generating function value
  double denom = 0.0;     // 1 - y * G1(y)
  double x_s = 0.0;
  double residual = 0.0;  // |eta(x_s) - (1 - y)|
  double tail_bound = 0.0;
  bool flagged = false;   // denominator at or below zero: pole region
};

std::vector<EtaCheckRow> verify_tap_generating_function(
    const std::vector<double>& taps, const SpectralProfile& profile,
    const std::vector<double>& y_grid);

}  // namespace camp
