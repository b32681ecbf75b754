#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "camp/rng.hpp"

namespace camp {

using Vector = std::vector<double>;

// In-place unnormalized fast Walsh-Hadamard transform; n must be a power of
// two. Applying it twice multiplies by n.
void fwht_inplace(double* data, int n);

bool is_power_of_two(int n);

// Singular-value profile with constant ratio sigma_m / sigma_{m-1} and
// sum of squares equal to N. kappa = 1 returns the equal-value limit
// sigma_m^2 = N / M.
Vector geometric_singular_values(int M, int N, double kappa);

enum class EnsembleKind { PartialHadamard, IidGaussian, CustomSvd };

// Numeric SVD factors for dense ensembles (thin: U is M x M, V is N x M).
struct SvdFactors {
  Vector singular_values;  // length M, descending
  Vector u;                // M x M, row-major
  Vector v;                // N x M, row-major
};

// A sensing matrix A (M x N) with structural access to its SVD A = U S V^T.
//
// PartialHadamard: A = diag(sigma) * H where the M rows of H are drawn
// without replacement from the orthonormal Sylvester-Hadamard matrix. Here
// U = I and the full right factor V^T stacks the selected rows first, then
// the unselected rows in ascending index order; both A and V apply in
// O(N log N) through the fast transform.
//
// IidGaussian: dense entries of variance 1/M (optional common mean); its
// numeric SVD is computed lazily, only when a consumer asks for it.
//
// CustomSvd: explicitly supplied dense factors.
class SensingEnsemble {
 public:
  int M = 0;
  int N = 0;
  EnsembleKind kind = EnsembleKind::PartialHadamard;
  Vector singular_values;          // length M (Hadamard/custom; iid: via svd())
  std::vector<int> row_selection;  // Hadamard: M selected rows, draw order
  std::vector<int> unselected;     // Hadamard: remaining rows, ascending

  Vector forward(const Vector& x) const;  // A x
  Vector adjoint(const Vector& z) const;  // A^T z

  // Full right-factor applications (N-dimensional); available for
  // PartialHadamard and CustomSvd ensembles only.
  bool has_full_right_factor() const;
  Vector apply_vt(const Vector& u) const;  // V^T u
  Vector apply_v(const Vector& u) const;   // V u

  // U^T applied to an M-vector (identity for PartialHadamard).
  Vector apply_ut(const Vector& y) const;
  // V restricted to its first M columns applied to an M-vector.
  Vector apply_v_cols(const Vector& d) const;

  double trace_gram() const;  // tr(A^T A)
  double delta() const { return static_cast<double>(M) / N; }

  // Numeric SVD for dense kinds; PartialHadamard returns its structural
  // factors' singular values without any computation.
  const SvdFactors& svd() const;

  // Dense row-major M x N realization (small-instance oracles and tests).
  Vector dense() const;

  Vector dense_matrix;  // IidGaussian / CustomSvd storage
  Vector custom_u;      // CustomSvd: M x M row-major
  Vector custom_v;      // CustomSvd: N x N row-major

 private:
  // Computed on first use and shared by copies; the factors are immutable
  // once built. Not synchronized: concurrent consumers each use their own
  // ensemble instance.
  mutable std::shared_ptr<SvdFactors> svd_cache_;
};

SensingEnsemble sample_partial_hadamard(int M, int N, const Vector& sigma,
                                        Rng& rng);

// Dense iid-Gaussian ensemble: entries mean sqrt(gamma / M), variance 1 / M.
SensingEnsemble sample_iid_gaussian(int M, int N, Rng& rng, double gamma = 0.0);

SensingEnsemble make_custom_svd(int M, int N, const Vector& u,
                                const Vector& singular_values, const Vector& v);

struct SignalPrior {
  double rho = 0.1;  // density in (0, 1]
};

// Bernoulli-Gaussian draw: zero with probability 1 - rho, else a zero-mean
// Gaussian of variance 1 / rho, so the element variance is 1.
Vector sample_signal(const SignalPrior& prior, int N, Rng& rng);

struct Measurement {
  Vector y;
  double noise_variance = 0.0;
  Vector noise;  // the realized noise draw, kept for diagnostics
};

Measurement measure(const SensingEnsemble& ensemble, const Vector& x,
                    double noise_variance, Rng& rng);

}  // namespace camp
