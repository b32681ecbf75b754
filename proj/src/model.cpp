#include "camp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace camp {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fwht_inplace(double* data, int n) {
  for (int h = 1; h < n; h <<= 1) {
    for (int i = 0; i < n; i += h << 1) {
      for (int j = i; j < i + h; ++j) {
        double a = data[j];
        double b = data[j + h];
        data[j] = a + b;
        data[j + h] = a - b;
      }
    }
  }
}

Vector geometric_singular_values(int M, int N, double kappa) {
  if (M < 2) throw std::invalid_argument("geometric_singular_values: M >= 2 required");
  if (kappa < 1.0) throw std::invalid_argument("geometric_singular_values: kappa >= 1 required");
  Vector sigma(M);
  if (kappa == 1.0) {
    // Equal-value limit; the generic formula is 0/0 here.
    double s = std::sqrt(static_cast<double>(N) / M);
    std::fill(sigma.begin(), sigma.end(), s);
    return sigma;
  }
  double ratio = std::pow(kappa, -1.0 / (M - 1));
  double r2 = ratio * ratio;
  double sigma0_sq = N * (1.0 - r2) / (1.0 - std::pow(kappa, -2.0 * M / (M - 1)));
  double value = std::sqrt(sigma0_sq);
  for (int m = 0; m < M; ++m) {
    sigma[m] = value;
    value *= ratio;
  }
  return sigma;
}

Vector SensingEnsemble::forward(const Vector& x) const {
  if (static_cast<int>(x.size()) != N)
    throw std::invalid_argument("forward: length mismatch");
  if (kind == EnsembleKind::PartialHadamard) {
    Vector w = x;
    fwht_inplace(w.data(), N);
    double scale = 1.0 / std::sqrt(static_cast<double>(N));
    Vector y(M);
    for (int m = 0; m < M; ++m)
      y[m] = singular_values[m] * w[row_selection[m]] * scale;
    return y;
  }
  if (kind == EnsembleKind::IidGaussian) {
    Vector y(M, 0.0);
    for (int m = 0; m < M; ++m) {
      const double* row = dense_matrix.data() + static_cast<std::size_t>(m) * N;
      double acc = 0.0;
      for (int n = 0; n < N; ++n) acc += row[n] * x[n];
      y[m] = acc;
    }
    return y;
  }
  // CustomSvd: y = U * diag(sigma) * (first M rows of V^T) x
  Vector vt = apply_vt(x);
  Vector d(M);
  for (int m = 0; m < M; ++m) d[m] = singular_values[m] * vt[m];
  Vector y(M, 0.0);
  for (int m = 0; m < M; ++m) {
    const double* row = custom_u.data() + static_cast<std::size_t>(m) * M;
    double acc = 0.0;
    for (int j = 0; j < M; ++j) acc += row[j] * d[j];
    y[m] = acc;
  }
  return y;
}

Vector SensingEnsemble::adjoint(const Vector& z) const {
  if (static_cast<int>(z.size()) != M)
    throw std::invalid_argument("adjoint: length mismatch");
  if (kind == EnsembleKind::PartialHadamard) {
    Vector w(N, 0.0);
    for (int m = 0; m < M; ++m)
      w[row_selection[m]] = singular_values[m] * z[m];
    fwht_inplace(w.data(), N);
    double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (auto& v : w) v *= scale;
    return w;
  }
  if (kind == EnsembleKind::IidGaussian) {
    Vector x(N, 0.0);
    for (int m = 0; m < M; ++m) {
      const double* row = dense_matrix.data() + static_cast<std::size_t>(m) * N;
      double zm = z[m];
      for (int n = 0; n < N; ++n) x[n] += row[n] * zm;
    }
    return x;
  }
  Vector d(M, 0.0);
  for (int j = 0; j < M; ++j) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m)
      acc += custom_u[static_cast<std::size_t>(m) * M + j] * z[m];
    d[j] = singular_values[j] * acc;
  }
  Vector full(N, 0.0);
  std::copy(d.begin(), d.end(), full.begin());
  return apply_v(full);
}

bool SensingEnsemble::has_full_right_factor() const {
  return kind != EnsembleKind::IidGaussian;
}

Vector SensingEnsemble::apply_vt(const Vector& u) const {
  if (static_cast<int>(u.size()) != N)
    throw std::invalid_argument("apply_vt: length mismatch");
  if (kind == EnsembleKind::PartialHadamard) {
    Vector w = u;
    fwht_inplace(w.data(), N);
    double scale = 1.0 / std::sqrt(static_cast<double>(N));
    Vector out(N);
    for (int m = 0; m < M; ++m) out[m] = w[row_selection[m]] * scale;
    for (int j = 0; j < N - M; ++j) out[M + j] = w[unselected[j]] * scale;
    return out;
  }
  if (kind == EnsembleKind::CustomSvd) {
    Vector out(N, 0.0);
    for (int j = 0; j < N; ++j) {
      double acc = 0.0;
      for (int n = 0; n < N; ++n)
        acc += custom_v[static_cast<std::size_t>(n) * N + j] * u[n];
      out[j] = acc;
    }
    return out;
  }
  throw std::logic_error("apply_vt: full right factor unavailable");
}

Vector SensingEnsemble::apply_v(const Vector& u) const {
  if (static_cast<int>(u.size()) != N)
    throw std::invalid_argument("apply_v: length mismatch");
  if (kind == EnsembleKind::PartialHadamard) {
    Vector w(N, 0.0);
    for (int m = 0; m < M; ++m) w[row_selection[m]] = u[m];
    for (int j = 0; j < N - M; ++j) w[unselected[j]] = u[M + j];
    fwht_inplace(w.data(), N);
    double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (auto& v : w) v *= scale;
    return w;
  }
  if (kind == EnsembleKind::CustomSvd) {
    Vector out(N, 0.0);
    for (int n = 0; n < N; ++n) {
      const double* row = custom_v.data() + static_cast<std::size_t>(n) * N;
      double acc = 0.0;
      for (int j = 0; j < N; ++j) acc += row[j] * u[j];
      out[n] = acc;
    }
    return out;
  }
  throw std::logic_error("apply_v: full right factor unavailable");
}

Vector SensingEnsemble::apply_ut(const Vector& y) const {
  if (static_cast<int>(y.size()) != M)
    throw std::invalid_argument("apply_ut: length mismatch");
  if (kind == EnsembleKind::PartialHadamard) return y;
  const Vector* u = nullptr;
  if (kind == EnsembleKind::CustomSvd) {
    u = &custom_u;
  } else {
    u = &svd().u;
  }
  Vector out(M, 0.0);
  for (int j = 0; j < M; ++j) {
    double acc = 0.0;
    for (int m = 0; m < M; ++m)
      acc += (*u)[static_cast<std::size_t>(m) * M + j] * y[m];
    out[j] = acc;
  }
  return out;
}

Vector SensingEnsemble::apply_v_cols(const Vector& d) const {
  if (static_cast<int>(d.size()) != M)
    throw std::invalid_argument("apply_v_cols: length mismatch");
  if (kind == EnsembleKind::PartialHadamard || kind == EnsembleKind::CustomSvd) {
    Vector full(N, 0.0);
    std::copy(d.begin(), d.end(), full.begin());
    return apply_v(full);
  }
  const auto& factors = svd();
  Vector out(N, 0.0);
  for (int n = 0; n < N; ++n) {
    const double* row = factors.v.data() + static_cast<std::size_t>(n) * M;
    double acc = 0.0;
    for (int j = 0; j < M; ++j) acc += row[j] * d[j];
    out[n] = acc;
  }
  return out;
}

double SensingEnsemble::trace_gram() const {
  if (kind == EnsembleKind::IidGaussian) {
    double acc = 0.0;
    for (double v : dense_matrix) acc += v * v;
    return acc;
  }
  double acc = 0.0;
  for (double s : singular_values) acc += s * s;
  return acc;
}

const SvdFactors& SensingEnsemble::svd() const {
  if (!svd_cache_) {
    auto factors = std::make_shared<SvdFactors>();
    if (kind == EnsembleKind::IidGaussian) {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
          a(dense_matrix.data(), M, N);
      Eigen::BDCSVD<Eigen::MatrixXd> svd(
          a, Eigen::ComputeThinU | Eigen::ComputeThinV);
      factors->singular_values.assign(svd.singularValues().data(),
                                      svd.singularValues().data() + M);
      factors->u.resize(static_cast<std::size_t>(M) * M);
      factors->v.resize(static_cast<std::size_t>(N) * M);
      for (int m = 0; m < M; ++m)
        for (int j = 0; j < M; ++j)
          factors->u[static_cast<std::size_t>(m) * M + j] = svd.matrixU()(m, j);
      for (int n = 0; n < N; ++n)
        for (int j = 0; j < M; ++j)
          factors->v[static_cast<std::size_t>(n) * M + j] = svd.matrixV()(n, j);
    } else {
      factors->singular_values = singular_values;
    }
    svd_cache_ = std::move(factors);
  }
  return *svd_cache_;
}

Vector SensingEnsemble::dense() const {
  Vector a(static_cast<std::size_t>(M) * N, 0.0);
  Vector e(N, 0.0);
  for (int n = 0; n < N; ++n) {
    e[n] = 1.0;
    Vector col = forward(e);
    e[n] = 0.0;
    for (int m = 0; m < M; ++m) a[static_cast<std::size_t>(m) * N + n] = col[m];
  }
  return a;
}

SensingEnsemble sample_partial_hadamard(int M, int N, const Vector& sigma,
                                        Rng& rng) {
  if (!is_power_of_two(N))
    throw std::invalid_argument("sample_partial_hadamard: N must be a power of two");
  if (M > N) throw std::invalid_argument("sample_partial_hadamard: M > N");
  if (static_cast<int>(sigma.size()) != M)
    throw std::invalid_argument("sample_partial_hadamard: sigma length != M");
  SensingEnsemble e;
  e.M = M;
  e.N = N;
  e.kind = EnsembleKind::PartialHadamard;
  e.singular_values = sigma;
  // Partial Fisher-Yates: the first M positions of a uniform permutation.
  std::vector<int> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < M; ++i) {
    int j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(N - i)));
    std::swap(perm[i], perm[j]);
  }
  e.row_selection.assign(perm.begin(), perm.begin() + M);
  e.unselected.assign(perm.begin() + M, perm.end());
  std::sort(e.unselected.begin(), e.unselected.end());
  return e;
}

SensingEnsemble sample_iid_gaussian(int M, int N, Rng& rng, double gamma) {
  SensingEnsemble e;
  e.M = M;
  e.N = N;
  e.kind = EnsembleKind::IidGaussian;
  e.dense_matrix.resize(static_cast<std::size_t>(M) * N);
  double scale = 1.0 / std::sqrt(static_cast<double>(M));
  double mean = std::sqrt(gamma / M);
  for (auto& v : e.dense_matrix) v = mean + scale * rng.normal();
  return e;
}

SensingEnsemble make_custom_svd(int M, int N, const Vector& u,
                                const Vector& singular_values,
                                const Vector& v) {
  if (static_cast<int>(singular_values.size()) != M)
    throw std::invalid_argument("make_custom_svd: singular value count != M");
  if (u.size() != static_cast<std::size_t>(M) * M ||
      v.size() != static_cast<std::size_t>(N) * N)
    throw std::invalid_argument("make_custom_svd: factor shape mismatch");
  SensingEnsemble e;
  e.M = M;
  e.N = N;
  e.kind = EnsembleKind::CustomSvd;
  e.singular_values = singular_values;
  e.custom_u = u;
  e.custom_v = v;
  return e;
}

Vector sample_signal(const SignalPrior& prior, int N, Rng& rng) {
  if (prior.rho <= 0.0 || prior.rho > 1.0)
    throw std::invalid_argument("sample_signal: rho must lie in (0, 1]");
  Vector x(N, 0.0);
  double amp = 1.0 / std::sqrt(prior.rho);
  for (int n = 0; n < N; ++n) {
    // One uniform and one conditional normal per element keeps the draw
    // count independent of the realized support.
    double u = rng.uniform01();
    double g = rng.normal();
    if (u < prior.rho) x[n] = amp * g;
  }
  return x;
}

Measurement measure(const SensingEnsemble& ensemble, const Vector& x,
                    double noise_variance, Rng& rng) {
  if (noise_variance < 0.0)
    throw std::invalid_argument("measure: negative noise variance");
  Measurement m;
  m.noise_variance = noise_variance;
  m.y = ensemble.forward(x);
  m.noise.assign(ensemble.M, 0.0);
  if (noise_variance > 0.0) {
    double s = std::sqrt(noise_variance);
    for (int i = 0; i < ensemble.M; ++i) m.noise[i] = s * rng.normal();
    for (int i = 0; i < ensemble.M; ++i) m.y[i] += m.noise[i];
  }
  return m;
}

}  // namespace camp
