#include "camp/spectral.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <system_error>

namespace camp {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

}  // namespace

double SpectralProfile::eta(double z) const {
  switch (kind) {
    case SpectrumKind::Empirical: {
      double acc = static_cast<double>(N - static_cast<int>(gram_eigenvalues.size()));
      for (double lam : gram_eigenvalues) acc += 1.0 / (1.0 + z * lam);
      return acc / N;
    }
    case SpectrumKind::AsymptoticGeometric: {
      double lnk = std::log(kappa);
      double c = 2.0 * lnk / delta;
      double k2 = kappa * kappa;
      double num = delta * (k2 - 1.0) + 2.0 * k2 * z * lnk;
      double den = delta * (k2 - 1.0) + 2.0 * z * lnk;
      return 1.0 - std::log(num / den) / c;
    }
    case SpectrumKind::MarchenkoPastur: {
      // Positive root of z*eta^2 + (delta + z*delta - z)*eta - delta = 0,
      // written in the cancellation-free form 2*delta / (b + sqrt(b^2+4zd)).
      double b = delta + z * delta - z;
      double disc = b * b + 4.0 * z * delta;
      return 2.0 * delta / (b + std::sqrt(disc));
    }
    case SpectrumKind::ExplicitMoments: {
      // Truncated alternating series; valid within its radius of
      // convergence only.
      double acc = 0.0;
      double zp = 1.0;
      for (std::size_t k = 0; k < moments.size(); ++k) {
        acc += moments[k] * zp;
        zp *= -z;
      }
      return acc;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<qreal> SpectralProfile::moments_quad(int k_max) const {
  std::vector<qreal> mu(static_cast<std::size_t>(k_max) + 1);
  mu[0] = 1;
  switch (kind) {
    case SpectrumKind::AsymptoticGeometric: {
      qreal qd = delta;
      qreal qk = kappa;
      qreal c = 2 * qlog(qk) / qd;
      qreal r = 1 / (qk * qk);
      qreal base = c / (1 - r);
      qreal basep = 1;
      qreal rp = 1;
      for (int k = 1; k <= k_max; ++k) {
        basep *= base;
        rp *= r;
        mu[k] = basep * (1 - rp) / (k * c);
      }
      break;
    }
    case SpectrumKind::MarchenkoPastur: {
      qreal lambda = 1 / static_cast<qreal>(delta);
      for (int k = 1; k <= k_max; ++k) {
        // mu_k = sum_j [C(k,j) C(k-1,j) / (j+1)] lambda^j (Narayana weights).
        qreal acc = 0;
        qreal binom_k = 1;    // C(k, j)
        qreal binom_km1 = 1;  // C(k-1, j)
        qreal lp = 1;
        for (int j = 0; j <= k - 1; ++j) {
          acc += binom_k * binom_km1 / (j + 1) * lp;
          binom_k = binom_k * (k - j) / (j + 1);
          binom_km1 = binom_km1 * (k - 1 - j) / (j + 1);
          lp *= lambda;
        }
        mu[k] = acc;
      }
      break;
    }
    case SpectrumKind::Empirical: {
      std::vector<qreal> power(gram_eigenvalues.size(), 1);
      for (int k = 1; k <= k_max; ++k) {
        qreal acc = 0;
        for (std::size_t i = 0; i < power.size(); ++i) {
          power[i] *= static_cast<qreal>(gram_eigenvalues[i]);
          acc += power[i];
        }
        mu[k] = acc / N;
      }
      break;
    }
    case SpectrumKind::ExplicitMoments: {
      if (static_cast<int>(moments.size()) <= k_max)
        throw std::invalid_argument(
            "moments_quad: profile stores fewer moments than requested");
      for (int k = 1; k <= k_max; ++k) mu[k] = moments[k];
      break;
    }
  }
  return mu;
}

SpectralProfile empirical_moments(const std::vector<double>& singular_values,
                                  int N, int k_max) {
  if (k_max < 1) throw std::invalid_argument("empirical_moments: k_max >= 1");
  SpectralProfile p;
  p.kind = SpectrumKind::Empirical;
  p.N = N;
  p.gram_eigenvalues.reserve(singular_values.size());
  for (double s : singular_values) p.gram_eigenvalues.push_back(s * s);
  auto mu = p.moments_quad(k_max);
  p.moments.assign(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i)
    p.moments[i] = static_cast<double>(mu[i]);
  return p;
}

SpectralProfile asymptotic_moments_geometric(double delta, double kappa,
                                             int k_max) {
  if (delta <= 0.0 || delta > 1.0)
    throw std::invalid_argument("asymptotic_moments_geometric: delta in (0,1]");
  if (kappa <= 1.0)
    throw std::invalid_argument(
        "asymptotic_moments_geometric: kappa > 1 required; the kappa = 1 "
        "limit is the empirical equal-eigenvalue spectrum");
  SpectralProfile p;
  p.kind = SpectrumKind::AsymptoticGeometric;
  p.delta = delta;
  p.kappa = kappa;
  auto mu = p.moments_quad(k_max);
  p.moments.assign(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i)
    p.moments[i] = static_cast<double>(mu[i]);
  return p;
}

SpectralProfile marchenko_pastur_moments(double delta, int k_max) {
  if (delta <= 0.0 || delta > 1.0)
    throw std::invalid_argument("marchenko_pastur_moments: delta in (0,1]");
  SpectralProfile p;
  p.kind = SpectrumKind::MarchenkoPastur;
  p.delta = delta;
  auto mu = p.moments_quad(k_max);
  p.moments.assign(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i)
    p.moments[i] = static_cast<double>(mu[i]);
  return p;
}

SpectralProfile profile_from_moments(const std::vector<double>& moments) {
  if (moments.empty() || moments[0] != 1.0)
    throw std::invalid_argument("profile_from_moments: mu_0 must be 1");
  SpectralProfile p;
  p.kind = SpectrumKind::ExplicitMoments;
  p.moments = moments;
  return p;
}

TapTable tap_recursion(const SpectralProfile& profile, int T, int k_lo) {
  if (T < 0) throw std::invalid_argument("tap_recursion: T >= 0");
  if (k_lo != 0 && k_lo != 1)
    throw std::invalid_argument("tap_recursion: k_lo must be 0 or 1");
  const int k_hi0 = T + 1;  // row 0 runs up to k = T + 1, needing mu_{T+2}
  std::vector<qreal> mu = profile.moments_quad(T + 2);

  // Rows in extended precision; row t holds k = k_lo .. T + 1 - t.
  std::vector<std::vector<qreal>> rows(static_cast<std::size_t>(T) + 1);
  std::vector<qreal> qtaps(static_cast<std::size_t>(T) + 1, 0);

  TapTable table;
  table.T = T;
  table.k_lo = k_lo;

  auto row_width = [&](int t) { return (T + 1 - t) - k_lo + 1; };
  auto finite_row = [&](const std::vector<qreal>& r) {
    for (qreal v : r)
      if (!qfinite(v)) return false;
    return true;
  };

  int rows_done = 0;
  for (int t = 0; t <= T; ++t) {
    std::vector<qreal> row(static_cast<std::size_t>(row_width(t)), 0);
    if (t == 0) {
      for (int k = k_lo; k <= k_hi0; ++k)
        row[k - k_lo] = mu[k + 1] - mu[k];
    } else if (t == 1) {
      const auto& r0 = rows[0];
      qreal tap0 = r0[1 - k_lo];
      for (int k = k_lo; k <= T; ++k)
        row[k - k_lo] = r0[k - k_lo] - r0[k + 1 - k_lo] + tap0 * mu[k + 1];
    } else {
      const auto& prev = rows[t - 1];
      for (int k = k_lo; k <= T + 1 - t; ++k) {
        qreal acc = prev[k - k_lo] - prev[k + 1 - k_lo];
        for (int tau = 1; tau <= t - 1; ++tau)
          acc += qtaps[t - tau - 1] *
                 (rows[tau][k - k_lo] - rows[tau - 1][k - k_lo]);
        acc += qtaps[t - 1] * mu[k + 1];
        row[k - k_lo] = acc;
      }
    }
    if (!finite_row(row)) {
      table.overflowed = true;
      table.first_bad_t = t;
      break;
    }
    qtaps[t] = row[1 - k_lo];
    rows[t] = std::move(row);
    rows_done = t + 1;
  }

  table.g.resize(rows_done);
  table.taps.resize(rows_done);
  for (int t = 0; t < rows_done; ++t) {
    table.g[t].resize(rows[t].size());
    for (std::size_t i = 0; i < rows[t].size(); ++i)
      table.g[t][i] = static_cast<double>(rows[t][i]);
    table.taps[t] = static_cast<double>(qtaps[t]);
  }
  return table;
}

std::vector<double> taps_geometric_closed_form(double delta, double kappa,
                                               int T) {
  if (delta <= 0.0 || delta > 1.0)
    throw std::invalid_argument("taps_geometric_closed_form: delta in (0,1]");
  if (kappa <= 1.0)
    throw std::invalid_argument(
        "taps_geometric_closed_form: kappa > 1 required; use "
        "taps_equal_spectrum for the kappa = 1 limit");
  double c = 2.0 * std::log(kappa) / delta;
  // h_t = C^{t-1}/t! - C^t/(t+1)!; the shared factor p_t = C^{t-1}/t! is
  // updated multiplicatively so neither power nor factorial overflows alone.
  std::vector<double> h(static_cast<std::size_t>(T) + 2, 0.0);
  double p = 1.0;  // p_1
  for (int t = 1; t <= T + 1; ++t) {
    h[t] = p * (1.0 - c / (t + 1));
    p *= c / (t + 1);
  }
  std::vector<double> g(static_cast<std::size_t>(T) + 1, 0.0);
  g[0] = -h[1];
  for (int t = 1; t <= T; ++t) {
    double acc = -h[t + 1];
    for (int tau = 0; tau <= t - 1; ++tau) acc += h[t - tau] * g[tau];
    g[t] = acc;
  }
  double shift = c / (kappa * kappa - 1.0);
  for (auto& v : g) v += shift;
  return g;
}

std::vector<double> taps_equal_spectrum(double delta, int T) {
  if (delta <= 0.0 || delta > 1.0)
    throw std::invalid_argument("taps_equal_spectrum: delta in (0,1]");
  return std::vector<double>(static_cast<std::size_t>(T) + 1,
                             (1.0 - delta) / delta);
}

std::vector<EtaCheckRow> verify_tap_generating_function(
    const std::vector<double>& taps, const SpectralProfile& profile,
    const std::vector<double>& y_grid) {
  if (taps.empty())
    throw std::invalid_argument("verify_tap_generating_function: empty taps");
  std::vector<EtaCheckRow> out;
  out.reserve(y_grid.size());
  const std::size_t T = taps.size() - 1;
  for (double y : y_grid) {
    EtaCheckRow row;
    row.y = y;
    double g1 = 0.0;
    double yp = 1.0;
    for (double tap : taps) {
      g1 += tap * yp;
      yp *= y;
    }
    row.g1 = g1;
    row.denom = 1.0 - y * g1;

    // Geometric tail estimate from the last two taps; heuristic because the
    // true tail decay is unknown to the caller.
    if (T >= 1 && taps[T] != 0.0 && taps[T - 1] != 0.0) {
      double r = std::fabs(taps[T] / taps[T - 1]);
      double ry = r * std::fabs(y);
      double yT = std::pow(std::fabs(y), static_cast<double>(T));
      row.tail_bound = ry < 1.0
                           ? std::fabs(taps[T]) * yT * ry / (1.0 - ry)
                           : std::numeric_limits<double>::infinity();
    } else {
      row.tail_bound = 0.0;
    }

    if (y == 0.0) {
      row.x_s = 0.0;
      row.residual = std::fabs(profile.eta(0.0) - 1.0);
    } else if (row.denom <= 1e-12) {
      // Pole region of the generating-function relation: reported, never
      // judged against a tolerance.
      row.flagged = true;
      row.x_s = std::numeric_limits<double>::infinity();
      row.residual = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.x_s = y / ((1.0 - y) * row.denom);
      row.residual = std::fabs(profile.eta(row.x_s) - (1.0 - y));
    }
    out.push_back(row);
  }
  return out;
}

std::string TapTable::serialize() const {
  std::string out;
  for (std::size_t t = 0; t < g.size(); ++t) {
    for (std::size_t i = 0; i < g[t].size(); ++i) {
      out += std::to_string(t);
      out += ' ';
      out += std::to_string(static_cast<int>(i) + k_lo);
      out += ' ';
      out += format_double(g[t][i]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace camp
