#pragma once
// Periodic even Ablowitz-Ladik lattice.
//
// The lattice carries N complex amplitudes q_0..q_{N-1} with q_{n+N} = q_n and
// the even symmetry q_{N-n} = q_n. The grid spacing is h = 1/N; factors of
// 1/h^2 are computed as N^2 so no rounding enters through h itself.
//
//   i dq_n/dt = (1/h^2)(q_{n+1} - 2 q_n + q_{n-1})
//               + |q_n|^2 (q_{n+1} + q_{n-1}) - 2 w^2 q_n
//
// plus an optional dissipation-free perturbation controlled by eps, alpha1,
// alpha2 (see perturbed_rhs).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace allab {

using cx = std::complex<double>;

struct LatticeSize {
  int n = 0;

  double h() const { return 1.0 / static_cast<double>(n); }
  double inv_h2() const { return static_cast<double>(n) * static_cast<double>(n); }
  // number of independent cosine modes above the carrier
  int m() const { return (n % 2 == 0) ? n / 2 : (n - 1) / 2; }
};

struct ALParams {
  double omega = 1.0;
};

struct PerturbationParams {
  double eps = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

struct LatticeState {
  LatticeSize size{};
  std::vector<cx> q;

  static LatticeState uniform(int n, cx value) {
    return {LatticeSize{n}, std::vector<cx>(static_cast<size_t>(n), value)};
  }
  static LatticeState zero(int n) { return uniform(n, cx{0.0, 0.0}); }
};

inline double max_abs(const LatticeState& st) {
  double m = 0.0;
  for (const cx& v : st.q) m = std::max(m, std::abs(v));
  return m;
}

// largest |q_n - q_{N-n}|, zero for exactly even states
inline double evenness_defect(const LatticeState& st) {
  const int n = st.size.n;
  double worst = 0.0;
  for (int k = 1; k < n; ++k)
    worst = std::max(worst, std::abs(st.q[static_cast<size_t>(k)] - st.q[static_cast<size_t>(n - k)]));
  return worst;
}

// projection onto the even subspace, q_n <- (q_n + q_{N-n})/2
inline void symmetrize(LatticeState& st) {
  const int n = st.size.n;
  for (int k = 1; k < n - k; ++k) {
    cx avg = 0.5 * (st.q[static_cast<size_t>(k)] + st.q[static_cast<size_t>(n - k)]);
    st.q[static_cast<size_t>(k)] = avg;
    st.q[static_cast<size_t>(n - k)] = avg;
  }
}

inline std::vector<cx> al_rhs(const LatticeState& st, const ALParams& par) {
  const int n = st.size.n;
  const double ih2 = st.size.inv_h2();
  const double w2 = par.omega * par.omega;
  std::vector<cx> out(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const cx qn = st.q[static_cast<size_t>(k)];
    const cx qp = st.q[static_cast<size_t>((k + 1) % n)];
    const cx qm = st.q[static_cast<size_t>((k + n - 1) % n)];
    const cx bracket = ih2 * (qp - 2.0 * qn + qm) + std::norm(qn) * (qp + qm) - 2.0 * w2 * qn;
    out[static_cast<size_t>(k)] = cx{0.0, -1.0} * bracket;
  }
  return out;
}

struct PerturbationTerms {
  std::vector<cx> g1;
  std::vector<cx> g2;
};

// site-local source terms of the perturbation, written against conj(q):
//   g1_n = (rho_n/h^2) ln rho_n + (q_n + conj q_n) conj q_n
//   g2_n = 2 q_n (rho_n/h^2) ln rho_n + (q_n^2 + conj q_n^2) conj q_n
// with rho_n = 1 + h^2 |q_n|^2
inline PerturbationTerms perturbation_terms(const LatticeState& st) {
  const int n = st.size.n;
  const double ih2 = st.size.inv_h2();
  PerturbationTerms out;
  out.g1.resize(static_cast<size_t>(n));
  out.g2.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const cx qn = st.q[static_cast<size_t>(k)];
    const cx qc = std::conj(qn);
    const double rho = 1.0 + std::norm(qn) / ih2;
    const double ell = rho * ih2 * std::log(rho);
    out.g1[static_cast<size_t>(k)] = ell + (qn + qc) * qc;
    out.g2[static_cast<size_t>(k)] = 2.0 * qn * ell + (qn * qn + qc * qc) * qc;
  }
  return out;
}

inline std::vector<cx> perturbed_rhs(const LatticeState& st, const ALParams& par,
                                     const PerturbationParams& pp) {
  const int n = st.size.n;
  const double ih2 = st.size.inv_h2();
  std::vector<cx> out = al_rhs(st, par);
  if (pp.eps == 0.0) return out;
  for (int k = 0; k < n; ++k) {
    const cx qn = st.q[static_cast<size_t>(k)];
    const cx qc = std::conj(qn);
    const double rho = 1.0 + std::norm(qn) / ih2;
    const double ell = rho * ih2 * std::log(rho);
    const cx p1 = ell + (qn + qc) * qn;
    const cx p2 = 2.0 * qc * ell + (qn * qn + qc * qc) * qn;
    out[static_cast<size_t>(k)] += cx{0.0, -1.0} * (pp.eps * (pp.alpha1 * p1 + pp.alpha2 * p2));
  }
  return out;
}

// I2 = sum_n conj(q_n) (q_{n+1} + q_{n-1}); real on even states
inline cx i2_invariant(const LatticeState& st) {
  const int n = st.size.n;
  cx acc{0.0, 0.0};
  for (int k = 0; k < n; ++k) {
    acc += std::conj(st.q[static_cast<size_t>(k)]) *
           (st.q[static_cast<size_t>((k + 1) % n)] + st.q[static_cast<size_t>((k + n - 1) % n)]);
  }
  return acc;
}

// spatially uniform solution q_c(t) = a exp(-i [2 (a^2 - w^2) t - gamma])
inline cx uniform_orbit(double a, double omega, double gamma, double t) {
  const double phase = 2.0 * (a * a - omega * omega) * t - gamma;
  return a * std::exp(cx{0.0, -phase});
}

struct AmplitudeWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double a) const { return a > lo && a < hi; }
};

// amplitudes for which exactly the first cosine mode is linearly unstable:
// N tan(pi/N) < a < N tan(2 pi/N), with an unbounded upper end for N = 3, 4
// where tan(2 pi/N) is at or past the pole
inline AmplitudeWindow amplitude_window(int n) {
  if (n < 3) throw Error("amplitude_window: need n >= 3");
  const double dn = static_cast<double>(n);
  const double lo = dn * std::tan(std::numbers::pi / dn);
  const double hi = (n <= 4) ? std::numeric_limits<double>::infinity()
                             : dn * std::tan(2.0 * std::numbers::pi / dn);
  return {lo, hi};
}

// midpoint used by sweeps; cap stands in for the open upper end when the
// window is unbounded
inline double window_midpoint(int n, double cap = 12.0) {
  AmplitudeWindow w = amplitude_window(n);
  return 0.5 * (w.lo + std::min(w.hi, cap));
}

struct LinearGrowthRates {
  // Omega_j^(+) for j = 0..M; the paired rate is the negative
  std::vector<cx> omega;

  cx plus(int j) const { return omega[static_cast<size_t>(j)]; }
  cx minus(int j) const { return -omega[static_cast<size_t>(j)]; }
};

// growth rates of the cosine modes cos(k_j n), k_j = 2 pi j / N, linearized
// about the uniform state of amplitude a:
//   Omega_j = +- 2 sin k_j sqrt(a^2 + N^2) sqrt(a^2 - N^2 tan^2(k_j/2))
// evaluated through the equivalent polynomial-in-sin form, which stays finite
// at k_j = pi where tan blows up
inline LinearGrowthRates linearized_growth_rates(double a, int n) {
  if (n < 3) throw Error("linearized_growth_rates: need n >= 3");
  const double dn = static_cast<double>(n);
  const int m = LatticeSize{n}.m();
  LinearGrowthRates out;
  out.omega.resize(static_cast<size_t>(m) + 1);
  const double common = 2.0 * std::sqrt(a * a + dn * dn);
  for (int j = 0; j <= m; ++j) {
    const double kj = 2.0 * std::numbers::pi * j / dn;
    const double sk = std::sin(kj);
    const double sh = std::sin(0.5 * kj);
    const double arg = a * a * sk * sk - 4.0 * dn * dn * sh * sh * sh * sh;
    out.omega[static_cast<size_t>(j)] = common * std::sqrt(cx{arg, 0.0});
  }
  return out;
}

// orientation angle of the unstable mode frame:
//   vtheta = -(1/2) arctan( sqrt((a^2+N^2) sin^2(2pi/N) (a^2 - N^2 tan^2(pi/N)))
//                           / (N^2 - (N^2+a^2) cos(2pi/N)) )
// taken with the two-argument arctangent so the angle varies continuously
// when the denominator crosses zero inside the amplitude window
inline double vtheta_angle(double a, int n) {
  if (n < 3) throw Error("vtheta_angle: need n >= 3");
  const double dn = static_cast<double>(n);
  const double tn = dn * std::tan(std::numbers::pi / dn);
  double disc = a * a - tn * tn;
  // amplitudes at the window edge can land a rounding error below it
  if (disc < 0.0 && disc > -1e-13 * (a * a + tn * tn)) disc = 0.0;
  if (disc < 0.0) throw Error("vtheta_angle: amplitude below the window");
  const double s2 = std::sin(2.0 * std::numbers::pi / dn);
  const double num = std::sqrt((a * a + dn * dn) * s2 * s2 * disc);
  const double den = dn * dn - (dn * dn + a * a) * std::cos(2.0 * std::numbers::pi / dn);
  if (num == 0.0 && den == 0.0)
    throw DegenerateDenominator("vtheta_angle: numerator and denominator both vanish");
  return -0.5 * std::atan2(num, den);
}

struct BlockCoords {
  LatticeSize size{};
  double a = 0.0;
  double gamma = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double vtheta = 0.0;
  std::vector<cx> c;  // cosine-mode amplitudes j = 2..M
};

namespace detail {

// cos(2 pi j k / N) with the mirror symmetry k <-> N-k exact in floating point
inline std::vector<double> cosine_row(int j, int n) {
  std::vector<double> row(static_cast<size_t>(n));
  for (int k = 0; k <= n / 2; ++k) {
    double v = std::cos(2.0 * std::numbers::pi * j * k / static_cast<double>(n));
    row[static_cast<size_t>(k)] = v;
    if (k > 0 && k < n) row[static_cast<size_t>(n - k)] = v;
  }
  return row;
}

}  // namespace detail

// decompose an even state over the carrier + cosine modes,
//   q_n = e^{i gamma} [ a + (b1 e^{i vtheta} + b2 e^{-i vtheta}) cos(k_1 n)
//                         + sum_{j>=2} c_j cos(k_j n) ]
// When a_ref > 0 the mode-frame angle is evaluated at a_ref instead of the
// extracted carrier amplitude (useful near the circle where a drifts slightly).
inline BlockCoords to_block_coords(const LatticeState& st, double a_ref = 0.0) {
  const int n = st.size.n;
  const int m = st.size.m();
  std::vector<cx> mode(static_cast<size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) {
    std::vector<double> row = detail::cosine_row(j, n);
    cx acc{0.0, 0.0};
    for (int k = 0; k < n; ++k) acc += st.q[static_cast<size_t>(k)] * row[static_cast<size_t>(k)];
    const bool halfweight = (j == 0) || (2 * j == n);
    mode[static_cast<size_t>(j)] = acc * ((halfweight ? 1.0 : 2.0) / static_cast<double>(n));
  }
  BlockCoords bc;
  bc.size = st.size;
  const double a = std::abs(mode[0]);
  if (a <= 1e-14 * std::max(1.0, max_abs(st)))
    throw ZeroCarrier("to_block_coords: carrier amplitude vanishes");
  bc.a = a;
  bc.gamma = std::arg(mode[0]);
  bc.vtheta = vtheta_angle(a_ref > 0.0 ? a_ref : a, n);
  const double cth = std::cos(bc.vtheta), sth = std::sin(bc.vtheta);
  if (std::abs(sth) < 1e-12 || std::abs(cth) < 1e-12)
    throw SingularModeSystem("to_block_coords: mode frame angle degenerate");
  const cx u = mode[1] * std::exp(cx{0.0, -bc.gamma});
  const double sum = u.real() / cth;   // b1 + b2
  const double diff = u.imag() / sth;  // b1 - b2
  bc.b1 = 0.5 * (sum + diff);
  bc.b2 = 0.5 * (sum - diff);
  bc.c.resize(static_cast<size_t>(std::max(0, m - 1)));
  for (int j = 2; j <= m; ++j)
    bc.c[static_cast<size_t>(j - 2)] = mode[static_cast<size_t>(j)] * std::exp(cx{0.0, -bc.gamma});
  return bc;
}

inline LatticeState from_block_coords(const BlockCoords& bc) {
  const int n = bc.size.n;
  const int m = bc.size.m();
  LatticeState st = LatticeState::uniform(n, cx{0.0, 0.0});
  const cx amp1 = bc.b1 * std::exp(cx{0.0, bc.vtheta}) + bc.b2 * std::exp(cx{0.0, -bc.vtheta});
  std::vector<double> row1 = detail::cosine_row(1, n);
  std::vector<cx> acc(static_cast<size_t>(n), cx{bc.a, 0.0});
  for (int k = 0; k < n; ++k) acc[static_cast<size_t>(k)] += amp1 * row1[static_cast<size_t>(k)];
  for (int j = 2; j <= m; ++j) {
    std::vector<double> row = detail::cosine_row(j, n);
    const cx cj = bc.c[static_cast<size_t>(j - 2)];
    for (int k = 0; k < n; ++k) acc[static_cast<size_t>(k)] += cj * row[static_cast<size_t>(k)];
  }
  const cx phase = std::exp(cx{0.0, bc.gamma});
  for (int k = 0; k < n; ++k) st.q[static_cast<size_t>(k)] = phase * acc[static_cast<size_t>(k)];
  return st;
}

}
