#pragma once
// Floquet theory for the lattice Lax pair.
//
// The spatial half of the pair advances a two-component eigenfunction by
//   L_n(z) = [[z, i h q_n], [i h conj(q_n), 1/z]],   det L_n = rho_n,
// with rho_n = 1 + h^2 |q_n|^2. The machinery here builds the fundamental
// matrix across one period, the discriminant Delta(z) = tr M(N), its z
// derivatives and variational gradients, and locates and classifies the
// spectrum: periodic and antiperiodic points (Delta = +-2D), critical points
// (dDelta/dz = 0), and their coincidences (double and multiple points).
// D^2 = prod_n rho_n is the determinant of the fundamental matrix; the
// normalized discriminant is Delta~ = Delta / D.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "mat2.hpp"

namespace allab {

inline void require_nonzero_z(cx z) {
  if (std::abs(z) < 1e-12) throw ZeroSpectralParameter("spectral parameter too close to zero");
}

inline Mat2 transfer_matrix(cx z, cx qn, double h) {
  require_nonzero_z(z);
  return {z, cx{0.0, h} * qn, cx{0.0, h} * std::conj(qn), 1.0 / z};
}

struct TransferProducts {
  // prefix[k] = L_{k-1} ... L_0 (prefix[0] = I), k = 0..N
  std::vector<Mat2> prefix;
  // running determinants, detpfx[k] = rho_0 ... rho_{k-1}
  std::vector<double> detpfx;
};

inline TransferProducts transfer_products(cx z, const LatticeState& st) {
  require_nonzero_z(z);
  const int n = st.size.n;
  const double h = st.size.h();
  TransferProducts tp;
  tp.prefix.resize(static_cast<size_t>(n) + 1);
  tp.detpfx.resize(static_cast<size_t>(n) + 1);
  tp.prefix[0] = Mat2::identity();
  tp.detpfx[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    const cx qk = st.q[static_cast<size_t>(k)];
    tp.prefix[static_cast<size_t>(k) + 1] = transfer_matrix(z, qk, h) * tp.prefix[static_cast<size_t>(k)];
    tp.detpfx[static_cast<size_t>(k) + 1] =
        tp.detpfx[static_cast<size_t>(k)] * (1.0 + h * h * std::norm(qk));
  }
  return tp;
}

inline Mat2 fundamental_matrix(cx z, const LatticeState& st) {
  return transfer_products(z, st).prefix[static_cast<size_t>(st.size.n)];
}

// D = sqrt(prod_n rho_n) > 0
inline double floquet_d(const LatticeState& st) {
  const double h = st.size.h();
  double p = 1.0;
  for (const cx& v : st.q) p *= 1.0 + h * h * std::norm(v);
  return std::sqrt(p);
}

struct Discriminant {
  cx delta{};
  double d = 1.0;
  cx tilde() const { return delta / d; }
};

inline Discriminant discriminant(cx z, const LatticeState& st) {
  return {fundamental_matrix(z, st).trace(), floquet_d(st)};
}

// dDelta/dz and d2Delta/dz2 through term-by-term differentiation of the
// ordered product. dL/dz = diag(1, -1/z^2) does not depend on the site, which
// keeps the double sum cheap.
inline cx discriminant_z_derivative(cx z, const LatticeState& st, int order) {
  require_nonzero_z(z);
  if (order != 1 && order != 2) throw Error("discriminant_z_derivative: order must be 1 or 2");
  const int n = st.size.n;
  const double h = st.size.h();
  TransferProducts tp = transfer_products(z, st);
  std::vector<Mat2> suffix(static_cast<size_t>(n));  // suffix[k] = L_{N-1} ... L_{k+1}
  suffix[static_cast<size_t>(n) - 1] = Mat2::identity();
  for (int k = n - 2; k >= 0; --k)
    suffix[static_cast<size_t>(k)] =
        suffix[static_cast<size_t>(k) + 1] * transfer_matrix(z, st.q[static_cast<size_t>(k) + 1], h);

  const Mat2 lp{1.0, 0.0, 0.0, -1.0 / (z * z)};
  if (order == 1) {
    cx acc{0.0, 0.0};
    for (int k = 0; k < n; ++k)
      acc += (suffix[static_cast<size_t>(k)] * lp * tp.prefix[static_cast<size_t>(k)]).trace();
    return acc;
  }

  const Mat2 lpp{0.0, 0.0, 0.0, 2.0 / (z * z * z)};
  cx acc{0.0, 0.0};
  for (int k = 0; k < n; ++k)
    acc += (suffix[static_cast<size_t>(k)] * lpp * tp.prefix[static_cast<size_t>(k)]).trace();
  for (int l = 0; l + 1 < n; ++l) {
    Mat2 mid = lp * tp.prefix[static_cast<size_t>(l)];
    for (int k = l + 1; k < n; ++k) {
      acc += 2.0 * (suffix[static_cast<size_t>(k)] * lp * mid).trace();
      if (k + 1 < n) mid = transfer_matrix(z, st.q[static_cast<size_t>(k)], h) * mid;
    }
  }
  return acc;
}

enum class PointKind { Regular, Periodic, Antiperiodic, Critical, Double, Multiple };

inline const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::Regular: return "regular";
    case PointKind::Periodic: return "periodic";
    case PointKind::Antiperiodic: return "antiperiodic";
    case PointKind::Critical: return "critical";
    case PointKind::Double: return "double";
    case PointKind::Multiple: return "multiple";
  }
  return "?";
}

struct SpectralPoint {
  cx z{};
  PointKind kind = PointKind::Regular;
  int multiplicity = 1;
  cx delta{};
  int m = -1;  // catalog index for uniform-state points, -1 otherwise
};

struct ClassifyConfig {
  double tau_band_rel = 1e-8;  // |Delta -+ 2D| within tau * 2D counts as a band edge
  double tau_crit_rel = 1e-8;  // |Delta'| within tau * max(1, |Delta''|) counts as critical
  double tau_mult_rel = 1e-8;  // |Delta''| within tau * N^2 D raises the multiplicity to 4
};

inline SpectralPoint classify_spectral_point(cx z, const LatticeState& st,
                                             const ClassifyConfig& cfg = {}) {
  Discriminant dd = discriminant(z, st);
  const cx d1 = discriminant_z_derivative(z, st, 1);
  const cx d2 = discriminant_z_derivative(z, st, 2);
  const double two_d = 2.0 * dd.d;
  const double res_p = std::abs(dd.delta - two_d);
  const double res_a = std::abs(dd.delta + two_d);
  const bool band_edge = std::min(res_p, res_a) <= cfg.tau_band_rel * two_d;
  const bool critical = std::abs(d1) <= cfg.tau_crit_rel * std::max(1.0, std::abs(d2));
  const double n2 = st.size.inv_h2();
  const bool flat = std::abs(d2) <= cfg.tau_mult_rel * n2 * dd.d;

  SpectralPoint p;
  p.z = z;
  p.delta = dd.delta;
  if (band_edge && critical) {
    p.kind = flat ? PointKind::Multiple : PointKind::Double;
    p.multiplicity = flat ? 4 : 2;
  } else if (band_edge) {
    p.kind = (res_p <= res_a) ? PointKind::Periodic : PointKind::Antiperiodic;
  } else if (critical) {
    p.kind = PointKind::Critical;
  }
  return p;
}

// Spectrum of the uniform state of amplitude a, from the closed form
//   Delta = 2 D cos(N beta),  z(beta) = sqrt(rho) cos beta + sqrt(rho cos^2 beta - 1),
// D = rho^{N/2}. Periodic and antiperiodic points sit at beta = m pi / N with
// parity (-1)^m; every interior m is also critical. The branch points of
// z(beta), at rho cos^2 beta = 1, put two more critical points at z = +-1.
inline std::vector<SpectralPoint> uniform_spectral_points(double a, int n) {
  if (a < 0.0 || n < 3) throw Error("uniform_spectral_points: need a >= 0 and n >= 3");
  const double dn = static_cast<double>(n);
  const double rho = 1.0 + a * a / (dn * dn);
  const double d = std::pow(rho, 0.5 * dn);
  std::vector<SpectralPoint> out;
  auto push_if_new = [&out](const SpectralPoint& p) {
    for (const SpectralPoint& q : out)
      if (std::abs(q.z - p.z) <= 1e-9 * (1.0 + std::abs(p.z))) return;
    out.push_back(p);
  };
  for (int m = 0; m <= n; ++m) {
    const double c = std::cos(std::numbers::pi * m / dn);
    const double w = rho * c * c - 1.0;
    const cx s = std::sqrt(cx{w, 0.0});
    const cx base = std::sqrt(rho) * c;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    SpectralPoint p;
    p.delta = cx{sign * 2.0 * d, 0.0};
    p.m = m;
    const bool interior = (m != 0 && m != n);
    const bool tuned = interior && std::abs(w) <= 1e-12 * (1.0 + rho * c * c);
    if (!interior) {
      p.kind = (m % 2 == 0) ? PointKind::Periodic : PointKind::Antiperiodic;
      p.multiplicity = 1;
    } else if (tuned) {
      p.kind = PointKind::Multiple;
      p.multiplicity = 4;
      p.z = base;  // the pair has collapsed onto the branch point
      push_if_new(p);
      continue;
    } else {
      p.kind = PointKind::Double;
      p.multiplicity = 2;
    }
    p.z = base + s;
    push_if_new(p);
    p.z = base - s;
    push_if_new(p);
  }
  // branch-point criticals, cos beta = +-1/sqrt(rho), z = +-1
  if (a > 0.0) {
    for (double zsign : {1.0, -1.0}) {
      const double beta = std::acos(zsign / std::sqrt(rho));
      SpectralPoint p;
      p.z = cx{zsign, 0.0};
      p.kind = PointKind::Critical;
      p.multiplicity = 1;
      p.delta = cx{2.0 * d * std::cos(dn * beta), 0.0};
      push_if_new(p);
    }
  }
  return out;
}

struct CriticalSearchConfig {
  int max_iter = 50;
  double step_tol = 1e-12;
  double dedupe_tol = 1e-6;
  double hessian_floor = 1e-14;
};

struct CriticalSearch {
  std::vector<SpectralPoint> points;
  std::vector<cx> failed;  // seeds that ran out of iterations
};

// Newton iteration on dDelta/dz with a secant fallback when the second
// derivative collapses. Converged roots are classified and deduplicated.
inline CriticalSearch find_critical_points(const LatticeState& st, const std::vector<cx>& seeds,
                                           const CriticalSearchConfig& cfg = {},
                                           const ClassifyConfig& ccfg = {}) {
  CriticalSearch result;
  for (cx seed : seeds) {
    if (std::abs(seed) < 1e-8) {
      result.failed.push_back(seed);
      continue;
    }
    cx z = seed;
    cx z_prev = z;
    cx f_prev{0.0, 0.0};
    bool have_prev = false;
    bool ok = false;
    for (int it = 0; it < cfg.max_iter; ++it) {
      const cx f = discriminant_z_derivative(z, st, 1);
      const cx fp = discriminant_z_derivative(z, st, 2);
      cx step;
      if (std::abs(fp) > cfg.hessian_floor * std::max(1.0, std::abs(f))) {
        step = f / fp;
      } else if (have_prev && std::abs(f - f_prev) > 0.0) {
        step = f * (z - z_prev) / (f - f_prev);
      } else {
        step = cx{cfg.step_tol, 0.0};  // nudge and retry
      }
      z_prev = z;
      f_prev = f;
      have_prev = true;
      z -= step;
      if (std::abs(z) < 1e-10) break;  // wandered into the pole
      if (std::abs(step) <= cfg.step_tol * std::max(1.0, std::abs(z))) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      result.failed.push_back(seed);
      continue;
    }
    bool dup = false;
    for (const SpectralPoint& p : result.points)
      if (std::abs(p.z - z) <= cfg.dedupe_tol * (1.0 + std::abs(z))) dup = true;
    if (dup) continue;
    result.points.push_back(classify_spectral_point(z, st, ccfg));
  }
  return result;
}

// catalog-based starting points for the critical search on states close to a
// uniform one
inline std::vector<cx> default_critical_seeds(const LatticeState& st) {
  double a = 0.0;
  for (const cx& v : st.q) a += std::abs(v);
  a /= static_cast<double>(st.size.n);
  std::vector<cx> seeds;
  for (const SpectralPoint& p : uniform_spectral_points(a, st.size.n))
    if (p.kind == PointKind::Double || p.kind == PointKind::Multiple ||
        p.kind == PointKind::Critical)
      seeds.push_back(p.z);
  return seeds;
}

struct DiscriminantGradient {
  std::vector<cx> dq;  // d/dq_n
  std::vector<cx> dr;  // d/dr_n, r_n = -conj(q_n)
};

// variational derivatives of Delta,
//   dDelta/dq_n = i h tr(M_{n+1}^{-1} [[0,1],[0,0]] M_n M_N)
//   dDelta/dr_n = -i h tr(M_{n+1}^{-1} [[0,0],[1,0]] M_n M_N)
inline DiscriminantGradient discriminant_gradient(cx z, const LatticeState& st) {
  const int n = st.size.n;
  const double h = st.size.h();
  TransferProducts tp = transfer_products(z, st);
  const Mat2& mfull = tp.prefix[static_cast<size_t>(n)];
  DiscriminantGradient g;
  g.dq.resize(static_cast<size_t>(n));
  g.dr.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Mat2 inv = inverse_with_det(tp.prefix[static_cast<size_t>(k) + 1],
                                      cx{tp.detpfx[static_cast<size_t>(k) + 1], 0.0});
    const Mat2 rest = tp.prefix[static_cast<size_t>(k)] * mfull;
    g.dq[static_cast<size_t>(k)] = cx{0.0, h} * (inv.a * rest.c + inv.c * rest.d);
    g.dr[static_cast<size_t>(k)] = cx{0.0, -h} * (inv.b * rest.a + inv.d * rest.b);
  }
  return g;
}

// gradient of the normalized discriminant Delta~ = Delta / D; the D variation
// contributes -Delta~ h^2 conj(q_n) / (2 rho_n) against dq and the conjugate
// pattern against dr
inline DiscriminantGradient discriminant_tilde_gradient(cx z, const LatticeState& st) {
  const int n = st.size.n;
  const double h = st.size.h();
  DiscriminantGradient g = discriminant_gradient(z, st);
  Discriminant dd = discriminant(z, st);
  const cx tilde = dd.tilde();
  for (int k = 0; k < n; ++k) {
    const cx qk = st.q[static_cast<size_t>(k)];
    const double rho = 1.0 + h * h * std::norm(qk);
    g.dq[static_cast<size_t>(k)] =
        g.dq[static_cast<size_t>(k)] / dd.d - tilde * (h * h * std::conj(qk) / (2.0 * rho));
    g.dr[static_cast<size_t>(k)] =
        g.dr[static_cast<size_t>(k)] / dd.d + tilde * (h * h * qk / (2.0 * rho));
  }
  return g;
}

struct BlochPair {
  std::vector<Vec2> plus, minus;  // sites 0..N inclusive
  std::vector<cx> wronskian;      // W_n = det(psi+_n, psi-_n)
  cx zeta;                        // Floquet multiplier of psi+ over one period, / D
  cx omega_plus, omega_minus;     // time growth rates
  cx lambda;                      // z = exp(i lambda h), principal branch
};

// Bloch eigenfunctions of the uniform state q_c(t) = a e^{-2 i theta(t)},
// theta(t) = (a^2 - w^2) t - gamma/2:
//   psi+_n = (sqrt(rho) e^{+i beta})^n e^{Omega+ t} ((1/z - kappa+) e^{-i theta}, -i h a e^{+i theta})
//   psi-_n = (sqrt(rho) e^{-i beta})^n e^{Omega- t} (-i h a e^{-i theta}, (z - kappa-) e^{+i theta})
// with 2 sqrt(rho) cos beta = z + 1/z and Omega+- = (i/h^2)[(1/z - z) sqrt(rho) e^{+-i beta} + 2 i lambda h].
inline BlochPair uniform_bloch_functions(cx z, double a, double omega, double gamma, double t,
                                         int n) {
  require_nonzero_z(z);
  const double dn = static_cast<double>(n);
  const double h = 1.0 / dn;
  const double rho = 1.0 + h * h * a * a;
  const double sr = std::sqrt(rho);
  const cx c = (z + 1.0 / z) / (2.0 * sr);
  const cx s = (z - 1.0 / z) / 2.0;  // sqrt(rho cos^2 beta - 1) on the branch carried by z
  if (std::abs(s) < 1e-6)
    throw BranchAmbiguity("uniform_bloch_functions: z at a branch point of z(beta)");
  const cx sb = std::sqrt(1.0 - c * c);
  if (std::abs(sb) < 1e-6)
    throw BranchAmbiguity("uniform_bloch_functions: sin beta vanishes");
  const cx eib = c + cx{0.0, 1.0} * sb;
  const cx emib = c - cx{0.0, 1.0} * sb;
  const cx kp = sr * eib;
  const cx km = sr * emib;
  const cx lambda = cx{0.0, -1.0} * std::log(z) * dn;
  const cx om_p = cx{0.0, 1.0} * dn * dn * ((1.0 / z - z) * kp + 2.0 * cx{0.0, 1.0} * lambda / dn);
  const cx om_m = cx{0.0, 1.0} * dn * dn * ((1.0 / z - z) * km + 2.0 * cx{0.0, 1.0} * lambda / dn);
  const double theta = (a * a - omega * omega) * t - 0.5 * gamma;
  const cx ph_m = std::exp(cx{0.0, -theta});
  const cx ph_p = std::exp(cx{0.0, theta});
  const Vec2 wp{(1.0 / z - kp) * ph_m, cx{0.0, -h * a} * ph_p};
  const Vec2 wm{cx{0.0, -h * a} * ph_m, (z - km) * ph_p};
  const cx gp = std::exp(om_p * t);
  const cx gm = std::exp(om_m * t);

  BlochPair bp;
  bp.lambda = lambda;
  bp.omega_plus = om_p;
  bp.omega_minus = om_m;
  bp.zeta = std::pow(eib, n);
  bp.plus.resize(static_cast<size_t>(n) + 1);
  bp.minus.resize(static_cast<size_t>(n) + 1);
  bp.wronskian.resize(static_cast<size_t>(n) + 1);
  cx pp{1.0, 0.0}, pm{1.0, 0.0};
  for (int k = 0; k <= n; ++k) {
    bp.plus[static_cast<size_t>(k)] = (gp * pp) * wp;
    bp.minus[static_cast<size_t>(k)] = (gm * pm) * wm;
    const Vec2& u = bp.plus[static_cast<size_t>(k)];
    const Vec2& v = bp.minus[static_cast<size_t>(k)];
    bp.wronskian[static_cast<size_t>(k)] = u.x * v.y - u.y * v.x;
    pp *= kp;
    pm *= km;
  }
  return bp;
}

// gradient of Delta~ through the Bloch representation,
//   dDelta~/dq_n = i h (zeta - 1/zeta) / (2 W_{n+1}) [psi+_{n+1,2} psi-_{n,2} + psi+_{n,2} psi-_{n+1,2}]
//   dDelta~/dr_n = i h (zeta - 1/zeta) / (2 W_{n+1}) [psi+_{n+1,1} psi-_{n,1} + psi+_{n,1} psi-_{n+1,1}]
// Valid for uniform states, where the Bloch pair is known in closed form.
inline DiscriminantGradient discriminant_tilde_gradient_bloch(cx z, double a, double omega,
                                                              double gamma, double t, int n) {
  BlochPair bp = uniform_bloch_functions(z, a, omega, gamma, t, n);
  const double h = 1.0 / static_cast<double>(n);
  const cx zf = bp.zeta - 1.0 / bp.zeta;
  DiscriminantGradient g;
  g.dq.resize(static_cast<size_t>(n));
  g.dr.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Vec2& up0 = bp.plus[static_cast<size_t>(k)];
    const Vec2& up1 = bp.plus[static_cast<size_t>(k) + 1];
    const Vec2& vm0 = bp.minus[static_cast<size_t>(k)];
    const Vec2& vm1 = bp.minus[static_cast<size_t>(k) + 1];
    const cx pref = cx{0.0, h} * zf / (2.0 * bp.wronskian[static_cast<size_t>(k) + 1]);
    g.dq[static_cast<size_t>(k)] = pref * (up1.y * vm0.y + up0.y * vm1.y);
    g.dr[static_cast<size_t>(k)] = pref * (up1.x * vm0.x + up0.x * vm1.x);
  }
  return g;
}

struct InvariantF {
  cx value;  // Delta~ at the critical point
  cx zc;
  cx second;  // d2 Delta/dz2 there, for simplicity checks
};

// F_j(q) = Delta~(z_j^c(q); q) anchored at a simple critical point. The
// critical point is re-rooted from the supplied seed for the given state.
inline InvariantF invariant_F(const LatticeState& st, cx seed,
                              const CriticalSearchConfig& cfg = {}) {
  CriticalSearch cs = find_critical_points(st, {seed}, cfg);
  if (cs.points.empty()) throw NoConvergence("invariant_F: critical search failed from seed");
  const cx zc = cs.points.front().z;
  const cx d2 = discriminant_z_derivative(zc, st, 2);
  const double n2 = st.size.inv_h2();
  Discriminant dd = discriminant(zc, st);
  if (std::abs(d2) <= 1e-10 * n2 * dd.d)
    throw NotSimpleCritical("invariant_F: critical point is not simple");
  return {dd.tilde(), zc, d2};
}

// gradient of F_j at a located critical point; the z-motion term drops out
// because dDelta/dz vanishes there
inline DiscriminantGradient grad_invariant_F(const LatticeState& st, cx zc) {
  const cx d1 = discriminant_z_derivative(zc, st, 1);
  const cx d2 = discriminant_z_derivative(zc, st, 2);
  if (std::abs(d1) > 1e-6 * std::max(1.0, std::abs(d2)))
    throw NotSimpleCritical("grad_invariant_F: zc is not a critical point for this state");
  const double n2 = st.size.inv_h2();
  if (std::abs(d2) <= 1e-10 * n2 * floquet_d(st))
    throw NotSimpleCritical("grad_invariant_F: critical point is not simple");
  return discriminant_tilde_gradient(zc, st);
}

}
