#pragma once
// Gauge transformations anchored at the off-circle double point, the orbits
// they generate off the circle of uniform states, and the variational vectors
// those orbits feed into the splitting-distance integrals.
//
// The transform takes a state q and an eigenfunction phi of the transfer flow
// at z_d and produces a new state Q that solves the same lattice flow while
// keeping the whole Floquet spectrum fixed. Seeded with a Bloch combination
// on a uniform state it yields, in closed form, orbits that leave the circle
// along the unstable direction and return along the stable one.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "floquet.hpp"
#include "lattice.hpp"
#include "mat2.hpp"

namespace allab {

// scalar data tied to the first off-circle double point of a uniform state
struct DoublePointParams {
  int n = 0;
  double a = 0.0;
  double h = 0.0;
  double beta = 0.0;   // pi / n
  double rho = 0.0;    // 1 + h^2 a^2
  double s = 0.0;      // sqrt(rho cos^2 beta - 1) > 0 inside the window
  double mu = 0.0;     // 2 n^2 sqrt(rho) sin(beta) s, the departure rate
  double phi = 0.0;    // atan2(sqrt(rho) sin beta, s), in (0, pi/2)
  double z = 0.0;      // sqrt(rho) cos beta + s, real and > 1
};

inline DoublePointParams double_point_params(int n, double a) {
  if (n < 3) throw Error("double_point_params: need n >= 3");
  if (!amplitude_window(n).contains(a))
    throw Error("double_point_params: amplitude outside the first window");
  DoublePointParams dp;
  dp.n = n;
  dp.a = a;
  dp.h = 1.0 / static_cast<double>(n);
  dp.beta = std::numbers::pi / static_cast<double>(n);
  dp.rho = 1.0 + dp.h * dp.h * a * a;
  const double c = std::cos(dp.beta);
  dp.s = std::sqrt(dp.rho * c * c - 1.0);
  dp.mu = 2.0 * static_cast<double>(n) * static_cast<double>(n) * std::sqrt(dp.rho) *
          std::sin(dp.beta) * dp.s;
  dp.phi = std::atan2(std::sqrt(dp.rho) * std::sin(dp.beta), dp.s);
  dp.z = std::sqrt(dp.rho) * c + dp.s;
  return dp;
}

struct GaugeCoefficients {
  cx a{}, b{}, c{}, d{};
};

// matrix entries of the gauge at one site, from the eigenfunction value there
inline GaugeCoefficients darboux_coefficients(cx zd, const Vec2& ph) {
  const double n1 = std::norm(ph.x), n2 = std::norm(ph.y);
  if (n1 + n2 < 1e-280)
    throw ZeroEigenfunction("darboux_coefficients: eigenfunction vanishes at a site");
  const double az2 = std::norm(zd);
  const cx zdc = std::conj(zd);
  const cx den = -(1.0 / zdc) * (n1 + az2 * n2);
  const double e = n2 + az2 * n1;
  GaugeCoefficients g;
  g.a = zd * e / (zdc * zdc * den);
  g.d = -e / (zd * den);
  g.b = (az2 * az2 - 1.0) * ph.x * std::conj(ph.y) / (zdc * zdc * den);
  g.c = (az2 * az2 - 1.0) * std::conj(ph.x) * ph.y / (zd * zdc * den);
  return g;
}

// new state Q_n = (i/h) b_{n+1} - a_{n+1} q_n; phi must hold the eigenfunction
// on sites 0..N and is validated against the transfer recursion first
inline LatticeState darboux_transform(const LatticeState& st, cx zd,
                                      const std::vector<Vec2>& phi) {
  const int n = st.size.n;
  if (static_cast<int>(phi.size()) != n + 1)
    throw Error("darboux_transform: eigenfunction must cover sites 0..N");
  const double h = st.size.h();
  for (int k = 0; k < n; ++k) {
    const Vec2 stepped = transfer_matrix(zd, st.q[static_cast<size_t>(k)], h) *
                         phi[static_cast<size_t>(k)];
    const double scale = std::max(norm2(phi[static_cast<size_t>(k) + 1]), 1e-280);
    if (norm2(stepped - phi[static_cast<size_t>(k) + 1]) > 1e-8 * scale)
      throw EigenfunctionResidualTooLarge(
          "darboux_transform: eigenfunction does not satisfy the transfer recursion");
  }
  LatticeState out;
  out.size = st.size;
  out.q.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    GaugeCoefficients g = darboux_coefficients(zd, phi[static_cast<size_t>(k) + 1]);
    out.q[static_cast<size_t>(k)] = cx{0.0, 1.0 / h} * g.b - g.a * st.q[static_cast<size_t>(k)];
  }
  return out;
}

// Bloch combination c+ psi+ + c- psi- at the double point with
// c+/c- = i e^{2p} e^{i vartheta}
inline std::vector<Vec2> uniform_darboux_eigenfunction(const DoublePointParams& dp, double omega,
                                                       double gamma, double p, double vartheta,
                                                       double t) {
  BlochPair bp = uniform_bloch_functions(cx{dp.z, 0.0}, dp.a, omega, gamma, t, dp.n);
  const cx cp = cx{0.0, 1.0} * std::exp(p) * std::polar(1.0, 0.5 * vartheta);
  const cx cm = std::exp(-p) * std::polar(1.0, -0.5 * vartheta);
  std::vector<Vec2> out(static_cast<size_t>(dp.n) + 1);
  for (int k = 0; k <= dp.n; ++k)
    out[static_cast<size_t>(k)] =
        cp * bp.plus[static_cast<size_t>(k)] + cm * bp.minus[static_cast<size_t>(k)];
  return out;
}

struct HeteroclinicSetup {
  DoublePointParams dp;
  double omega = 1.0;
  double gamma = 0.0;
  double p = 0.0;         // translation along the orbit
  double vartheta = 0.0;  // relative phase of the Bloch combination
  int ear = +1;           // branch selector for the even restriction
};

inline HeteroclinicSetup heteroclinic_setup(int n, double a, double omega, double gamma,
                                            double p = 0.0, double vartheta = 0.0, int ear = +1) {
  return {double_point_params(n, a), omega, gamma, p, vartheta, ear};
}

// closed form of the transformed orbit
inline LatticeState heteroclinic_orbit(const HeteroclinicSetup& hs, double t) {
  const DoublePointParams& dp = hs.dp;
  const double tau = 2.0 * dp.mu * t + 2.0 * hs.p;
  const double sech = 1.0 / std::cosh(tau);
  const double th = std::tanh(tau);
  const double cb = std::cos(dp.beta);
  const cx qc = uniform_orbit(dp.a, hs.omega, hs.gamma, t);
  LatticeState out;
  out.size = {dp.n};
  out.q.resize(static_cast<size_t>(dp.n));
  for (int k = 0; k < dp.n; ++k) {
    const double e1 = dp.h * dp.a * cb +
                      dp.s * sech * std::cos((2.0 * k + 1.0) * dp.beta + hs.vartheta);
    const double a1 = dp.h * dp.a * cb +
                      dp.s * sech * std::cos((2.0 * k + 3.0) * dp.beta + hs.vartheta);
    const cx b1 = std::cos(dp.phi) + cx{0.0, std::sin(dp.phi) * th} +
                  sech * std::cos(2.0 * (k + 1.0) * dp.beta + hs.vartheta);
    if (std::abs(e1) < 1e-12)
      throw DegenerateDenominator("heteroclinic_orbit: orbit denominator vanishes");
    out.q[static_cast<size_t>(k)] = qc / e1 * (a1 - 2.0 * cb * dp.s * b1);
  }
  return out;
}

// restriction to the even subspace; the branch with ear = +1 has the Bloch
// phase vartheta = -beta, ear = -1 the one shifted by pi
inline LatticeState even_heteroclinic_orbit(const HeteroclinicSetup& hs, double t) {
  const DoublePointParams& dp = hs.dp;
  const double tau = 2.0 * dp.mu * t + 2.0 * hs.p;
  const double sech = 1.0 / std::cosh(tau);
  const double th = std::tanh(tau);
  const double sgn = (hs.ear >= 0) ? 1.0 : -1.0;
  const double ratio = std::cos(dp.phi) / std::cos(dp.beta);
  const cx qc = uniform_orbit(dp.a, hs.omega, hs.gamma, t);
  const cx top = 1.0 - std::cos(2.0 * dp.phi) - cx{0.0, std::sin(2.0 * dp.phi) * th};
  const std::vector<double> c2 = detail::cosine_row(1, dp.n);
  LatticeState out;
  out.size = {dp.n};
  out.q.resize(static_cast<size_t>(dp.n));
  for (int k = 0; k < dp.n; ++k) {
    const double lam = 1.0 + sgn * ratio * sech * c2[static_cast<size_t>(k)];
    if (std::abs(lam) < 1e-12)
      throw PoleInLambda("even_heteroclinic_orbit: denominator crosses zero");
    out.q[static_cast<size_t>(k)] = qc * (top / lam - 1.0);
  }
  return out;
}

// prefactor of the variational vector below, normalized so the vector equals
// the gradient of the anchored invariant
inline double melnikov_prefactor(const DoublePointParams& dp) {
  const double z2 = dp.z * dp.z;
  return 2.0 * static_cast<double>(dp.n) * dp.h * dp.h * dp.a * (1.0 - z2 * z2) * dp.s /
         (8.0 * std::pow(dp.rho, 1.5) * z2);
}

inline double even_melnikov_prefactor(const DoublePointParams& dp) {
  const double z2 = dp.z * dp.z;
  return 2.0 * static_cast<double>(dp.n) * (1.0 - z2 * z2) * dp.s /
         (8.0 * dp.a * std::pow(dp.rho, 1.5) * z2);
}

// gradient of the first anchored invariant along the orbit, in closed form;
// slots follow the (d/dq_n, d/dr_n) convention of the discriminant gradients
inline DiscriminantGradient melnikov_vector(const HeteroclinicSetup& hs, double t) {
  const DoublePointParams& dp = hs.dp;
  const double tau = 2.0 * dp.mu * t + 2.0 * hs.p;
  const double sech = 1.0 / std::cosh(tau);
  const double th = std::tanh(tau);
  const double cb = std::cos(dp.beta);
  const double kk = melnikov_prefactor(dp);
  const double theta = (dp.a * dp.a - hs.omega * hs.omega) * t - 0.5 * hs.gamma;
  const cx e2t = std::polar(1.0, 2.0 * theta);
  DiscriminantGradient g;
  g.dq.resize(static_cast<size_t>(dp.n));
  g.dr.resize(static_cast<size_t>(dp.n));
  for (int k = 0; k < dp.n; ++k) {
    const double en = dp.h * dp.a * cb +
                      dp.s * sech * std::cos((2.0 * k - 1.0) * dp.beta + hs.vartheta);
    const double an = dp.h * dp.a * cb +
                      dp.s * sech * std::cos((2.0 * k + 3.0) * dp.beta + hs.vartheta);
    if (std::abs(en * an) < 1e-12)
      throw DegenerateDenominator("melnikov_vector: orbit denominator vanishes");
    const double arg1 = (2.0 * k + 1.0) * dp.beta + hs.vartheta + dp.phi;
    const double arg2 = (2.0 * k + 1.0) * dp.beta + hs.vartheta - dp.phi;
    const cx x1 = (cb * sech + std::cos(arg1) - cx{0.0, th} * std::sin(arg1)) * e2t;
    const cx x2 = (cb * sech + std::cos(arg2) - cx{0.0, th} * std::sin(arg2)) * std::conj(e2t);
    g.dq[static_cast<size_t>(k)] = kk / (en * an) * sech * x1;
    g.dr[static_cast<size_t>(k)] = -kk / (en * an) * sech * x2;
  }
  return g;
}

// even-subspace version: the mirror average of the general vector on the
// even orbit, in closed form
inline DiscriminantGradient even_melnikov_vector(const HeteroclinicSetup& hs, double t) {
  const DoublePointParams& dp = hs.dp;
  const double tau = 2.0 * dp.mu * t + 2.0 * hs.p;
  const double sech = 1.0 / std::cosh(tau);
  const double th = std::tanh(tau);
  const double cb = std::cos(dp.beta);
  const double cf = std::cos(dp.phi), sf = std::sin(dp.phi);
  const double sgn = (hs.ear >= 0) ? 1.0 : -1.0;
  const double kk = even_melnikov_prefactor(dp);
  const double theta = (dp.a * dp.a - hs.omega * hs.omega) * t - 0.5 * hs.gamma;
  const cx e2t = std::polar(1.0, 2.0 * theta);
  const std::vector<double> c2 = detail::cosine_row(1, dp.n);
  DiscriminantGradient g;
  g.dq.resize(static_cast<size_t>(dp.n));
  g.dr.resize(static_cast<size_t>(dp.n));
  for (int k = 0; k < dp.n; ++k) {
    const double cm = c2[static_cast<size_t>((k - 1 + dp.n) % dp.n)];
    const double cp = c2[static_cast<size_t>((k + 1) % dp.n)];
    const double pi_n = (cb + sgn * cf * sech * cm) * (cb + sgn * cf * sech * cp);
    if (std::abs(pi_n) < 1e-12)
      throw DegenerateDenominator("even_melnikov_vector: orbit denominator vanishes");
    const cx x1 = (cb * sech + sgn * (cf - cx{0.0, sf * th}) * c2[static_cast<size_t>(k)]) * e2t;
    g.dq[static_cast<size_t>(k)] = kk / pi_n * sech * x1;
    g.dr[static_cast<size_t>(k)] = -kk / pi_n * sech * std::conj(x1);
  }
  return g;
}

struct CircleProjection {
  double theta = 0.0;     // phase of the nearest circle point
  double distance = 0.0;  // Euclidean distance to it
};

inline CircleProjection distance_to_circle(const LatticeState& st, double a) {
  cx sum{0.0, 0.0};
  double norm = 0.0;
  for (const cx& v : st.q) {
    sum += v;
    norm += std::norm(v);
  }
  const double dn = static_cast<double>(st.size.n);
  if (std::abs(sum) < 1e-14 * dn * std::max(1.0, a))
    throw ZeroCarrier("distance_to_circle: mean amplitude vanishes");
  CircleProjection out;
  out.theta = std::arg(sum);
  const double d2 = norm + dn * a * a - 2.0 * a * std::abs(sum);
  out.distance = std::sqrt(std::max(d2, 0.0));
  return out;
}

struct PhaseShift {
  double theta_minus = 0.0;  // carrier offset of the departure limit
  double theta_plus = 0.0;   // carrier offset of the arrival limit
  double total = 0.0;        // theta_plus - theta_minus
};

// the orbit limits onto -e^{-+2 i phi} times the carrier as t -> -+infinity
inline PhaseShift asymptotic_phase_shift(const DoublePointParams& dp) {
  return {std::numbers::pi - 2.0 * dp.phi, std::numbers::pi + 2.0 * dp.phi, 4.0 * dp.phi};
}

}
