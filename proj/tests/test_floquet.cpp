#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "allab/floquet.hpp"
#include "allab/lattice.hpp"
#include "test_support.hpp"

using namespace allab;
using testsup::rel_err;

namespace {
constexpr double pi = std::numbers::pi;

// closed forms on the uniform state, written directly in z so the branch of
// sqrt(rho cos^2 beta - 1) is the one z itself carries
struct UniformClosed {
  int n;
  double a, rho, sr, d;
  UniformClosed(int n_, double a_) : n(n_), a(a_) {
    rho = 1.0 + a * a / (static_cast<double>(n) * static_cast<double>(n));
    sr = std::sqrt(rho);
    d = std::pow(rho, 0.5 * n);
  }
  cx cosb(cx z) const { return (z + 1.0 / z) / (2.0 * sr); }
  cx sinb(cx z) const { return std::sqrt(1.0 - cosb(z) * cosb(z)); }
  cx sval(cx z) const { return (z - 1.0 / z) / 2.0; }
  cx zeta(cx z) const { return std::pow(cosb(z) + cx{0.0, 1.0} * sinb(z), n); }
  cx delta(cx z) const {
    cx zt = zeta(z);
    return d * (zt + 1.0 / zt);
  }
  cx sin_nb(cx z) const {
    cx zt = zeta(z);
    return (zt - 1.0 / zt) / cx{0.0, 2.0};
  }
  cx cos_nb(cx z) const {
    cx zt = zeta(z);
    return 0.5 * (zt + 1.0 / zt);
  }
  cx d1(cx z) const {
    return 2.0 * static_cast<double>(n) * d * sin_nb(z) * sval(z) / (z * sr * sinb(z));
  }
  cx d2(cx z) const {
    const cx c = cosb(z), sb = sinb(z), s = sval(z);
    return -2.0 * static_cast<double>(n) * d / (rho * z * z * sb * sb * sb) *
           (static_cast<double>(n) * cos_nb(z) * sb * (rho * c * c - 1.0) +
            (1.0 - rho) * c * sin_nb(z) + sr * sin_nb(z) * sb * sb * s);
  }
  cx z_of_beta(double beta) const {
    const double c = std::cos(beta);
    return sr * c + std::sqrt(cx{rho * c * c - 1.0, 0.0});
  }
};

// time half of the Lax pair, for residual checks only
Mat2 time_flow_matrix(cx z, cx qn, cx qm, double omega, cx lambda, double h) {
  const cx i{0.0, 1.0};
  const cx b11 = 1.0 - z * z + 2.0 * i * lambda * h - h * h * qn * std::conj(qm) +
                 omega * omega * h * h;
  const cx b12 = -i * z * h * qn + (1.0 / z) * i * h * qm;
  const cx b21 = -i * z * h * std::conj(qm) + (1.0 / z) * i * h * std::conj(qn);
  const cx b22 = 1.0 / (z * z) - 1.0 + 2.0 * i * lambda * h + h * h * std::conj(qn) * qm -
                 omega * omega * h * h;
  return Mat2{b11, b12, b21, b22} * (i / (h * h));
}

LatticeState uniform_state(int n, double a, double omega, double gamma, double t) {
  return LatticeState::uniform(n, uniform_orbit(a, omega, gamma, t));
}
}

TEST_CASE("transfer matrix entries and failure on vanishing z") {
  const cx z{1.3, -0.4}, q{0.7, 0.2};
  const double h = 0.25;
  Mat2 l = transfer_matrix(z, q, h);
  REQUIRE(l.a == z);
  REQUIRE(l.b == cx{0.0, h} * q);
  REQUIRE(l.c == cx{0.0, h} * std::conj(q));
  REQUIRE(rel_err(l.d, 1.0 / z) < 1e-15);
  REQUIRE(rel_err(l.det(), cx{1.0 + h * h * std::norm(q), 0.0}) < 1e-15);
  REQUIRE_THROWS_AS(transfer_matrix(cx{0.0, 0.0}, q, h), ZeroSpectralParameter);
  LatticeState st = LatticeState::zero(4);
  REQUIRE_THROWS_AS(discriminant(cx{0.0, 0.0}, st), ZeroSpectralParameter);
  REQUIRE_THROWS_AS(discriminant_z_derivative(cx{0.0, 0.0}, st, 1), ZeroSpectralParameter);
}

TEST_CASE("zero state reduces to the free diagonal flow") {
  const int n = 6;
  LatticeState st = LatticeState::zero(n);
  for (cx z : {cx{1.7, 0.4}, cx{0.3, -0.8}, cx{-1.1, 0.2}}) {
    Mat2 m = fundamental_matrix(z, st);
    REQUIRE(rel_err(m.a, std::pow(z, n)) < 1e-13);
    REQUIRE(rel_err(m.d, std::pow(z, -n)) < 1e-13);
    REQUIRE(std::abs(m.b) == 0.0);
    REQUIRE(std::abs(m.c) == 0.0);
    REQUIRE(rel_err(discriminant(z, st).delta, std::pow(z, n) + std::pow(z, -n)) < 1e-13);
    REQUIRE(rel_err(discriminant_z_derivative(z, st, 1),
                    static_cast<double>(n) * (std::pow(z, n - 1) - std::pow(z, -n - 1))) < 1e-12);
  }
}

TEST_CASE("fundamental determinant accumulates the site weights") {
  std::mt19937 rng(2203);
  for (int n : {3, 5, 8}) {
    for (int rep = 0; rep < 6; ++rep) {
      LatticeState st = testsup::random_state(n, rng, 1.8);
      const cx z{1.1, 0.7};
      Mat2 m = fundamental_matrix(z, st);
      const double d = floquet_d(st);
      REQUIRE(rel_err(m.det(), cx{d * d, 0.0}) < 1e-12);
    }
  }
}

TEST_CASE("uniform discriminant matches the trigonometric closed form") {
  for (auto [n, a] : {std::pair{6, 5.0}, std::pair{5, 3.0}, std::pair{8, 7.5}}) {
    UniformClosed ref(n, a);
    LatticeState st = uniform_state(n, a, 1.2, 0.35, 0.4);
    for (int k = 1; k < 40; ++k) {
      const double beta = pi * k / 40.0;
      const cx z = ref.z_of_beta(beta);
      Discriminant dd = discriminant(z, st);
      REQUIRE(std::abs(dd.delta - 2.0 * ref.d * std::cos(n * beta)) < 1e-11 * 2.0 * ref.d);
      REQUIRE(rel_err(cx{dd.d, 0.0}, cx{ref.d, 0.0}) < 1e-13);
    }
  }
}

TEST_CASE("discriminant does not depend on the carrier phase") {
  const int n = 6;
  const double a = 5.0, omega = 1.2;
  const cx z{1.9, 0.3};
  const cx base = discriminant(z, uniform_state(n, a, omega, 0.0, 0.0)).delta;
  for (double t : {0.17, 0.4}) {
    for (double gamma : {0.0, 1.1, 2.9}) {
      const cx d = discriminant(z, uniform_state(n, a, omega, gamma, t)).delta;
      REQUIRE(rel_err(d, base) < 1e-12);
    }
  }
}

TEST_CASE("discriminant is invariant under cyclic relabeling") {
  std::mt19937 rng(404);
  LatticeState st = testsup::random_state(7, rng, 1.3);
  LatticeState rot = st;
  for (int k = 0; k < 7; ++k) rot.q[static_cast<size_t>(k)] = st.q[static_cast<size_t>((k + 3) % 7)];
  for (cx z : {cx{2.0, 0.1}, cx{0.6, 0.6}}) {
    REQUIRE(rel_err(discriminant(z, rot).delta, discriminant(z, st).delta) < 1e-12);
  }
}

TEST_CASE("discriminant grows with degree equal to the lattice size") {
  std::mt19937 rng(515);
  const int n = 6;
  LatticeState st = testsup::random_state(n, rng, 0.9);
  const double r1 = std::abs(discriminant(cx{1e3, 0.0}, st).delta) / std::pow(1e3, n);
  const double r2 = std::abs(discriminant(cx{1e4, 0.0}, st).delta) / std::pow(1e4, n);
  REQUIRE(std::abs(r1 / r2 - 1.0) < 1e-3);
}

TEST_CASE("uniform spectrum catalog") {
  const int n = 6;
  const double a = 5.0;
  UniformClosed ref(n, a);
  LatticeState st = uniform_state(n, a, 1.2, 0.8, 0.0);
  auto pts = uniform_spectral_points(a, n);
  REQUIRE(pts.size() == 16);  // two branches per m plus the two branch points

  int off_circle = 0, tangency = 0;
  for (const SpectralPoint& p : pts) {
    // the transfer matrix reproduces the tabulated discriminant value
    REQUIRE(std::abs(discriminant(p.z, st).delta - p.delta) < 1e-9 * 2.0 * ref.d);
    if (p.m >= 0) {
      const double sign = (p.m % 2 == 0) ? 1.0 : -1.0;
      REQUIRE(rel_err(p.delta, cx{sign * 2.0 * ref.d, 0.0}) < 1e-13);
      if (p.m > 0 && p.m < n) {
        if (std::abs(std::abs(p.z) - 1.0) > 1e-6) {
          ++off_circle;
          // a = 5 lies inside the first window, so only the quadruplet
          // {z1, 1/z1, -z1, -1/z1} leaves the circle
          REQUIRE((p.m == 1 || p.m == n - 1));
        } else {
          REQUIRE(std::abs(std::abs(p.z) - 1.0) < 1e-12);
        }
      } else {
        REQUIRE(std::abs(p.z.imag()) < 1e-12);  // band endpoints are real
      }
    } else {
      ++tangency;
      REQUIRE(std::abs(std::abs(p.z) - 1.0) < 1e-12);
      REQUIRE(p.kind == PointKind::Critical);
    }
  }
  REQUIRE(off_circle == 4);
  REQUIRE(tangency == 2);

  // the two branches at fixed m multiply to one
  for (const SpectralPoint& p : pts) {
    if (p.m < 0) continue;
    for (const SpectralPoint& q : pts) {
      if (q.m == p.m && &q != &p) REQUIRE(std::abs(p.z * q.z - 1.0) < 1e-12);
    }
  }

  // endpoint members are simple, interior ones are double
  for (const SpectralPoint& p : pts) {
    if (p.m == 0) REQUIRE(p.kind == PointKind::Periodic);
    if (p.m == n) REQUIRE((n % 2 == 0 ? p.kind == PointKind::Periodic
                                      : p.kind == PointKind::Antiperiodic));
    if (p.m > 0 && p.m < n) {
      REQUIRE(p.kind == PointKind::Double);
      REQUIRE(p.multiplicity == 2);
    }
  }

  REQUIRE_THROWS_AS(uniform_spectral_points(-1.0, 6), Error);
}

TEST_CASE("catalog of the zero-amplitude state sits on the unit circle") {
  for (const SpectralPoint& p : uniform_spectral_points(0.0, 6))
    REQUIRE(std::abs(std::abs(p.z) - 1.0) < 1e-13);
}

TEST_CASE("z derivatives match the closed forms") {
  const int n = 6;
  const double a = 5.0;
  UniformClosed ref(n, a);
  LatticeState st = uniform_state(n, a, 1.2, 0.35, 0.13);
  for (double beta : {0.21, 0.9, 1.7, 2.4}) {
    for (bool other_branch : {false, true}) {
      cx z = ref.z_of_beta(beta);
      if (other_branch) z = 1.0 / z;
      const cx d1 = discriminant_z_derivative(z, st, 1);
      const cx d2 = discriminant_z_derivative(z, st, 2);
      REQUIRE(rel_err(d1, ref.d1(z)) < 1e-9);
      REQUIRE(rel_err(d2, ref.d2(z)) < 1e-9);
    }
  }
}

TEST_CASE("z derivatives match finite differences on generic states") {
  std::mt19937 rng(616);
  for (int n : {4, 7}) {
    LatticeState st = testsup::random_even_state(n, rng, 1.4);
    for (cx z : {cx{1.6, 0.2}, cx{0.8, -0.5}}) {
      const double delta = 1e-6;
      auto f = [&](cx zz) { return discriminant(zz, st).delta; };
      auto g = [&](cx zz) { return discriminant_z_derivative(zz, st, 1); };
      const cx fd1 = (f(z + delta) - f(z - delta)) / (2.0 * delta);
      const cx fd2 = (g(z + delta) - g(z - delta)) / (2.0 * delta);
      REQUIRE(rel_err(discriminant_z_derivative(z, st, 1), fd1) < 1e-7);
      REQUIRE(rel_err(discriminant_z_derivative(z, st, 2), fd2) < 1e-7);
    }
  }
}

TEST_CASE("spectral point classification") {
  const int n = 6;
  const double a = 5.0;
  LatticeState st = uniform_state(n, a, 1.2, 0.0, 0.0);

  for (const SpectralPoint& p : uniform_spectral_points(a, n)) {
    SpectralPoint c = classify_spectral_point(p.z, st);
    REQUIRE(c.kind == p.kind);
    REQUIRE(c.multiplicity == p.multiplicity);
  }

  // away from the spectrum everything is regular
  REQUIRE(classify_spectral_point(cx{1.3, 0.26}, st).kind == PointKind::Regular);
  REQUIRE_THROWS_AS(classify_spectral_point(cx{0.0, 0.0}, st), ZeroSpectralParameter);
}

TEST_CASE("multiplicity four at the tuned amplitude") {
  const int n = 6;
  const double a = 2.0 * std::sqrt(3.0);  // n tan(pi/n)
  LatticeState st = uniform_state(n, a, 1.0, 0.0, 0.0);
  for (double zr : {1.0, -1.0}) {
    SpectralPoint p = classify_spectral_point(cx{zr, 0.0}, st);
    REQUIRE(p.kind == PointKind::Multiple);
    REQUIRE(p.multiplicity == 4);
  }
  auto pts = uniform_spectral_points(a, n);
  int mult4 = 0;
  for (const SpectralPoint& p : pts)
    if (p.kind == PointKind::Multiple) {
      ++mult4;
      REQUIRE(std::abs(std::abs(p.z) - 1.0) < 1e-7);
    }
  REQUIRE(mult4 == 2);
}

TEST_CASE("critical point search on the uniform state") {
  const int n = 6;
  const double a = 5.0;
  LatticeState st = uniform_state(n, a, 1.2, 0.6, 0.0);
  CriticalSearch cs = find_critical_points(st, default_critical_seeds(st));
  REQUIRE(cs.failed.empty());
  REQUIRE(cs.points.size() == 12);  // five double pairs and the two branch-point criticals
  int doubles = 0, criticals = 0;
  for (const SpectralPoint& p : cs.points) {
    REQUIRE(std::abs(discriminant_z_derivative(p.z, st, 1)) <
            1e-8 * std::max(1.0, std::abs(discriminant_z_derivative(p.z, st, 2))));
    if (p.kind == PointKind::Double) ++doubles;
    if (p.kind == PointKind::Critical) ++criticals;
  }
  REQUIRE(doubles == 10);
  REQUIRE(criticals == 2);
}

TEST_CASE("critical points move continuously under small perturbations") {
  const int n = 6;
  const double a = 5.0;
  UniformClosed ref(n, a);
  const cx z1 = ref.z_of_beta(pi / n);
  std::mt19937 rng(717);
  LatticeState bump = testsup::random_even_state(n, rng, 1.0);

  auto locate = [&](double eps) {
    LatticeState st = uniform_state(n, a, 1.2, 0.0, 0.0);
    for (int k = 0; k < n; ++k) st.q[static_cast<size_t>(k)] += eps * bump.q[static_cast<size_t>(k)];
    CriticalSearch cs = find_critical_points(st, {z1});
    REQUIRE(cs.failed.empty());
    REQUIRE(cs.points.size() == 1);
    return cs.points.front().z;
  };
  const double d3 = std::abs(locate(1e-3) - z1);
  const double d4 = std::abs(locate(1e-4) - z1);
  REQUIRE(d3 < 1e-2);
  REQUIRE(d4 < 0.3 * d3);

  // seeds at the pole are reported, not iterated
  CriticalSearch bad = find_critical_points(uniform_state(n, a, 1.2, 0.0, 0.0), {cx{1e-9, 0.0}});
  REQUIRE(bad.points.empty());
  REQUIRE(bad.failed.size() == 1);
}

TEST_CASE("variational gradient matches Wirtinger finite differences") {
  std::mt19937 rng(818);
  for (int n : {4, 6}) {
    for (int rep = 0; rep < 3; ++rep) {
      LatticeState st = testsup::random_even_state(n, rng, 1.2);
      const cx z{1.7, 0.3};
      DiscriminantGradient g = discriminant_gradient(z, st);
      DiscriminantGradient gt = discriminant_tilde_gradient(z, st);
      double scale = 0.0;
      for (int k = 0; k < n; ++k)
        scale = std::max({scale, std::abs(g.dq[static_cast<size_t>(k)]),
                          std::abs(g.dr[static_cast<size_t>(k)])});
      const double delta = 1e-6;
      for (int k = 0; k < n; ++k) {
        auto probe = [&](cx bump, bool tilde) {
          LatticeState p = st;
          p.q[static_cast<size_t>(k)] += bump;
          Discriminant dd = discriminant(z, p);
          return tilde ? dd.tilde() : dd.delta;
        };
        for (bool tilde : {false, true}) {
          const cx fx = (probe(cx{delta, 0.0}, tilde) - probe(cx{-delta, 0.0}, tilde)) / (2.0 * delta);
          const cx fy = (probe(cx{0.0, delta}, tilde) - probe(cx{0.0, -delta}, tilde)) / (2.0 * delta);
          const cx want_dq = 0.5 * (fx - cx{0.0, 1.0} * fy);
          const cx want_dr = -0.5 * (fx + cx{0.0, 1.0} * fy);
          const DiscriminantGradient& use = tilde ? gt : g;
          const double s = tilde ? scale / floquet_d(st) : scale;
          REQUIRE(std::abs(use.dq[static_cast<size_t>(k)] - want_dq) < 1e-6 * std::max(1.0, s));
          REQUIRE(std::abs(use.dr[static_cast<size_t>(k)] - want_dr) < 1e-6 * std::max(1.0, s));
        }
      }
    }
  }
}

TEST_CASE("gradient through Bloch functions matches the product formula") {
  const int n = 6;
  const double a = 5.0, omega = 1.2, gamma = 0.35, t = 0.13;
  LatticeState st = uniform_state(n, a, omega, gamma, t);
  for (cx z : {cx{2.2, 0.0}, std::polar(1.0, 0.3), std::polar(0.7, 1.1)}) {
    DiscriminantGradient ga = discriminant_tilde_gradient(z, st);
    DiscriminantGradient gb = discriminant_tilde_gradient_bloch(z, a, omega, gamma, t, n);
    double scale = 0.0;
    for (int k = 0; k < n; ++k)
      scale = std::max({scale, std::abs(ga.dq[static_cast<size_t>(k)]),
                        std::abs(ga.dr[static_cast<size_t>(k)])});
    for (int k = 0; k < n; ++k) {
      REQUIRE(std::abs(ga.dq[static_cast<size_t>(k)] - gb.dq[static_cast<size_t>(k)]) < 1e-9 * scale);
      REQUIRE(std::abs(ga.dr[static_cast<size_t>(k)] - gb.dr[static_cast<size_t>(k)]) < 1e-9 * scale);
    }
  }
}

TEST_CASE("gradient of the normalized discriminant degenerates at the double point") {
  const int n = 6;
  const double a = 5.0;
  UniformClosed ref(n, a);
  LatticeState st = uniform_state(n, a, 1.2, 0.35, 0.13);
  const cx z1 = ref.z_of_beta(pi / n);
  DiscriminantGradient at_double = discriminant_tilde_gradient(z1, st);
  DiscriminantGradient generic = discriminant_tilde_gradient(cx{2.2, 0.0}, st);
  double norm_d = 0.0, norm_g = 0.0;
  for (int k = 0; k < n; ++k) {
    norm_d = std::max({norm_d, std::abs(at_double.dq[static_cast<size_t>(k)]),
                       std::abs(at_double.dr[static_cast<size_t>(k)])});
    norm_g = std::max({norm_g, std::abs(generic.dq[static_cast<size_t>(k)]),
                       std::abs(generic.dr[static_cast<size_t>(k)])});
  }
  REQUIRE(norm_d < 1e-10 * norm_g);
}

TEST_CASE("Bloch eigenfunctions satisfy the lattice half of the pair") {
  const int n = 6;
  const double a = 5.0, omega = 1.2, gamma = 0.35, t = 0.13;
  UniformClosed ref(n, a);
  LatticeState st = uniform_state(n, a, omega, gamma, t);
  const double h = st.size.h();
  for (cx z : {cx{2.2, 0.0}, std::polar(1.0, 0.3), ref.z_of_beta(pi / n)}) {
    BlochPair bp = uniform_bloch_functions(z, a, omega, gamma, t, n);
    for (int k = 0; k < n; ++k) {
      Mat2 l = transfer_matrix(z, st.q[static_cast<size_t>(k)], h);
      for (const auto* fam : {&bp.plus, &bp.minus}) {
        const Vec2 got = l * (*fam)[static_cast<size_t>(k)];
        const Vec2 want = (*fam)[static_cast<size_t>(k) + 1];
        REQUIRE(norm2(got - want) < 1e-10 * norm2(want));
      }
      // Wronskian picks up one site weight per step
      const double rho = 1.0 + h * h * std::norm(st.q[static_cast<size_t>(k)]);
      REQUIRE(rel_err(bp.wronskian[static_cast<size_t>(k) + 1],
                      rho * bp.wronskian[static_cast<size_t>(k)]) < 1e-12);
    }
    const double d = floquet_d(st);
    REQUIRE(rel_err(bp.wronskian[static_cast<size_t>(n)], d * d * bp.wronskian[0]) < 1e-12);
    REQUIRE(rel_err(bp.zeta + 1.0 / bp.zeta, discriminant(z, st).tilde()) < 1e-10);
  }
  REQUIRE_THROWS_AS(uniform_bloch_functions(cx{1.0, 0.0}, a, omega, gamma, t, n),
                    BranchAmbiguity);
  const cx band_end = std::sqrt(ref.rho) + std::sqrt(ref.rho - 1.0);
  REQUIRE_THROWS_AS(uniform_bloch_functions(band_end, a, omega, gamma, t, n), BranchAmbiguity);
}

TEST_CASE("Bloch eigenfunctions satisfy the time half of the pair") {
  const int n = 6;
  const double a = 5.0, omega = 1.2, gamma = 0.35, t = 0.13;
  const double h = 1.0 / n;
  for (cx z : {cx{2.2, 0.0}, std::polar(1.0, 0.3)}) {
    BlochPair at[5];
    const double tau = 1e-5;
    for (int j = -2; j <= 2; ++j)
      at[j + 2] = uniform_bloch_functions(z, a, omega, gamma, t + j * tau, n);
    const cx qc = uniform_orbit(a, omega, gamma, t);
    Mat2 b = time_flow_matrix(z, qc, qc, omega, at[2].lambda, h);
    for (int k = 0; k <= n; ++k) {
      for (int fam = 0; fam < 2; ++fam) {
        auto pick = [&](int j) {
          const BlochPair& bp = at[j + 2];
          return fam == 0 ? bp.plus[static_cast<size_t>(k)] : bp.minus[static_cast<size_t>(k)];
        };
        const Vec2 fd = (1.0 / (12.0 * tau)) *
                        (-1.0 * pick(2) + 8.0 * pick(1) - 8.0 * pick(-1) + 1.0 * pick(-2));
        const Vec2 want = b * pick(0);
        REQUIRE(norm2(fd - want) < 1e-8 * std::max(1.0, norm2(pick(0))) *
                                       std::max(1.0, frob_norm(b)));
      }
    }
  }
}

TEST_CASE("time growth rates of the Bloch pair split by the first mode rate") {
  const int n = 6;
  const double a = 5.0;
  UniformClosed ref(n, a);
  const cx z1 = ref.z_of_beta(pi / n);
  BlochPair bp = uniform_bloch_functions(z1, a, 1.2, 0.35, 0.0, n);
  const cx growth = linearized_growth_rates(a, n).plus(1);
  REQUIRE(rel_err(bp.omega_plus - bp.omega_minus, growth) < 1e-9);
}

TEST_CASE("spectral invariant at the off-circle double point") {
  const int n = 6;
  const double a = 5.0;
  UniformClosed ref(n, a);
  const cx z1 = ref.z_of_beta(pi / n);
  LatticeState st = uniform_state(n, a, 1.2, 0.9, 0.2);
  InvariantF f = invariant_F(st, z1 * 1.001);
  REQUIRE(std::abs(f.value - cx{-2.0, 0.0}) < 1e-10);
  REQUIRE(std::abs(f.zc - z1) < 1e-9);
  REQUIRE_THROWS_AS(invariant_F(st, cx{1e-9, 0.0}), NoConvergence);
  REQUIRE_THROWS_AS(grad_invariant_F(st, cx{2.2, 0.0}), NotSimpleCritical);
}

TEST_CASE("gradient of the spectral invariant drives directional derivatives") {
  const int n = 6;
  const double a = 5.0;
  UniformClosed ref(n, a);
  const cx z1 = ref.z_of_beta(pi / n);
  std::mt19937 rng(919);
  LatticeState base = uniform_state(n, a, 1.2, 0.0, 0.0);
  LatticeState bump = testsup::random_even_state(n, rng, 0.05);
  for (int k = 0; k < n; ++k) base.q[static_cast<size_t>(k)] += bump.q[static_cast<size_t>(k)];

  InvariantF f0 = invariant_F(base, z1);
  DiscriminantGradient g = grad_invariant_F(base, f0.zc);

  LatticeState dir = testsup::random_even_state(n, rng, 1.0);
  const double eps = 1e-5;
  auto shift = [&](double sgn) {
    LatticeState st = base;
    for (int k = 0; k < n; ++k)
      st.q[static_cast<size_t>(k)] += sgn * eps * dir.q[static_cast<size_t>(k)];
    return invariant_F(st, f0.zc).value;
  };
  const cx fd = (shift(1.0) - shift(-1.0)) / (2.0 * eps);
  cx chain{0.0, 0.0};
  for (int k = 0; k < n; ++k) {
    chain += g.dq[static_cast<size_t>(k)] * dir.q[static_cast<size_t>(k)];
    chain -= g.dr[static_cast<size_t>(k)] * std::conj(dir.q[static_cast<size_t>(k)]);
  }
  REQUIRE(std::abs(fd - chain) < 1e-5 * std::max(1e-6, std::abs(chain)));
}
