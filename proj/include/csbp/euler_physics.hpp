#pragma once

// Pointwise physics of the 2D Euler equations, templated on the scalar so the
// same code serves double evaluation and complex-step differentiation.
// State U = [rho, rho u, rho v, e].

#include "csbp/types.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace csbp {

inline constexpr double kGamma = 1.4;

struct EulerThermo {
  double gamma = kGamma;
};

inline double real_part(double x) { return x; }
inline double real_part(const std::complex<double>& x) { return x.real(); }

/// |x| continued analytically from the real axis (complex-step safe).
template <typename S>
S cs_abs(const S& x) {
  return real_part(x) < 0.0 ? S(-x) : x;
}

template <typename S>
S pressure(const Vector4<S>& U) {
  return (kGamma - 1.0) * (U(3) - 0.5 * (U(1) * U(1) + U(2) * U(2)) / U(0));
}

inline bool admissible(const Eigen::Vector4d& U) {
  return std::isfinite(U.sum()) && U(0) > 0.0 && pressure(U) > 0.0;
}

/// Throws InadmissibleState describing the node if rho <= 0 or p <= 0.
inline void require_admissible(const Eigen::Vector4d& U, Index node = -1, Index elem = -1) {
  if (admissible(U)) return;
  std::ostringstream msg;
  msg << "inadmissible state";
  if (node >= 0) msg << " at node " << node;
  if (elem >= 0) msg << " of element " << elem;
  msg << ": U = [" << U.transpose() << "], p = " << pressure(U);
  throw InadmissibleState(msg.str());
}

/// Conservative state from density, velocity and pressure.
template <typename S>
Vector4<S> conservative(const S& rho, const S& u, const S& v, const S& p) {
  return Vector4<S>(rho, rho * u, rho * v, p / (kGamma - 1.0) + 0.5 * rho * (u * u + v * v));
}

/// Normal flux nx F_x(U) + ny F_y(U).
template <typename S, typename N>
Vector4<S> euler_flux(const Vector4<S>& U, const N& nx, const N& ny) {
  const S u = U(1) / U(0), v = U(2) / U(0), p = pressure(U);
  const S un = u * nx + v * ny;
  return Vector4<S>(U(0) * un, U(1) * un + p * nx, U(2) * un + p * ny, (U(3) + p) * un);
}

template <typename S>
Vector4<S> entropy_vars(const Vector4<S>& U) {
  const S rho = U(0), u = U(1) / rho, v = U(2) / rho, p = pressure(U);
  const S s = std::log(p) - kGamma * std::log(rho);
  return Vector4<S>((kGamma - s) / (kGamma - 1.0) - 0.5 * rho * (u * u + v * v) / p, rho * u / p,
                    rho * v / p, -rho / p);
}

/// Mathematical entropy -rho s / (gamma - 1), s = ln(p / rho^gamma).
template <typename S>
S entropy_density(const Vector4<S>& U) {
  const S s = std::log(pressure(U)) - kGamma * std::log(U(0));
  return -U(0) * s / (kGamma - 1.0);
}

struct EntropyPotentials {
  double entropy = 0.0;
  double psi_x = 0.0;  ///< rho u
  double psi_y = 0.0;  ///< rho v
};

inline EntropyPotentials entropy_and_potentials(const Eigen::Vector4d& U) {
  require_admissible(U);
  return {entropy_density(U), U(1), U(2)};
}

/// dU/dW, the inverse entropy Hessian; symmetric positive definite.
template <typename S>
Matrix4<S> dudw(const Vector4<S>& U) {
  const S rho = U(0), u = U(1) / rho, v = U(2) / rho, e = U(3), p = pressure(U);
  const S h = (e + p) / rho;
  const S a2 = kGamma * p / rho;
  Matrix4<S> A;
  A << rho, rho * u, rho * v, e,
       rho * u, rho * u * u + p, rho * u * v, rho * u * h,
       rho * v, rho * u * v, rho * v * v + p, rho * v * h,
       e, rho * u * h, rho * v * h, rho * h * h - a2 * p / (kGamma - 1.0);
  return A;
}

/// Logarithmic mean (a - b) / (ln a - ln b), series form near a = b.
template <typename S>
S log_mean(const S& a, const S& b) {
  const S zeta = a / b;
  const S f = (zeta - 1.0) / (zeta + 1.0);
  const S uu = f * f;
  S F;
  if (real_part(uu) < 1e-4) {
    F = 1.0 + uu / 3.0 + uu * uu / 5.0 + uu * uu * uu / 7.0;
  } else {
    F = std::log(zeta) / (2.0 * f);
  }
  return (a + b) / (2.0 * F);
}

enum class FluxKind { IsmailRoe, Chandrashekar };

/// Ismail-Roe affordable entropy-conservative flux, contracted with (nx, ny).
template <typename S, typename N>
Vector4<S> ismail_roe_flux(const Vector4<S>& UL, const Vector4<S>& UR, const N& nx, const N& ny) {
  const S pL = pressure(UL), pR = pressure(UR);
  const S z1L = std::sqrt(UL(0) / pL), z1R = std::sqrt(UR(0) / pR);
  const S z4L = std::sqrt(UL(0) * pL), z4R = std::sqrt(UR(0) * pR);
  const S z2L = z1L * UL(1) / UL(0), z2R = z1R * UR(1) / UR(0);
  const S z3L = z1L * UL(2) / UL(0), z3R = z1R * UR(2) / UR(0);
  const S z1 = 0.5 * (z1L + z1R), z2 = 0.5 * (z2L + z2R), z3 = 0.5 * (z3L + z3R), z4 = 0.5 * (z4L + z4R);
  const S z1ln = log_mean(z1L, z1R), z4ln = log_mean(z4L, z4R);
  const S rho = z1 * z4ln;
  const S u = z2 / z1, v = z3 / z1;
  const S p1 = z4 / z1;
  const S p2 = (kGamma + 1.0) / (2.0 * kGamma) * z4ln / z1ln + (kGamma - 1.0) / (2.0 * kGamma) * z4 / z1;
  const S a2 = kGamma * p2 / rho;
  const S H = a2 / (kGamma - 1.0) + 0.5 * (u * u + v * v);
  const S mass = rho * (u * nx + v * ny);
  return Vector4<S>(mass, mass * u + p1 * nx, mass * v + p1 * ny, mass * H);
}

/// Chandrashekar kinetic-energy-preserving entropy-conservative flux.
template <typename S, typename N>
Vector4<S> chandrashekar_flux(const Vector4<S>& UL, const Vector4<S>& UR, const N& nx, const N& ny) {
  const S pL = pressure(UL), pR = pressure(UR);
  const S uL = UL(1) / UL(0), vL = UL(2) / UL(0), uR = UR(1) / UR(0), vR = UR(2) / UR(0);
  const S bL = 0.5 * UL(0) / pL, bR = 0.5 * UR(0) / pR;
  const S rho_ln = log_mean(UL(0), UR(0)), b_ln = log_mean(bL, bR);
  const S rho_avg = 0.5 * (UL(0) + UR(0)), b_avg = 0.5 * (bL + bR);
  const S u = 0.5 * (uL + uR), v = 0.5 * (vL + vR);
  const S q2 = 0.5 * (uL * uL + vL * vL + uR * uR + vR * vR);
  const S p = 0.5 * rho_avg / b_avg;
  const S f1 = rho_ln * (u * nx + v * ny);
  const S f2 = p * nx + u * f1;
  const S f3 = p * ny + v * f1;
  const S f4 = (1.0 / (2.0 * (kGamma - 1.0) * b_ln) - 0.5 * q2) * f1 + u * f2 + v * f3;
  return Vector4<S>(f1, f2, f3, f4);
}

template <typename S, typename N>
Vector4<S> ec_flux(FluxKind kind, const Vector4<S>& UL, const Vector4<S>& UR, const N& nx, const N& ny) {
  return kind == FluxKind::IsmailRoe ? ismail_roe_flux(UL, UR, nx, ny) : chandrashekar_flux(UL, UR, nx, ny);
}

/// Entropy-conservative flux in coordinate direction dir (0 = x, 1 = y).
inline Eigen::Vector4d ec_flux(int dir, const Eigen::Vector4d& UL, const Eigen::Vector4d& UR,
                               FluxKind kind = FluxKind::IsmailRoe) {
  if (dir != 0 && dir != 1) throw InvalidArgument("ec_flux: direction must be 0 (x) or 1 (y)");
  require_admissible(UL);
  require_admissible(UR);
  return ec_flux(kind, UL, UR, dir == 0 ? 1.0 : 0.0, dir == 0 ? 0.0 : 1.0);
}

/// Roe upwind flux through a face with scaled normal (nx, ny); the
/// magnitude of the normal multiplies the flux.
template <typename S>
Vector4<S> roe_flux(const Vector4<S>& UL, const Vector4<S>& UR, double nx, double ny) {
  const double len = std::hypot(nx, ny);
  const double ex = nx / len, ey = ny / len;
  const S rL = UL(0), rR = UR(0);
  const S uL = UL(1) / rL, vL = UL(2) / rL, uR = UR(1) / rR, vR = UR(2) / rR;
  const S pL = pressure(UL), pR = pressure(UR);
  const S hL = (UL(3) + pL) / rL, hR = (UR(3) + pR) / rR;
  const S sL = std::sqrt(rL), sR = std::sqrt(rR);
  const S rho = sL * sR;
  const S u = (sL * uL + sR * uR) / (sL + sR), v = (sL * vL + sR * vR) / (sL + sR);
  const S h = (sL * hL + sR * hR) / (sL + sR);
  const S a = std::sqrt((kGamma - 1.0) * (h - 0.5 * (u * u + v * v)));
  const S un = u * ex + v * ey;
  const S dr = rR - rL, dp = pR - pL, du = uR - uL, dv = vR - vL;
  const S dun = du * ex + dv * ey;
  const S l1 = cs_abs(S(un - a)), l2 = cs_abs(un), l3 = cs_abs(S(un + a));
  const S a1 = (dp - rho * a * dun) / (2.0 * a * a);
  const S a2 = dr - dp / (a * a);
  const S a3 = (dp + rho * a * dun) / (2.0 * a * a);
  Vector4<S> diss;
  diss(0) = l1 * a1 + l2 * a2 + l3 * a3;
  diss(1) = l1 * a1 * (u - a * ex) + l2 * (a2 * u + rho * (du - dun * ex)) + l3 * a3 * (u + a * ex);
  diss(2) = l1 * a1 * (v - a * ey) + l2 * (a2 * v + rho * (dv - dun * ey)) + l3 * a3 * (v + a * ey);
  diss(3) = l1 * a1 * (h - a * un) + l2 * (a2 * 0.5 * (u * u + v * v) + rho * (u * du + v * dv - un * dun)) +
            l3 * a3 * (h + a * un);
  return len * (0.5 * (euler_flux(UL, ex, ey) + euler_flux(UR, ex, ey)) - 0.5 * diss);
}

/// Pressure-only wall flux through a face with scaled normal (nx, ny).
template <typename S>
Vector4<S> slip_wall_flux(const Vector4<S>& U, double nx, double ny) {
  const S p = pressure(U);
  return Vector4<S>(S(0.0), p * nx, p * ny, S(0.0));
}

/// Spectral radii of the reference-space flux Jacobians,
/// sigma_xi = |(J grad xi) . (u, v)| + a |J grad xi|, likewise for eta.
template <typename S>
std::pair<S, S> wave_speeds(const Vector4<S>& U, double Jxi_x, double Jxi_y, double Jeta_x, double Jeta_y) {
  const S u = U(1) / U(0), v = U(2) / U(0);
  const S a = std::sqrt(kGamma * pressure(U) / U(0));
  const S sxi = cs_abs(S(Jxi_x * u + Jxi_y * v)) + a * std::hypot(Jxi_x, Jxi_y);
  const S seta = cs_abs(S(Jeta_x * u + Jeta_y * v)) + a * std::hypot(Jeta_x, Jeta_y);
  return {sxi, seta};
}

}  // namespace csbp
