#pragma once

#include <optional>

namespace srwrate {

struct MadResult {
  double mad = 0.0;  // E|X - EX|
  double std = 0.0;  // sqrt(n p (1 - p))
};

/// Mean absolute deviation of Binomial(n, p), summed exactly over the pmf.
MadResult mad_binomial(long n, double p);

struct CoveringBounds {
  double lower = 0.0;  // (1/eps)^d
  double upper = 0.0;  // (3/eps)^d
};

CoveringBounds covering_packing_bounds(int d, double epsilon);

/// (x (q-s)/s + (1+x) (q/s)^{q/(q-s)})^{s/q} * q/(q-s).
double fournier_H(double x, double s, double q);

struct KappaResult {
  double kappa_dr_at_2 = 0.0;
  double kappa_d = 0.0;  // minimum over the r grid
  double argmin_r = 2.0;
};

/// kappa_{d,r} with K_d replaced by 3^d.
double fournier_kappa_dr(int d, double r);
/// Minimizes kappa_{d,r} over r_steps geometrically spaced r in [2, r_max].
KappaResult fournier_kappa(int d, double r_max = 64.0, int r_steps = 512);

/// Upper bound on E W_2^2(mu, mu_n) for mu on the unit ball of R^d, d >= 5.
double fournier_w2_upper(int d, double n, double q);

struct TStar {
  long t = 0;
  bool main_branch = false;  // t >= 5
};

/// floor(ln n / ln ln n), n >= 3.
TStar t_star(double n);

struct RateCurves {
  double upper = 0.0;  // sqrt(ln ln n / ln n)
  double lower = 0.0;  // 1 / sqrt(ln n)
};

RateCurves rate_curves(double n);

/// Everything `bounds` prints. Entries that are undefined for the inputs
/// (d < 5, q out of range, n < 3) are empty.
struct BoundSet {
  int d = 0;
  double n = 0.0;
  double q = 0.0;
  std::optional<double> H_value;
  std::optional<double> kappa_dr;
  std::optional<double> kappa_d;
  // 9 * 4^-5 * 2^4 / (1 - 2^{-1/2}): the d-free value sometimes quoted for
  // kappa_d. Direct evaluation of kappa_{d,2} is far larger; both are reported.
  std::optional<double> kappa_chain;
  std::optional<double> fournier_w2_sq_bound;
  std::optional<long> t_star;
  std::optional<bool> t_star_main_branch;
  std::optional<double> upper_curve;
  std::optional<double> lower_curve;
};

BoundSet compute_bounds(int d, double n, double q);

}  // namespace srwrate
