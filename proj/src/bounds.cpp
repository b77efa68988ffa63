#include "srwrate/bounds.hpp"

#include <cmath>
#include <string>

#include "srwrate/errors.hpp"
#include "srwrate/io.hpp"

namespace srwrate {

MadResult mad_binomial(long n, double p) {
  if (n < 2) throw InvalidArgument("mad_binomial needs n >= 2");
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("mad_binomial needs 0 < p < 1, got " + format_double(p));
  const double nd = static_cast<double>(n);
  const double mean = nd * p;
  const double log_n_fact = std::lgamma(nd + 1.0);
  const double lp = std::log(p), lq = std::log1p(-p);
  long double mad = 0.0L;
  for (long j = 0; j <= n; ++j) {
    const double jd = static_cast<double>(j);
    const double log_pmf =
        log_n_fact - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) + jd * lp + (nd - jd) * lq;
    mad += static_cast<long double>(std::exp(log_pmf)) * std::abs(jd - mean);
  }
  return {static_cast<double>(mad), std::sqrt(nd * p * (1.0 - p))};
}

CoveringBounds covering_packing_bounds(int d, double epsilon) {
  if (d < 1) throw InvalidArgument("covering_packing_bounds needs d >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("epsilon must lie in (0, 1), got " + format_double(epsilon));
  }
  return {std::pow(1.0 / epsilon, d), std::pow(3.0 / epsilon, d)};
}

double fournier_H(double x, double s, double q) {
  if (!(s > 0.0) || !(q > s)) throw InvalidArgument("fournier_H needs q > s > 0");
  if (!(x >= 0.0)) throw InvalidArgument("fournier_H needs x >= 0");
  const double inner = x * ((q - s) / s) + (1.0 + x) * std::pow(q / s, q / (q - s));
  const double out = std::pow(inner, s / q) * (q / (q - s));
  if (!std::isfinite(out)) throw NumericalError("fournier_H overflowed");
  return out;
}

double fournier_kappa_dr(int d, double r) {
  if (d < 5) throw InvalidArgument("fournier_kappa needs d >= 5");
  if (!(r >= 2.0)) throw InvalidArgument("fournier_kappa needs r >= 2");
  const double dd = d;
  // (K_d / 4)^{2/d} with K_d = 3^d.
  const double k_term = 9.0 * std::pow(0.25, 2.0 / dd);
  const double num = std::pow(r, 4.0) * std::pow(1.0 - std::pow(r, -dd / 2.0), 1.0 - 4.0 / dd);
  const double den = (r - 1.0) * (r - 1.0) * (1.0 - std::pow(r, 2.0 - dd / 2.0));
  return k_term * num / den;
}

KappaResult fournier_kappa(int d, double r_max, int r_steps) {
  if (d < 5) throw InvalidArgument("fournier_kappa needs d >= 5");
  if (!(r_max >= 2.0) || r_steps < 1) throw InvalidArgument("fournier_kappa needs r_max >= 2, r_steps >= 1");
  KappaResult out;
  out.kappa_dr_at_2 = fournier_kappa_dr(d, 2.0);
  out.kappa_d = out.kappa_dr_at_2;
  const double ratio = r_steps > 1 ? std::log(r_max / 2.0) / (r_steps - 1) : 0.0;
  for (int i = 1; i < r_steps; ++i) {
    const double r = 2.0 * std::exp(ratio * i);
    const double v = fournier_kappa_dr(d, r);
    if (v < out.kappa_d) {
      out.kappa_d = v;
      out.argmin_r = r;
    }
  }
  return out;
}

double fournier_w2_upper(int d, double n, double q) {
  if (d < 5) throw InvalidArgument("fournier_w2_upper needs d >= 5");
  if (!(n >= 1.0)) throw InvalidArgument("fournier_w2_upper needs n >= 1");
  const double s = 2.0 * d / (d - 2.0);
  if (!(q > s)) throw InvalidArgument("fournier_w2_upper needs q > 2d/(d-2) = " + format_double(s));
  const double kappa = fournier_kappa(d).kappa_d;
  const double h = fournier_H(std::pow(2.0, -4.0 / d) / kappa, s, q);
  return 4.0 * kappa / std::pow(n, 2.0 / d) * h;
}

TStar t_star(double n) {
  if (!(n >= 3.0)) throw InvalidArgument("t_star needs n >= 3");
  const double ln = std::log(n);
  const long t = static_cast<long>(std::floor(ln / std::log(ln)));
  return {t, t >= 5};
}

RateCurves rate_curves(double n) {
  if (!(n >= 3.0)) throw InvalidArgument("rate_curves needs n >= 3");
  const double ln = std::log(n);
  return {std::sqrt(std::log(ln) / ln), 1.0 / std::sqrt(ln)};
}

BoundSet compute_bounds(int d, double n, double q) {
  if (d < 1) throw InvalidArgument("d must be >= 1");
  if (!(n >= 1.0)) throw InvalidArgument("n must be >= 1");
  BoundSet out;
  out.d = d;
  out.n = n;
  out.q = q;
  if (d >= 5) {
    const auto kappa = fournier_kappa(d);
    out.kappa_dr = kappa.kappa_dr_at_2;
    out.kappa_d = kappa.kappa_d;
    const double s = 2.0 * d / (d - 2.0);
    if (q > s) {
      out.H_value = fournier_H(std::pow(2.0, -4.0 / d) / kappa.kappa_d, s, q);
      out.fournier_w2_sq_bound = fournier_w2_upper(d, n, q);
    }
  }
  if (d >= 5) out.kappa_chain = 9.0 / std::pow(4.0, 5) * 16.0 / (1.0 - std::pow(2.0, -0.5));
  if (n >= 3.0) {
    const auto t = t_star(n);
    out.t_star = t.t;
    out.t_star_main_branch = t.main_branch;
    const auto c = rate_curves(n);
    out.upper_curve = c.upper;
    out.lower_curve = c.lower;
  }
  return out;
}

}  // namespace srwrate
