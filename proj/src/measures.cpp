#include "srwrate/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include "srwrate/errors.hpp"
#include "srwrate/io.hpp"

namespace srwrate {

namespace {

long double accurate_sum(const Vector& v) {
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i];
  return s;
}

// key=value pairs after the first ':' in a sampler spec.
std::map<std::string, std::string, std::less<>> parse_params(std::string_view body) {
  std::map<std::string, std::string, std::less<>> out;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw InvalidArgument("sampler parameter '" + std::string(item) + "' is not key=value");
    }
    out.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return out;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InvalidArgument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

void gaussian_direction(CounterRng& rng, Eigen::Ref<Vector> out) {
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = rng.normal();
    norm = out.norm();
  } while (norm == 0.0);
  out /= norm;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteMeasure

void validate_measure(const Matrix& points, const Vector& weights) {
  if (points.rows() == 0) throw InvalidArgument("measure has no atoms");
  if (points.cols() == 0) throw InvalidArgument("measure dimension must be positive");
  if (weights.size() != points.rows()) {
    throw InvalidArgument("measure has " + std::to_string(points.rows()) + " points but " +
                          std::to_string(weights.size()) + " weights");
  }
  if (!points.allFinite() || !weights.allFinite()) {
    throw InvalidArgument("measure contains NaN or Inf");
  }
  if ((weights.array() < 0.0).any()) throw InvalidArgument("measure has a negative weight");
  const long double total = accurate_sum(weights);
  if (std::abs(static_cast<double>(total - 1.0L)) > kWeightSumTol) {
    throw InvalidArgument("measure weights sum to " + format_double(static_cast<double>(total)) +
                          ", not 1");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double r = points.row(i).norm();
    if (r > 1.0 + kBallTol) {
      throw InvalidArgument("atom " + std::to_string(i) + " has norm " + format_double(r) +
                            " outside the unit ball");
    }
  }
}

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  validate_measure(points_, weights_);
}

DiscreteMeasure DiscreteMeasure::uniform(Matrix points) {
  const auto n = points.rows();
  if (n == 0) throw InvalidArgument("measure has no atoms");
  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return DiscreteMeasure(std::move(points), std::move(w));
}

Matrix DiscreteMeasure::second_moment() const {
  return points_.transpose() * weights_.asDiagonal() * points_;
}

// ---------------------------------------------------------------------------
// SeparatedSet

double SeparatedSet::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      best = std::min(best, (points.row(i) - points.row(j)).norm());
    }
  }
  return best;
}

void SeparatedSet::certify() const {
  if (points.cols() != dim) throw NumericalError("separated set has wrong dimension");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (points.row(i).norm() > 1.0 + kBallTol) {
      throw NumericalError("separated set point " + std::to_string(i) + " leaves the unit ball");
    }
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      if (!((points.row(i) - points.row(j)).norm() > epsilon)) {
        throw NumericalError("points " + std::to_string(i) + " and " + std::to_string(j) +
                             " are not " + format_double(epsilon) + "-separated");
      }
    }
  }
}

SeparatedSet greedy_separated_set(int dim, double epsilon, std::size_t target, std::uint64_t seed,
                                  std::size_t max_attempts) {
  if (dim < 1) throw InvalidArgument("dimension must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be positive");
  if (target < 1) throw InvalidArgument("target must be at least 1");

  const Sampler ball = Sampler::uniform_ball(dim, seed);
  CounterRng rng(derive_seed(seed, {0x7061636BULL}));
  Matrix accepted(static_cast<Eigen::Index>(target), dim);
  Vector candidate(dim);
  std::size_t found = 0;
  std::size_t rejected = 0;
  const double eps_sq = epsilon * epsilon;

  while (found < target) {
    ball.draw(rng, candidate);
    bool ok = true;
    for (std::size_t i = 0; i < found && ok; ++i) {
      ok = (accepted.row(static_cast<Eigen::Index>(i)).transpose() - candidate).squaredNorm() >
           eps_sq;
    }
    if (ok) {
      accepted.row(static_cast<Eigen::Index>(found++)) = candidate.transpose();
    } else if (++rejected >= max_attempts) {
      throw PackingNotFound(rejected, found, target);
    }
  }

  SeparatedSet out{dim, epsilon, std::move(accepted)};
  out.certify();
  return out;
}

int worst_case_dimension(std::size_t n) {
  if (n < 2) throw InvalidArgument("worst-case construction needs n >= 2");
  return static_cast<int>(std::ceil(std::log(static_cast<double>(n))));
}

SeparatedSet worst_case_support(std::size_t n, std::uint64_t seed) {
  return greedy_separated_set(worst_case_dimension(n), 1.0 / 3.0, n, seed);
}

DiscreteMeasure worst_case_measure(std::size_t n, std::uint64_t seed) {
  return DiscreteMeasure::uniform(worst_case_support(n, seed).points);
}

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(SamplerKind kind, int dim, std::uint64_t seed, std::string spec)
    : kind_(kind), dim_(dim), seed_(seed), spec_(std::move(spec)) {
  if (dim < 1) throw InvalidArgument("sampler dimension must be positive");
}

Sampler Sampler::uniform_sphere(int dim, std::uint64_t seed) {
  return Sampler(SamplerKind::UniformSphere, dim, seed, "uniform-sphere:d=" + std::to_string(dim));
}

Sampler Sampler::uniform_ball(int dim, std::uint64_t seed) {
  return Sampler(SamplerKind::UniformBall, dim, seed, "uniform-ball:d=" + std::to_string(dim));
}

Sampler Sampler::packing(std::size_t n, std::uint64_t construction_seed, std::uint64_t seed) {
  auto truth = std::make_shared<const DiscreteMeasure>(worst_case_measure(n, construction_seed));
  Sampler s = finite(*truth, seed);
  s.kind_ = SamplerKind::WorstCasePacking;
  s.spec_ = "packing:n=" + std::to_string(n) + ",seed=" + std::to_string(construction_seed);
  return s;
}

Sampler Sampler::finite(DiscreteMeasure truth, std::uint64_t seed, std::string label) {
  const int dim = static_cast<int>(truth.dim());
  Sampler s(SamplerKind::Finite, dim, seed, std::move(label));
  Vector cumulative(truth.size());
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    acc += truth.weights()[i];
    cumulative[i] = static_cast<double>(acc);
  }
  s.truth_ = std::make_shared<const DiscreteMeasure>(std::move(truth));
  s.cumulative_ = std::make_shared<const Vector>(std::move(cumulative));
  return s;
}

Sampler Sampler::parse(std::string_view spec, std::uint64_t seed) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("sampler spec '" + std::string(spec) + "' has no ':'");
  }
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view body = spec.substr(colon + 1);

  if (kind == "file") {
    if (body.empty()) throw InvalidArgument("file sampler needs a path");
    return finite(load_measure(std::filesystem::path(std::string(body))), seed,
                  "file:" + std::string(body));
  }

  const auto params = parse_params(body);
  auto require = [&](std::string_view key) -> std::uint64_t {
    const auto it = params.find(key);
    if (it == params.end()) {
      throw InvalidArgument("sampler '" + std::string(kind) + "' needs parameter " +
                            std::string(key));
    }
    return parse_u64(it->second, key);
  };
  auto reject_extra = [&](std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : params) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw InvalidArgument("unknown sampler parameter '" + key + "'");
      }
    }
  };

  if (kind == "uniform-sphere" || kind == "uniform-ball") {
    reject_extra({"d"});
    const auto d = require("d");
    if (d < 1 || d > 100000) throw InvalidArgument("sampler dimension out of range");
    return kind == "uniform-sphere" ? uniform_sphere(static_cast<int>(d), seed)
                                    : uniform_ball(static_cast<int>(d), seed);
  }
  if (kind == "packing") {
    reject_extra({"n", "seed"});
    const auto n = require("n");
    const std::uint64_t construction =
        params.contains("seed") ? require("seed") : derive_seed(seed, {0x636F6E73ULL});
    return packing(static_cast<std::size_t>(n), construction, seed);
  }
  throw InvalidArgument("unknown sampler kind '" + std::string(kind) + "'");
}

Sampler Sampler::with_seed(std::uint64_t seed) const {
  Sampler s = *this;
  s.seed_ = seed;
  return s;
}

void Sampler::draw(CounterRng& rng, Eigen::Ref<Vector> out) const {
  switch (kind_) {
    case SamplerKind::UniformSphere:
      gaussian_direction(rng, out);
      return;
    case SamplerKind::UniformBall: {
      gaussian_direction(rng, out);
      out *= std::pow(rng.uniform(), 1.0 / static_cast<double>(dim_));
      return;
    }
    case SamplerKind::WorstCasePacking:
    case SamplerKind::Finite: {
      const Vector& cdf = *cumulative_;
      const double u = rng.uniform() * cdf[cdf.size() - 1];
      const double* begin = cdf.data();
      const double* end = begin + cdf.size();
      auto idx = std::upper_bound(begin, end, u) - begin;
      idx = std::min<Eigen::Index>(idx, cdf.size() - 1);
      // skip zero-weight atoms that share a cdf value with their successor
      while (truth_->weights()[idx] == 0.0 && idx + 1 < cdf.size()) ++idx;
      out = truth_->points().row(idx).transpose();
      return;
    }
  }
}

DiscreteMeasure sample_empirical(const Sampler& sampler, std::size_t n) {
  if (n == 0) throw InvalidArgument("empirical measure needs n >= 1");
  CounterRng rng(sampler.seed());
  Matrix pts(static_cast<Eigen::Index>(n), sampler.dim());
  Vector x(sampler.dim());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    sampler.draw(rng, x);
    if (!x.allFinite() || x.norm() > 1.0 + kBallTol) {
      throw InvalidArgument("sampler '" + sampler.spec() + "' produced a draw outside the unit ball");
    }
    pts.row(i) = x.transpose();
  }
  return DiscreteMeasure::uniform(std::move(pts));
}

// ---------------------------------------------------------------------------
// Isometries and projections

Matrix random_orthogonal(int dim, std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("dimension must be positive");
  CounterRng rng(derive_seed(seed, {0x6F727468ULL}));
  Matrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign convention diag(R) > 0 makes the law Haar.
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

DiscreteMeasure isometric_embed(const DiscreteMeasure& mu, int target_dim,
                                std::optional<std::uint64_t> orthogonal_seed) {
  if (target_dim < mu.dim()) {
    throw InvalidArgument("target dimension " + std::to_string(target_dim) +
                          " is smaller than the measure dimension " + std::to_string(mu.dim()));
  }
  Matrix padded = Matrix::Zero(mu.size(), target_dim);
  padded.leftCols(mu.dim()) = mu.points();
  if (orthogonal_seed) {
    const Matrix q = random_orthogonal(target_dim, *orthogonal_seed);
    padded = (padded * q.transpose()).eval();
  }
  return DiscreteMeasure(std::move(padded), mu.weights());
}

void check_orthonormal(const Matrix& basis, double tol) {
  if (basis.cols() == 0) throw InvalidArgument("basis is empty");
  if (basis.cols() > basis.rows()) throw InvalidArgument("basis has more vectors than dimensions");
  if (!basis.allFinite()) throw InvalidArgument("basis contains NaN or Inf");
  const Matrix gram = basis.transpose() * basis;
  const double err = (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (err > tol) {
    throw InvalidArgument("basis is not orthonormal (Gram error " + format_double(err) + ")");
  }
}

DiscreteMeasure project_measure(const DiscreteMeasure& mu, const Matrix& basis) {
  if (basis.rows() != mu.dim()) throw InvalidArgument("basis dimension does not match measure");
  check_orthonormal(basis);
  Matrix projected = (mu.points() * basis) * basis.transpose();
  // Rounding can push a boundary atom a hair past the ball; projections never increase norms.
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    const double r = projected.row(i).norm();
    const double r0 = mu.points().row(i).norm();
    if (r > r0 && r > 1.0) projected.row(i) *= r0 / r;
  }
  return DiscreteMeasure(std::move(projected), mu.weights());
}

}  // namespace srwrate
