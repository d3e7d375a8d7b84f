#include "bbandit/hard_instances.hpp"

#include <cmath>
#include <string>

namespace bbandit {

namespace {

void check_alpha_beta(double alpha, double beta) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
  if (alpha * beta > 1.0 + 1e-12)
    throw std::invalid_argument("alpha*beta > 1: the problem reduces to a static multi-armed bandit (need alpha*beta <= 1)");
}

std::int64_t ipow64(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Row-major lattice coordinates of a flat index over n^d cells.
std::array<std::int64_t, kMaxDim> unflatten(std::int64_t flat, std::int64_t n, int d) {
  std::array<std::int64_t, kMaxDim> v{};
  for (int j = d - 1; j >= 0; --j) {
    v[j] = flat % n;
    flat /= n;
  }
  return v;
}

}  // namespace

std::vector<int> resolve_signs(const SignSource& source, std::size_t length) {
  if (const auto* explicit_signs = std::get_if<std::vector<int>>(&source)) {
    if (explicit_signs->size() != length)
      throw std::invalid_argument("sign vector has length " + std::to_string(explicit_signs->size()) +
                                  ", expected " + std::to_string(length));
    for (int s : *explicit_signs)
      if (s != 1 && s != -1) throw std::invalid_argument("signs must be +1 or -1");
    return *explicit_signs;
  }
  Rng rng(mix_seeds(std::get<std::uint64_t>(source), 0x5167'6e73ULL));
  std::vector<int> out(length);
  for (auto& s : out) s = rng.sign();
  return out;
}

double bump_scale(double beta, double L) { return std::min(std::pow(2.0, -beta) * L, 0.25); }

int cz_bump_count(int z, double alpha, double beta, int d) {
  return static_cast<int>(guarded_ceil(std::pow(static_cast<double>(z), d - alpha * beta)));
}

BanditInstance make_cz_instance(int z, double alpha, double beta, double L, int d, const SignSource& signs) {
  check_alpha_beta(alpha, beta);
  if (z < 1) throw std::invalid_argument("z must be >= 1");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (!(L > 0.0)) throw std::invalid_argument("L must be positive");
  const int s = cz_bump_count(z, alpha, beta, d);
  const std::int64_t bins = ipow64(z, d);
  if (s > bins) throw std::invalid_argument("more bumps than bins");
  const auto omega = resolve_signs(signs, static_cast<std::size_t>(s));

  const double dphi = bump_scale(beta, L);
  const double height = dphi * std::pow(static_cast<double>(z), -beta);
  std::vector<Bump> bumps;
  bumps.reserve(s);
  for (int j = 0; j < s; ++j) {
    const auto v = unflatten(j, z, d);
    Bump b;
    b.center = Point(d);
    for (int k = 0; k < d; ++k) b.center[k] = (v[k] + 0.5) / z;
    b.half_width = 0.5 / z;
    b.amplitude = height;
    b.sign = omega[j];
    bumps.push_back(b);
  }
  DeclaredParams decl{alpha, beta, L, (1.0 + d) / std::pow(dphi, alpha)};
  return BanditInstance("cz", BumpField(d, 0.5, beta, std::move(bumps)), BumpField::constant(d, 0.5),
                        CovariateLaw::uniform(d), decl);
}

MultiScaleSpec multiscale_spec(int M, double alpha, double beta, int d, std::int64_t T) {
  check_alpha_beta(alpha, beta);
  if (M < 2) throw std::invalid_argument("multiscale: M must be >= 2");
  if (T < 2) throw std::invalid_argument("multiscale: T must be >= 2");
  const double gamma = beta * (1.0 + alpha) / (2.0 * beta + d);
  MultiScaleSpec spec;
  spec.M = M;
  spec.b = std::pow(static_cast<double>(T), (1.0 - gamma) / (1.0 - std::pow(gamma, M)));
  for (int m = 0; m <= M; ++m)
    spec.T_m.push_back(guarded_floor(std::pow(spec.b, (1.0 - std::pow(gamma, m)) / (1.0 - gamma))));
  const double blocks_per_scale = std::pow(static_cast<double>(M), d - 1);
  for (int m = 1; m <= M; ++m) {
    const double base = 36.0 * static_cast<double>(spec.T_m[m - 1]) * M * M;
    const int zm = static_cast<int>(guarded_ceil(std::pow(base, 1.0 / (2.0 * beta + d))));
    const int sm = static_cast<int>(
        guarded_ceil(std::pow(static_cast<double>(M), -alpha * beta) * std::pow(static_cast<double>(zm), d - alpha * beta)));
    spec.z.push_back(zm);
    spec.s.push_back(sm);
    spec.total_signs += static_cast<int>(blocks_per_scale) * sm;
  }
  return spec;
}

BanditInstance make_multiscale_instance(int M, double alpha, double beta, double L, int d, std::int64_t T,
                                        const SignSource& signs) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
  const auto spec = multiscale_spec(M, alpha, beta, d, T);
  const auto omega = resolve_signs(signs, static_cast<std::size_t>(spec.total_signs));
  const double dphi = bump_scale(beta, L);
  const std::int64_t blocks_per_scale = ipow64(M, d - 1);

  std::vector<Bump> bumps;
  std::size_t next_sign = 0;
  for (int m = 1; m <= M; ++m) {
    const int zm = spec.z[m - 1];
    const int sm = spec.s[m - 1];
    if (sm > ipow64(zm, d)) throw std::invalid_argument("multiscale: more bumps than sub-bins in a block");
    const double sub_width = 1.0 / (static_cast<double>(M) * zm);
    const double height = dphi * std::pow(static_cast<double>(M) * zm, -beta);
    for (std::int64_t blk = 0; blk < blocks_per_scale; ++blk) {
      // Block lattice: leading coordinate m-1, remaining coordinates from blk.
      const std::int64_t block_flat = static_cast<std::int64_t>(m - 1) * blocks_per_scale + blk;
      const auto bv = unflatten(block_flat, M, d);
      for (int j = 0; j < sm; ++j) {
        const auto sv = unflatten(j, zm, d);
        Bump b;
        b.center = Point(d);
        for (int k = 0; k < d; ++k) b.center[k] = static_cast<double>(bv[k]) / M + (sv[k] + 0.5) * sub_width;
        b.half_width = 0.5 * sub_width;
        b.amplitude = height;
        b.sign = omega[next_sign++];
        bumps.push_back(b);
      }
    }
  }
  BumpField field(d, 0.5, beta, std::move(bumps));
  if (!field.supports_disjoint()) throw std::invalid_argument("multiscale: bump supports overlap");
  DeclaredParams decl{alpha, beta, L, (1.0 + d) / std::pow(dphi, alpha)};
  return BanditInstance("multiscale", std::move(field), BumpField::constant(d, 0.5), CovariateLaw::uniform(d), decl);
}

BanditInstance make_static_failure_instance(int z, double L, int orientation) {
  if (z < 1) throw std::invalid_argument("z must be >= 1");
  if (orientation != 1 && orientation != -1) throw std::invalid_argument("orientation must be +1 or -1");
  const double dphi = std::min(L / 2.0, 0.25);
  Bump b;
  b.center = Point{0.5 / z};
  b.half_width = 0.5 / z;
  b.amplitude = dphi / z;
  b.sign = orientation;
  DeclaredParams decl{1.0, 1.0, L, 1.0 / dphi};
  return BanditInstance("static_failure", BumpField(1, 0.5, 1.0, {b}), BumpField::constant(1, 0.5),
                        CovariateLaw::uniform(1), decl);
}

BanditInstance make_experiment_instance(const SignSource& signs) {
  const auto omega = resolve_signs(signs, 4);
  std::vector<Bump> bumps;
  for (int j = 1; j <= 4; ++j) {
    Bump b;
    b.center = Point{(j - 0.5) / 4.0};
    b.half_width = 0.125;
    b.amplitude = 0.25;
    b.sign = omega[j - 1];
    bumps.push_back(b);
  }
  // p(delta) = min(4 delta, 1), so sup_delta p(delta)/delta^0.2 = 4^0.2.
  DeclaredParams decl{0.2, 1.0, 2.0, std::pow(4.0, 0.2)};
  return BanditInstance("experiment", BumpField(1, 0.5, 1.0, std::move(bumps)), BumpField::constant(1, 0.5),
                        CovariateLaw::uniform(1), decl);
}

BanditInstance make_constant_instance(double f_plus, double f_minus, int d, DeclaredParams declared) {
  return BanditInstance("constant", BumpField::constant(d, f_plus), BumpField::constant(d, f_minus),
                        CovariateLaw::uniform(d), declared);
}

}  // namespace bbandit
