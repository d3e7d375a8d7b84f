#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "bbandit/instance.hpp"

namespace bbandit {

/// Either an explicit sign vector or a seed for i.i.d. Rademacher signs.
using SignSource = std::variant<std::vector<int>, std::uint64_t>;

std::vector<int> resolve_signs(const SignSource& source, std::size_t length);

/// D_phi = min(2^{-beta} L, 1/4).
double bump_scale(double beta, double L);

/// Single-scale family: z^d equal bins, the first s = ceil(z^{d - alpha beta}) of them
/// (row-major) carry a bump of height D_phi z^{-beta}; f^{(-1)} = 1/2.
BanditInstance make_cz_instance(int z, double alpha, double beta, double L, int d, const SignSource& signs);

/// Number of bumped bins in the single-scale family.
int cz_bump_count(int z, double alpha, double beta, int d);

/// Resolved layout of the multi-scale family.
struct MultiScaleSpec {
  int M = 2;
  double b = 1.0;
  std::vector<std::int64_t> T_m;  // T_0 .. T_M
  std::vector<int> z;             // z_1 .. z_M
  std::vector<int> s;             // s_1 .. s_M per block
  int total_signs = 0;
};

MultiScaleSpec multiscale_spec(int M, double alpha, double beta, int d, std::int64_t T);

/// Multi-scale family: M^d blocks; blocks whose leading lattice coordinate is m-1 are
/// refined into z_m^d sub-bins, the first s_m of which carry bumps of height D_phi (M z_m)^{-beta}.
BanditInstance make_multiscale_instance(int M, double alpha, double beta, double L, int d, std::int64_t T,
                                        const SignSource& signs);

/// One bump on [0, 1/z) in d = 1 with height D_phi / z, D_phi = min(L/2, 1/4).
/// orientation = +1 reproduces f^{(1)} = 1/2 + phi_1; -1 mirrors the arm labels.
BanditInstance make_static_failure_instance(int z, double L = 1.0, int orientation = 1);

/// Four bumps on [0,1] at q_j = (j - 1/2)/4 with height 1/4 and half-width 1/8.
BanditInstance make_experiment_instance(const SignSource& signs);

/// Flat surfaces f^{(1)} = a, f^{(-1)} = b.
BanditInstance make_constant_instance(double f_plus, double f_minus, int d = 1, DeclaredParams declared = {});

}  // namespace bbandit
