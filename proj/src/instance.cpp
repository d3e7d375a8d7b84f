#include "bbandit/instance.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace bbandit {

namespace {

constexpr int kMaxLookupCells = 1 << 20;

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

BumpField::BumpField(int dim, double baseline, double beta, std::vector<Bump> bumps)
    : dim_(dim), baseline_(baseline), beta_(beta), bumps_(std::move(bumps)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("BumpField: dimension out of range");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("BumpField: beta must lie in (0,1]");
  double max_h = 0.0;
  for (const auto& b : bumps_) {
    if (b.center.dim() != dim) throw std::invalid_argument("BumpField: bump dimension mismatch");
    if (!(b.half_width > 0.0)) throw std::invalid_argument("BumpField: bump half-width must be positive");
    max_h = std::max(max_h, b.half_width);
  }
  if (bumps_.empty()) {
    grid_ = 1;
    cell_start_ = {0, 0};
    return;
  }
  // Cell side at least 2*max_h, so each bump touches at most 2^d cells.
  int g = std::max(1, static_cast<int>(std::floor(1.0 / (2.0 * max_h))));
  const int cap = std::max(1, static_cast<int>(std::floor(std::pow(kMaxLookupCells, 1.0 / dim))));
  grid_ = std::min(g, cap);
  const int n_cells = ipow(grid_, dim);

  std::vector<std::vector<int>> lists(n_cells);
  for (int bi = 0; bi < static_cast<int>(bumps_.size()); ++bi) {
    const auto& b = bumps_[bi];
    std::array<int, kMaxDim> lo{}, hi{};
    for (int j = 0; j < dim; ++j) {
      lo[j] = std::clamp(static_cast<int>(std::floor((b.center[j] - b.half_width) * grid_)), 0, grid_ - 1);
      hi[j] = std::clamp(static_cast<int>(std::floor((b.center[j] + b.half_width) * grid_)), 0, grid_ - 1);
    }
    std::array<int, kMaxDim> idx = lo;
    while (true) {
      int flat = 0;
      for (int j = 0; j < dim; ++j) flat = flat * grid_ + idx[j];
      lists[flat].push_back(bi);
      int j = dim - 1;
      while (j >= 0 && idx[j] == hi[j]) {
        idx[j] = lo[j];
        --j;
      }
      if (j < 0) break;
      ++idx[j];
    }
  }
  cell_start_.assign(n_cells + 1, 0);
  for (int c = 0; c < n_cells; ++c) cell_start_[c + 1] = cell_start_[c] + static_cast<int>(lists[c].size());
  cell_items_.reserve(cell_start_.back());
  for (auto& l : lists) cell_items_.insert(cell_items_.end(), l.begin(), l.end());
}

int BumpField::cell_of(const Point& x) const {
  int flat = 0;
  for (int j = 0; j < dim_; ++j) {
    const int c = std::clamp(static_cast<int>(x[j] * grid_), 0, grid_ - 1);
    flat = flat * grid_ + c;
  }
  return flat;
}

double BumpField::operator()(const Point& x) const {
  double v = baseline_;
  if (bumps_.empty()) return v;
  const int c = cell_of(x);
  for (int k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
    const auto& b = bumps_[cell_items_[k]];
    const double r = linf_distance(x, b.center);
    if (r < b.half_width) {
      const double u = 1.0 - r / b.half_width;
      v += b.sign * b.amplitude * (beta_ == 1.0 ? u : std::pow(u, beta_));
    }
  }
  return v;
}

std::vector<int> BumpField::bumps_touching(const Box& box) const {
  std::vector<int> out;
  for (int bi = 0; bi < static_cast<int>(bumps_.size()); ++bi) {
    const auto& b = bumps_[bi];
    bool hit = true;
    for (int j = 0; j < dim_ && hit; ++j)
      hit = b.center[j] + b.half_width > box.lo[j] && b.center[j] - b.half_width < box.hi[j];
    if (hit) out.push_back(bi);
  }
  return out;
}

bool BumpField::supports_disjoint() const {
  const int n_cells = static_cast<int>(cell_start_.size()) - 1;
  for (int c = 0; c < n_cells; ++c) {
    for (int a = cell_start_[c]; a < cell_start_[c + 1]; ++a) {
      for (int b = a + 1; b < cell_start_[c + 1]; ++b) {
        const auto& p = bumps_[cell_items_[a]];
        const auto& q = bumps_[cell_items_[b]];
        bool overlap = true;
        for (int j = 0; j < dim_ && overlap; ++j)
          overlap = std::abs(p.center[j] - q.center[j]) < p.half_width + q.half_width - 1e-12;
        if (overlap) return false;
      }
    }
  }
  return true;
}

// Supports are disjoint for every shipped instance, so extremes are baseline +/- largest amplitude.
double BumpField::min_value() const {
  double m = baseline_;
  for (const auto& b : bumps_)
    if (b.sign < 0) m = std::min(m, baseline_ - b.amplitude);
  return m;
}

double BumpField::max_value() const {
  double m = baseline_;
  for (const auto& b : bumps_)
    if (b.sign > 0) m = std::max(m, baseline_ + b.amplitude);
  return m;
}

CovariateLaw CovariateLaw::uniform(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("CovariateLaw: dimension out of range");
  CovariateLaw law;
  law.dim_ = dim;
  return law;
}

CovariateLaw CovariateLaw::piecewise(int dim, int cells_per_axis, std::vector<double> weights) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("CovariateLaw: dimension out of range");
  if (cells_per_axis < 1) throw std::invalid_argument("CovariateLaw: cells_per_axis must be >= 1");
  const int n = ipow(cells_per_axis, dim);
  if (static_cast<int>(weights.size()) != n)
    throw std::invalid_argument("CovariateLaw: weight count must equal cells_per_axis^dim");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("CovariateLaw: density must be bounded below by a positive constant");
  CovariateLaw law;
  law.dim_ = dim;
  law.cells_ = cells_per_axis;
  law.cumulative_.resize(n);
  law.density_.resize(n);
  double acc = 0.0;
  for (int c = 0; c < n; ++c) {
    acc += weights[c] / total;
    law.cumulative_[c] = acc;
    law.density_[c] = weights[c] / total * n;
  }
  law.cumulative_.back() = 1.0;
  law.lower_ = *std::min_element(law.density_.begin(), law.density_.end());
  law.upper_ = *std::max_element(law.density_.begin(), law.density_.end());
  return law;
}

Point CovariateLaw::sample(Rng& rng) const {
  Point x(dim_);
  if (cells_ == 1) {
    for (int j = 0; j < dim_; ++j) x[j] = rng.uniform();
    return x;
  }
  const double u = rng.uniform();
  int cell = static_cast<int>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
  cell = std::min(cell, static_cast<int>(cumulative_.size()) - 1);
  for (int j = dim_ - 1; j >= 0; --j) {
    const int v = cell % cells_;
    cell /= cells_;
    x[j] = (v + rng.uniform()) / cells_;
  }
  return x;
}

double CovariateLaw::mass(const Box& box) const {
  if (cells_ == 1) return box.volume();
  double total = 0.0;
  const int n = static_cast<int>(density_.size());
  for (int c = 0; c < n; ++c) {
    int rest = c;
    double overlap = 1.0;
    for (int j = dim_ - 1; j >= 0 && overlap > 0.0; --j) {
      const int v = rest % cells_;
      rest /= cells_;
      const double lo = std::max(box.lo[j], static_cast<double>(v) / cells_);
      const double hi = std::min(box.hi[j], static_cast<double>(v + 1) / cells_);
      overlap *= std::max(0.0, hi - lo);
    }
    total += overlap * density_[c];
  }
  return total;
}

BanditInstance::BanditInstance(std::string name, BumpField f_plus, BumpField f_minus, CovariateLaw law,
                               DeclaredParams declared)
    : name_(std::move(name)),
      f_plus_(std::move(f_plus)),
      f_minus_(std::move(f_minus)),
      law_(std::move(law)),
      declared_(declared) {
  if (f_plus_.dim() != f_minus_.dim() || f_plus_.dim() != law_.dim())
    throw std::invalid_argument("BanditInstance: dimension mismatch");
  for (const BumpField* f : {&f_plus_, &f_minus_}) {
    if (!f->supports_disjoint()) throw std::invalid_argument("BanditInstance: bump supports overlap");
    if (f->min_value() < 0.0 || f->max_value() > 1.0)
      throw std::invalid_argument("BanditInstance: mean rewards must lie in [0,1]");
  }
}

double BanditInstance::sup_advantage(Arm arm, const Box& box) const {
  const BumpField& mine = surface(arm);
  const BumpField& theirs = surface(other(arm));
  const int d = dim();
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Point& x) { best = std::max(best, mine(x) - theirs(x)); };

  for (const BumpField* f : {&mine, &theirs}) {
    for (int bi : f->bumps_touching(box)) {
      Point c = f->bumps()[bi].center;
      for (int j = 0; j < d; ++j) c[j] = std::clamp(c[j], box.lo[j], box.hi[j]);
      consider(c);
    }
  }
  const int per_axis = d <= 2 ? 9 : (d <= 4 ? 3 : 2);
  std::array<int, kMaxDim> idx{};
  while (true) {
    Point x(d);
    for (int j = 0; j < d; ++j)
      x[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * idx[j] / static_cast<double>(per_axis - 1);
    consider(x);
    int j = d - 1;
    while (j >= 0 && idx[j] == per_axis - 1) {
      idx[j] = 0;
      --j;
    }
    if (j < 0) break;
    ++idx[j];
  }
  return best;
}

SmoothnessReport verify_smoothness(const BanditInstance& instance, int n_pairs, Rng& rng, double tolerance) {
  if (n_pairs < 1) throw std::invalid_argument("verify_smoothness: n_pairs must be >= 1");
  const int d = instance.dim();
  const auto& decl = instance.declared();
  SmoothnessReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < n_pairs; ++p) {
    Point x(d), y(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform();
    if (p % 2 == 0) {
      for (int j = 0; j < d; ++j) y[j] = rng.uniform();
    } else {
      const double radius = std::pow(10.0, -4.0 + 3.0 * rng.uniform());
      for (int j = 0; j < d; ++j) y[j] = std::clamp(x[j] + radius * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
    }
    const double bound = decl.L * std::pow(l2_distance(x, y), decl.beta);
    for (Arm a : {Arm::Plus, Arm::Minus}) {
      const double v = std::abs(instance.mean_reward(a, x) - instance.mean_reward(a, y)) - bound;
      rep.max_violation = std::max(rep.max_violation, v);
    }
  }
  rep.holds = rep.max_violation <= tolerance;
  return rep;
}

MarginReport verify_margin(const BanditInstance& instance, std::span<const double> deltas, int n_samples,
                           Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("verify_margin: n_samples must be >= 1");
  MarginReport rep;
  rep.deltas.assign(deltas.begin(), deltas.end());
  for (double dl : rep.deltas)
    if (!(dl > 0.0)) throw std::invalid_argument("verify_margin: deltas must be positive");

  std::vector<double> gaps;
  gaps.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) gaps.push_back(instance.optimal_arm_and_gap(instance.sample_context(rng)).gap);
  std::sort(gaps.begin(), gaps.end());
  const auto first_positive = std::upper_bound(gaps.begin(), gaps.end(), 0.0);

  const double alpha = instance.declared().alpha;
  for (double dl : rep.deltas) {
    const auto hi = std::upper_bound(gaps.begin(), gaps.end(), dl);
    const double p = static_cast<double>(std::max<std::ptrdiff_t>(0, hi - first_positive)) / n_samples;
    const double se = std::sqrt(p * (1.0 - p) / n_samples);
    rep.probs.push_back(p);
    rep.std_errors.push_back(se);
    rep.fitted_d0 = std::max(rep.fitted_d0, p / std::pow(dl, alpha));
    if (const auto d0 = instance.declared().margin_d0) {
      if (p - 3.0 * se > *d0 * std::pow(dl, alpha)) rep.holds = false;
    }
  }
  return rep;
}

}  // namespace bbandit
