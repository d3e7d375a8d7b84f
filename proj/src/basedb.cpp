#include "bbandit/basedb.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace bbandit {

namespace {

std::int64_t ipow64(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

constexpr std::int64_t kMaxNodes = 50'000'000;

}  // namespace

BinningPlan BinningPlan::from(const BatchPlan& plan) {
  BinningPlan bp;
  bp.grid = plan.grid;
  bp.split_factors = plan.split_factors;
  bp.d = plan.params.d;
  bp.c_thresh = plan.params.c_thresh;
  bp.context = {plan.params.beta, plan.c0, plan.c1};
  return bp;
}

double threshold_U(std::int64_t tau, std::int64_t T, double width, int d, double c_thresh) {
  if (tau <= 0) throw std::invalid_argument("threshold_U: tau must be >= 1");
  const double inner = 2.0 * static_cast<double>(T) * std::pow(width, d);
  if (!(inner > 1.0)) throw std::invalid_argument("threshold_U: need 2 T width^d > 1");
  return c_thresh * 4.0 * std::sqrt(std::log(inner) / static_cast<double>(tau));
}

Box BinNode::box(int d) const {
  Box b{Point(d), Point(d)};
  for (int j = 0; j < d; ++j) {
    b.lo[j] = static_cast<double>(lattice[j]) / cells_per_axis;
    b.hi[j] = static_cast<double>(lattice[j] + 1) / cells_per_axis;
  }
  return b;
}

PolicyState::PolicyState(BinningPlan plan) : plan_(std::move(plan)) {
  const int M = plan_.M();
  if (M < 1) throw std::invalid_argument("PolicyState: grid needs at least one batch");
  if (static_cast<int>(plan_.split_factors.size()) != M)
    throw std::invalid_argument("PolicyState: need one split factor per batch");
  for (int i = 1; i <= M; ++i)
    if (plan_.grid[i] <= plan_.grid[i - 1]) throw std::invalid_argument("PolicyState: grid must be strictly increasing");
  if (plan_.grid.front() != 0) throw std::invalid_argument("PolicyState: grid must start at 0");
  for (auto g : plan_.split_factors)
    if (g < 1) throw std::invalid_argument("PolicyState: split factors must be >= 1");
  if (plan_.d < 1 || plan_.d > kMaxDim) throw std::invalid_argument("PolicyState: dimension out of range");

  const std::int64_t g0 = plan_.split_factors[0];
  top_cells_ = g0;
  const std::int64_t n = ipow64(g0, plan_.d);
  if (n > kMaxNodes) throw std::invalid_argument("PolicyState: too many bins");
  nodes_.reserve(static_cast<std::size_t>(n));
  for (std::int64_t flat = 0; flat < n; ++flat) {
    BinNode node;
    node.layer = 1;
    node.cells_per_axis = g0;
    node.width = 1.0 / static_cast<double>(g0);
    std::int64_t rest = flat;
    for (int j = plan_.d - 1; j >= 0; --j) {
      node.lattice[j] = rest % g0;
      rest /= g0;
    }
    nodes_.push_back(node);
    leaves_.push_back(static_cast<int>(flat));
  }
}

int PolicyState::locate(const Point& x) const {
  const int d = plan_.d;
  std::int64_t flat = 0;
  for (int j = 0; j < d; ++j) {
    const auto c = std::clamp<std::int64_t>(static_cast<std::int64_t>(x[j] * static_cast<double>(top_cells_)), 0, top_cells_ - 1);
    flat = flat * top_cells_ + c;
  }
  int idx = static_cast<int>(flat);
  while (!nodes_[idx].is_leaf()) {
    const BinNode& n = nodes_[idx];
    const std::int64_t g = n.child_split;
    const double fine = static_cast<double>(n.cells_per_axis * g);
    std::int64_t offset = 0;
    for (int j = 0; j < d; ++j) {
      const auto c = std::clamp<std::int64_t>(static_cast<std::int64_t>(x[j] * fine) - n.lattice[j] * g, 0, g - 1);
      offset = offset * g + c;
    }
    idx = n.first_child + static_cast<int>(offset);
  }
  return idx;
}

Arm PolicyState::select_arm(const Point& x) {
  BinNode& n = nodes_[locate(x)];
  ++n.contexts;
  if (batch_index_ >= plan_.M()) return n.has(Arm::Plus) ? Arm::Plus : Arm::Minus;
  if (n.active == kBothArms) return (n.rr_counter++ % 2 == 0) ? Arm::Plus : Arm::Minus;
  return n.has(Arm::Plus) ? Arm::Plus : Arm::Minus;
}

void PolicyState::record_outcome(const Point& x, Arm arm, double reward) {
  BinNode& n = nodes_[locate(x)];
  if (!n.has(arm)) throw std::logic_error("record_outcome: arm is not active in this bin");
  const int k = arm_index(arm);
  ++n.pulls[k];
  n.reward_sums[k] += reward;
}

LeafRecord PolicyState::record_of(const BinNode& n) const {
  LeafRecord r;
  r.layer = n.layer;
  r.lattice = n.lattice;
  r.box = n.box(plan_.d);
  r.width = n.width;
  r.contexts = n.contexts;
  r.pulls = n.pulls;
  r.means = {n.mean(Arm::Plus), n.mean(Arm::Minus)};
  r.arms_before = n.active;
  r.arms_after = n.active;
  return r;
}

BatchRecord PolicyState::snapshot() const {
  BatchRecord rec;
  rec.batch = batch_index_;
  rec.start = plan_.grid[batch_index_ - 1];
  rec.end = plan_.grid[batch_index_];
  rec.leaves.reserve(leaves_.size());
  for (int li : leaves_) rec.leaves.push_back(record_of(nodes_[li]));
  return rec;
}

void PolicyState::split(int index, std::int64_t g) {
  const int d = plan_.d;
  const std::int64_t n_children = ipow64(g, d);
  if (static_cast<std::int64_t>(nodes_.size()) + n_children > kMaxNodes)
    throw std::runtime_error("PolicyState: node budget exceeded");
  const BinNode parent = nodes_[index];
  nodes_[index].first_child = static_cast<int>(nodes_.size());
  nodes_[index].child_split = g;
  for (std::int64_t flat = 0; flat < n_children; ++flat) {
    BinNode child;
    child.layer = parent.layer + 1;
    child.cells_per_axis = parent.cells_per_axis * g;
    child.width = parent.width / static_cast<double>(g);
    child.active = parent.active;
    std::int64_t rest = flat;
    for (int j = d - 1; j >= 0; --j) {
      child.lattice[j] = parent.lattice[j] * g + rest % g;
      rest /= g;
    }
    nodes_.push_back(child);
  }
}

BatchRecord PolicyState::end_of_batch_update(int i, std::int64_t g) {
  const int M = plan_.M();
  if (i != batch_index_ || i < 1 || i > M - 1)
    throw std::logic_error("end_of_batch_update: batch index out of order");
  if (g < 1) throw std::invalid_argument("end_of_batch_update: split factor must be >= 1");

  BatchRecord rec = snapshot();
  const std::int64_t T = plan_.T();
  std::vector<int> next;
  next.reserve(leaves_.size());
  for (std::size_t li = 0; li < leaves_.size(); ++li) {
    const int idx = leaves_[li];
    LeafRecord& lr = rec.leaves[li];
    BinNode& n = nodes_[idx];
    if (n.active != kBothArms) {
      next.push_back(idx);
      continue;
    }
    // No elimination without evidence for both arms.
    if (n.pulls[0] > 0 && n.pulls[1] > 0) {
      const std::int64_t m = n.pulls[0] + n.pulls[1];
      const double u = threshold_U(m, T, n.width, plan_.d, plan_.c_thresh);
      const double best = std::max(n.mean(Arm::Plus), n.mean(Arm::Minus));
      std::uint8_t keep = kBothArms;
      for (Arm a : {Arm::Plus, Arm::Minus})
        if (best - n.mean(a) > u) keep &= static_cast<std::uint8_t>(~(1u << arm_index(a)));
      n.active = keep;
    }
    lr.arms_after = n.active;
    if (n.active == kBothArms && g > 1) {
      split(idx, g);
      lr.split = true;
      const BinNode& parent = nodes_[idx];
      const std::int64_t n_children = ipow64(g, plan_.d);
      for (std::int64_t c = 0; c < n_children; ++c) next.push_back(parent.first_child + static_cast<int>(c));
    } else {
      next.push_back(idx);
    }
  }
  leaves_ = std::move(next);
  for (int idx : leaves_) {
    BinNode& n = nodes_[idx];
    n.pulls = {0, 0};
    n.reward_sums = {0.0, 0.0};
    n.contexts = 0;
  }
  ++batch_index_;
  return rec;
}

BaSEDBPolicy::BaSEDBPolicy(BinningPlan plan, std::string name) : state_(std::move(plan)), name_(std::move(name)) {}

void BaSEDBPolicy::end_batch(int i, std::span<const Observation> batch) {
  for (const auto& o : batch) state_.record_outcome(o.x, o.arm, o.reward);
  records_.push_back(state_.end_of_batch_update(i, state_.plan().split_factors[i]));
}

void BaSEDBPolicy::finish() { records_.push_back(state_.snapshot()); }

std::string arms_label(std::uint8_t mask) {
  switch (mask) {
    case kBothArms:
      return "+1|-1";
    case 0b01:
      return "+1";
    case 0b10:
      return "-1";
    default:
      return "";
  }
}

void write_tree_dump(std::ostream& os, std::span<const BatchRecord> records, bool header) {
  if (header) os << "batch,layer,lattice,width,arms_before,arms_after,split,contexts,pulls_plus,pulls_minus,mean_plus,mean_minus\n";
  for (const auto& rec : records) {
    for (const auto& l : rec.leaves) {
      std::string lattice;
      const int d = l.box.dim();
      for (int j = 0; j < d; ++j) lattice += (j ? ":" : "") + std::to_string(l.lattice[j] + 1);
      os << fmt::format("{},{},{},{:.10g},{},{},{},{},{},{},{:.10g},{:.10g}\n", rec.batch, l.layer, lattice, l.width,
                        arms_label(l.arms_before), arms_label(l.arms_after), l.split ? 1 : 0, l.contexts, l.pulls[0],
                        l.pulls[1], l.means[0], l.means[1]);
    }
  }
}

}  // namespace bbandit
