#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bbandit/grid_planner.hpp"
#include "bbandit/policy.hpp"

namespace bbandit {

/// Everything the binning policies need from a plan. Static binning reuses this with
/// split factors (g, 1, ..., 1).
struct BinningPlan {
  std::vector<std::int64_t> grid;           // t_0 .. t_M
  std::vector<std::int64_t> split_factors;  // g_0 .. g_{M-1}
  int d = 1;
  double c_thresh = 1.0;
  BinningContext context;

  int M() const { return static_cast<int>(grid.size()) - 1; }
  std::int64_t T() const { return grid.back(); }

  static BinningPlan from(const BatchPlan& plan);
};

/// Elimination threshold c_thresh * 4 sqrt(log(2 T width^d) / tau).
double threshold_U(std::int64_t tau, std::int64_t T, double width, int d, double c_thresh = 1.0);

inline constexpr std::uint8_t kBothArms = 0b11;

struct BinNode {
  int layer = 1;
  std::array<std::int64_t, kMaxDim> lattice{};  // 0-based cell index per axis
  std::int64_t cells_per_axis = 1;              // 1 / width
  double width = 1.0;
  std::uint8_t active = kBothArms;
  std::array<std::int64_t, 2> pulls{};
  std::array<double, 2> reward_sums{};
  std::int64_t contexts = 0;
  std::int64_t rr_counter = 0;
  int first_child = -1;
  std::int64_t child_split = 0;

  bool is_leaf() const { return first_child < 0; }
  bool has(Arm a) const { return active & (1u << arm_index(a)); }
  int active_count() const { return (active & 1u) + ((active >> 1) & 1u); }
  double mean(Arm a) const {
    const int k = arm_index(a);
    return pulls[k] > 0 ? reward_sums[k] / static_cast<double>(pulls[k]) : 0.0;
  }
  Box box(int d) const;
};

/// Dynamic partition of [0,1]^d with per-leaf active arms and per-batch statistics.
class PolicyState {
 public:
  explicit PolicyState(BinningPlan plan);

  /// Index of the unique leaf containing x (coordinate 1.0 belongs to the last cell).
  int locate(const Point& x) const;
  const BinNode& node(int index) const { return nodes_[index]; }
  std::span<const int> leaves() const { return leaves_; }
  int batch_index() const { return batch_index_; }
  const BinningPlan& plan() const { return plan_; }

  /// Round-robin over the leaf's active arms starting with +1; smallest index in the final batch.
  Arm select_arm(const Point& x);
  void record_outcome(const Point& x, Arm arm, double reward);
  /// Tree growth: eliminate within each two-armed leaf, then split survivors by g.
  /// Returns the leaf records as they stood before the update.
  BatchRecord end_of_batch_update(int i, std::int64_t g);
  /// Leaf records for the current batch without modifying the tree.
  BatchRecord snapshot() const;

 private:
  LeafRecord record_of(const BinNode& n) const;
  void split(int index, std::int64_t g);

  BinningPlan plan_;
  std::vector<BinNode> nodes_;
  std::vector<int> leaves_;
  std::int64_t top_cells_ = 1;
  int batch_index_ = 1;
};

/// BaSEDB as an episode policy.
class BaSEDBPolicy : public Policy {
 public:
  explicit BaSEDBPolicy(BinningPlan plan, std::string name = "basedb");

  std::string name() const override { return name_; }
  std::int64_t horizon() const override { return state_.plan().T(); }
  std::span<const std::int64_t> grid() const override { return state_.plan().grid; }
  Arm select(const Point& x) override { return state_.select_arm(x); }
  void end_batch(int i, std::span<const Observation> batch) override;
  void finish() override;
  const std::vector<BatchRecord>& batch_records() const override { return records_; }
  const BinningContext* binning() const override { return &state_.plan().context; }

  const PolicyState& state() const { return state_; }

 private:
  PolicyState state_;
  std::string name_;
  std::vector<BatchRecord> records_;
};

/// One CSV line per leaf per batch: batch, layer, lattice (1-based, ':'-joined), arms, pulls, means.
void write_tree_dump(std::ostream& os, std::span<const BatchRecord> records, bool header = true);

std::string arms_label(std::uint8_t mask);

}  // namespace bbandit
