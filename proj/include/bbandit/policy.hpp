#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bbandit/core.hpp"

namespace bbandit {

class BanditInstance;

struct Observation {
  Point x;
  Arm arm;
  double reward;
};

/// One leaf as seen at the end of a batch (or at the end of the final batch).
struct LeafRecord {
  int layer = 0;
  std::array<std::int64_t, kMaxDim> lattice{};
  Box box;
  double width = 1.0;
  std::int64_t contexts = 0;  // m_{C,i}
  std::array<std::int64_t, 2> pulls{};
  std::array<double, 2> means{};
  std::uint8_t arms_before = 0;  // bit 0: +1, bit 1: -1
  std::uint8_t arms_after = 0;
  bool split = false;
};

struct BatchRecord {
  int batch = 0;  // 1-based
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::vector<LeafRecord> leaves;
};

/// Smoothness constants a binning policy was configured with; used by clean-event monitoring.
struct BinningContext {
  double beta = 1.0;
  double c0 = 1.0;
  double c1 = 8.0;
};

/// Episode interface shared by every policy. Batch policies (online() == false) never
/// see rewards except through end_batch, which the engine calls at grid points only.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  /// Horizon the policy was built for.
  virtual std::int64_t horizon() const = 0;
  virtual bool online() const { return false; }
  /// Grid t_0 = 0 < ... < t_M = T. Online policies report {0, T}.
  virtual std::span<const std::int64_t> grid() const = 0;

  virtual Arm select(const Point& x) = 0;
  /// Online policies only: feedback after every round.
  virtual void observe(const Observation&) {}
  /// Batch policies only: all observations of batch i (1-based), delivered once at t_i, i < M.
  virtual void end_batch(int, std::span<const Observation>) {}
  /// Called once after round T.
  virtual void finish() {}

  /// Per-batch bin records; empty for policies without bins.
  virtual const std::vector<BatchRecord>& batch_records() const {
    static const std::vector<BatchRecord> none;
    return none;
  }
  virtual const BinningContext* binning() const { return nullptr; }
};

using PolicyFactory = std::function<std::unique_ptr<Policy>(const BanditInstance&)>;

}  // namespace bbandit
