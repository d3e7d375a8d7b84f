#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bbandit/basedb.hpp"
#include "bbandit/instance.hpp"

namespace bbandit {

struct StaticSEConfig {
  std::vector<std::int64_t> grid;
  std::int64_t g = 1;
};

/// BaSEDB with split factors (g, 1, ..., 1): one fixed partition, elimination at every batch end.
std::unique_ptr<Policy> static_se_policy(const StaticSEConfig& config, int d, double c_thresh,
                                         BinningContext context);

/// Split factors (g, 1, ..., 1) for an M-batch grid.
std::vector<std::int64_t> static_split_factors(std::int64_t g, int M);

struct OnlineBSEConfig {
  std::int64_t g = 1;
  double c_thresh = 1.0;
};

/// Fully online binned successive elimination: g^d fixed bins, per-round elimination
/// with cumulative in-bin counts.
class OnlineBSEPolicy : public Policy {
 public:
  OnlineBSEPolicy(OnlineBSEConfig config, std::int64_t T, int d);

  std::string name() const override { return "online_bse"; }
  std::int64_t horizon() const override { return grid_[1]; }
  bool online() const override { return true; }
  std::span<const std::int64_t> grid() const override { return grid_; }
  Arm select(const Point& x) override;
  void observe(const Observation& obs) override;

  struct Bin {
    std::uint8_t active = kBothArms;
    std::array<std::int64_t, 2> pulls{};
    std::array<double, 2> sums{};
    std::int64_t rr = 0;
  };
  const Bin& bin(int index) const { return bins_[index]; }
  int bin_of(const Point& x) const;
  std::int64_t bins_per_axis() const { return config_.g; }

 private:
  OnlineBSEConfig config_;
  int d_;
  double width_;
  std::vector<std::int64_t> grid_;
  std::vector<Bin> bins_;
};

/// Pulls the optimal arm (ties to +1). Keeps a reference to the instance.
class OraclePolicy : public Policy {
 public:
  OraclePolicy(const BanditInstance& instance, std::int64_t T) : instance_(instance), grid_{0, T} {}
  std::string name() const override { return "oracle"; }
  std::int64_t horizon() const override { return grid_[1]; }
  bool online() const override { return true; }
  std::span<const std::int64_t> grid() const override { return grid_; }
  Arm select(const Point& x) override { return instance_.optimal_arm_and_gap(x).arm; }

 private:
  const BanditInstance& instance_;
  std::vector<std::int64_t> grid_;
};

class FixedArmPolicy : public Policy {
 public:
  FixedArmPolicy(Arm arm, std::int64_t T) : arm_(arm), grid_{0, T} {}
  std::string name() const override { return "fixed_arm"; }
  std::int64_t horizon() const override { return grid_[1]; }
  bool online() const override { return true; }
  std::span<const std::int64_t> grid() const override { return grid_; }
  Arm select(const Point&) override { return arm_; }

 private:
  Arm arm_;
  std::vector<std::int64_t> grid_;
};

}  // namespace bbandit
