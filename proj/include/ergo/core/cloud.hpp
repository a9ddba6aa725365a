#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "ergo/core/system.hpp"

namespace ergo {

// A finite point cloud with precomputed orbits, answering dynamical-ball
// membership queries B_n(c, r) for n <= n_max and r <= r_max.
class DynamicalCloud {
 public:
  DynamicalCloud(const SystemModel& sys, std::vector<StatePoint> points, int n_max, double r_max);

  const SystemModel& system() const { return sys_; }
  std::size_t size() const { return size_; }
  int n_max() const { return n_max_; }
  double r_max() const { return r_max_; }
  const StatePoint& point(std::size_t i) const { return states_[slot_of_[i]]; }
  // The valid part of the stored orbit of point i.
  std::vector<StatePoint> orbit(std::size_t i) const;
  // Number of orbit states computed before divergence (n_max if none).
  int valid_length(std::size_t i) const { return valid_[slot_of_[i]]; }
  std::size_t diverged_count() const;

  // Sorted indices of cloud points in B_n(center, r); center_orbit needs >= n states.
  std::vector<std::uint32_t> members(std::span<const StatePoint> center_orbit, int n, double r) const;
  // counts[k-1] = |cloud ∩ B_k(center, r)| for k = 1..n.
  std::vector<long> mass_profile(std::span<const StatePoint> center_orbit, int n, double r) const;

 private:
  // Slots sorted by (cell at step 0, cell at step n-1), grouped by step-0 cell.
  struct PairIndex {
    std::vector<std::uint32_t> slots;
    std::vector<std::uint32_t> last_cell;
  };

  void check_query(std::span<const StatePoint> center_orbit, int n, double r) const;
  const PairIndex& pair_index(int n) const;
  void candidates(std::span<const StatePoint> center_orbit, int n, double r,
                  std::vector<std::uint32_t>& out) const;

  const SystemModel& sys_;
  std::size_t size_;
  int n_max_;
  double r_max_;
  std::unique_ptr<CellMap> cells_;
  // Storage is grouped by step-0 cell: slot s holds point perm_[s].
  std::vector<std::uint32_t> perm_;
  std::vector<std::size_t> slot_of_;
  std::vector<std::size_t> cell_start_;  // CSR over step-0 cells
  std::vector<StatePoint> states_;       // step-major: slot s, step k at k * size + s
  std::vector<int> valid_;               // by slot
  mutable std::mutex pair_mutex_;
  mutable std::map<int, std::unique_ptr<PairIndex>> pairs_;
};

}  // namespace ergo
