#include "ergo/core/cloud.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "ergo/core/errors.hpp"
#include "ergo/core/parallel.hpp"

namespace ergo {

DynamicalCloud::DynamicalCloud(const SystemModel& sys, std::vector<StatePoint> points, int n_max,
                               double r_max)
    : sys_(sys), size_(points.size()), n_max_(n_max), r_max_(r_max) {
  if (n_max < 1) throw DomainError("cloud: n_max must be >= 1");
  if (!(r_max > 0.0)) throw DomainError("cloud: r_max must be positive");
  if (points.empty()) throw DomainError("cloud: no points");
  if (points.size() > UINT32_MAX) throw DomainError("cloud: too many points");
  for (const auto& p : points) {
    if (!p.finite() || !sys.in_domain(p)) throw DomainError("cloud: point outside the domain");
  }

  cells_ = sys.make_cell_map(points, r_max);
  if (cells_->cell_count() > UINT32_MAX) throw DomainError("cloud: too many index cells");
  std::vector<std::size_t> cell(size_);
  cell_start_.assign(cells_->cell_count() + 1, 0);
  for (std::size_t i = 0; i < size_; ++i) {
    cell[i] = cells_->cell_of(points[i]);
    ++cell_start_[cell[i] + 1];
  }
  std::partial_sum(cell_start_.begin(), cell_start_.end(), cell_start_.begin());
  perm_.resize(size_);
  slot_of_.resize(size_);
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t s = fill[cell[i]]++;
    perm_[s] = static_cast<std::uint32_t>(i);
    slot_of_[i] = s;
  }

  states_.resize(size_ * static_cast<std::size_t>(n_max));
  valid_.assign(size_, n_max);
  constexpr std::size_t kChunk = 4096;
  const std::size_t n_chunks = (size_ + kChunk - 1) / kChunk;
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::size_t end = std::min(size_, (c + 1) * kChunk);
    for (std::size_t s = c * kChunk; s < end; ++s) {
      auto at = [&](int k) -> StatePoint& { return states_[static_cast<std::size_t>(k) * size_ + s]; };
      at(0) = points[perm_[s]];
      for (int k = 1; k < n_max; ++k) {
        try {
          at(k) = sys.step(at(k - 1));
        } catch (const DivergenceError&) {
          valid_[s] = k;
          break;
        }
        if (!at(k).finite()) {
          valid_[s] = k;
          break;
        }
      }
      // Keep the tail finite so storage never holds garbage.
      for (int k = valid_[s]; k < n_max; ++k) at(k) = at(valid_[s] - 1);
    }
  });
}

std::vector<StatePoint> DynamicalCloud::orbit(std::size_t i) const {
  const std::size_t s = slot_of_[i];
  std::vector<StatePoint> out;
  out.reserve(static_cast<std::size_t>(valid_[s]));
  for (int k = 0; k < valid_[s]; ++k) out.push_back(states_[static_cast<std::size_t>(k) * size_ + s]);
  return out;
}

std::size_t DynamicalCloud::diverged_count() const {
  return static_cast<std::size_t>(
      std::count_if(valid_.begin(), valid_.end(), [&](int v) { return v < n_max_; }));
}

void DynamicalCloud::check_query(std::span<const StatePoint> center_orbit, int n, double r) const {
  if (n < 1 || n > n_max_) throw DomainError("cloud query: n outside [1, n_max]");
  if (!(r > 0.0) || r > r_max_) throw DomainError("cloud query: r outside (0, r_max]");
  if (static_cast<int>(center_orbit.size()) < n) throw DomainError("cloud query: center orbit too short");
}

const DynamicalCloud::PairIndex& DynamicalCloud::pair_index(int n) const {
  std::lock_guard lock(pair_mutex_);
  auto& slot = pairs_[n];
  if (slot) return *slot;
  auto idx = std::make_unique<PairIndex>();
  idx->slots.resize(size_);
  idx->last_cell.resize(size_);
  std::vector<std::uint32_t> last(size_);
  for (std::size_t s = 0; s < size_; ++s) {
    last[s] = static_cast<std::uint32_t>(cells_->cell_of(states_[static_cast<std::size_t>(n - 1) * size_ + s]));
  }
  for (std::size_t c = 0; c + 1 < cell_start_.size(); ++c) {
    const std::size_t b = cell_start_[c], e = cell_start_[c + 1];
    std::iota(idx->slots.begin() + b, idx->slots.begin() + e, static_cast<std::uint32_t>(b));
    std::sort(idx->slots.begin() + b, idx->slots.begin() + e,
              [&](std::uint32_t x, std::uint32_t y) { return last[x] < last[y] || (last[x] == last[y] && x < y); });
    for (std::size_t k = b; k < e; ++k) idx->last_cell[k] = last[idx->slots[k]];
  }
  slot = std::move(idx);
  return *slot;
}

// Slots that can lie in B_n(center, r): close at step 0 and at step n-1.
void DynamicalCloud::candidates(std::span<const StatePoint> center_orbit, int n, double r,
                                std::vector<std::uint32_t>& out) const {
  std::vector<std::size_t> first;
  cells_->cells_near(center_orbit[0], r, first);
  if (n == 1) {
    for (std::size_t c : first) {
      for (std::size_t s = cell_start_[c]; s < cell_start_[c + 1]; ++s) out.push_back(static_cast<std::uint32_t>(s));
    }
    return;
  }
  const PairIndex& idx = pair_index(n);
  std::vector<std::size_t> last;
  cells_->cells_near(center_orbit[n - 1], r, last);
  for (std::size_t c : first) {
    const auto begin = idx.last_cell.begin() + static_cast<std::ptrdiff_t>(cell_start_[c]);
    const auto end = idx.last_cell.begin() + static_cast<std::ptrdiff_t>(cell_start_[c + 1]);
    if (begin == end) continue;
    auto it = begin;
    for (std::size_t l : last) {
      it = std::lower_bound(it, end, static_cast<std::uint32_t>(l));
      while (it != end && *it == l) {
        out.push_back(idx.slots[static_cast<std::size_t>(it - idx.last_cell.begin())]);
        ++it;
      }
      if (it == end) break;
    }
  }
}

std::vector<std::uint32_t> DynamicalCloud::members(std::span<const StatePoint> center_orbit, int n,
                                                   double r) const {
  check_query(center_orbit, n, r);
  std::vector<std::unique_ptr<BallTest>> tests;
  tests.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) tests.push_back(sys_.ball_test(center_orbit[k], r));

  std::vector<std::uint32_t> slots;
  candidates(center_orbit, n, r, slots);
  std::vector<std::uint32_t> out;
  for (std::uint32_t s : slots) {
    if (valid_[s] < n) continue;
    // Late steps separate most points; test backwards.
    bool inside = true;
    for (int k = n - 1; k >= 0 && inside; --k) inside = tests[k]->contains(states_[static_cast<std::size_t>(k) * size_ + s]);
    if (inside) out.push_back(perm_[s]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<long> DynamicalCloud::mass_profile(std::span<const StatePoint> center_orbit, int n,
                                               double r) const {
  check_query(center_orbit, n, r);
  std::vector<std::unique_ptr<BallTest>> tests;
  tests.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) tests.push_back(sys_.ball_test(center_orbit[k], r));

  std::vector<std::uint32_t> slots;
  candidates(center_orbit, 1, r, slots);
  std::vector<long> exits(static_cast<std::size_t>(n) + 1, 0);
  for (std::uint32_t s : slots) {
    const int len = std::min(n, valid_[s]);
    int k = 0;
    while (k < len && tests[k]->contains(states_[static_cast<std::size_t>(k) * size_ + s])) ++k;
    ++exits[k];
  }
  std::vector<long> counts(static_cast<std::size_t>(n));
  long acc = 0;
  for (int k = n; k >= 1; --k) {
    acc += exits[k];
    counts[k - 1] = acc;
  }
  return counts;
}

}  // namespace ergo
