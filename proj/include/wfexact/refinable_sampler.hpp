#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "wfexact/error.hpp"
#include "wfexact/series.hpp"

namespace wfexact {

struct RefinementOptions {
  /// Refinement sweeps allowed for one uniform before giving up.
  int max_refinements = 4096;
  /// Sweeps in a row that leave both partial sums unchanged (bounds have hit
  /// machine precision with u still between them).
  int stagnation_limit = 8;
  std::size_t max_indices = std::size_t{1} << 22;
  /// Depth increment for the visited entry at `position` during a sweep.
  /// Empty means the uniform (1,1,...,1) step.
  std::function<int(std::size_t position, int depth)> step;
};

template <typename Index>
struct RefinedDraw {
  Index index{};
  /// Lower partial CDF over visited indices at return; exceeds u.
  double lower_cdf = 0.0;
  /// Lower partial CDF without the returned index; does not exceed u.
  double lower_cdf_before = 0.0;
  std::size_t visited = 0;
  /// Sum of the final refinement depths over visited indices.
  std::int64_t depth_sum = 0;
  int refinements = 0;
};

/// Inversion sampling from a pmf whose terms are only available through
/// refinable bounds.
///
/// `next_index()` enumerates the support (any bijection with the index set);
/// `bounds(index, depth)` returns a Bracket that is valid for every depth
/// >= `burn_in(index)` and converges to the pmf value as depth grows. Visited
/// entries are refined together until the running lower sum exceeds u (return
/// the newest index) or the running upper sum falls below u (visit the next
/// index). Only the validity of the brackets matters for exactness; the
/// order of inspection changes which index a given u maps to, not the law.
template <typename Index, typename Next, typename Bounds, typename BurnIn>
RefinedDraw<Index> sample_by_refinable_bounds(double u, Next&& next_index, Bounds&& bounds,
                                              BurnIn&& burn_in,
                                              const RefinementOptions& options = {}) {
  struct Entry {
    Index index;
    int depth;
    Bracket bracket;
  };
  std::vector<Entry> visited;
  KahanSum<double> lower_acc;
  KahanSum<double> upper_acc;
  RefinedDraw<Index> out;

  for (;;) {
    if (visited.size() >= options.max_indices)
      throw RefinementCapExceeded("index budget exhausted before the partial CDF reached u");
    Index idx = next_index();
    const int depth = burn_in(idx);
    const Bracket br = bounds(idx, depth);
    visited.push_back({idx, depth, br});
    lower_acc += br.lower;
    upper_acc += br.upper;

    int stagnant = 0;
    for (;;) {
      const double lower = lower_acc.value();
      const double upper = upper_acc.value();
      if (lower > u) {
        out.index = visited.back().index;
        out.lower_cdf = lower;
        KahanSum<double> before;
        for (std::size_t i = 0; i + 1 < visited.size(); ++i) before += visited[i].bracket.lower;
        out.lower_cdf_before = before.value();
        out.visited = visited.size();
        for (const auto& e : visited) out.depth_sum += e.depth;
        return out;
      }
      if (upper < u) break;

      if (++out.refinements > options.max_refinements)
        throw RefinementCapExceeded("refinement budget exhausted; u sits on a partial-sum boundary");
      KahanSum<double> new_lower;
      KahanSum<double> new_upper;
      for (std::size_t i = 0; i < visited.size(); ++i) {
        Entry& e = visited[i];
        e.depth += options.step ? options.step(i, e.depth) : 1;
        e.bracket = bounds(e.index, e.depth);
        new_lower += e.bracket.lower;
        new_upper += e.bracket.upper;
      }
      if (new_lower.value() == lower && new_upper.value() == upper) {
        if (++stagnant >= options.stagnation_limit)
          throw RefinementCapExceeded("bounds converged to machine precision around u");
      } else {
        stagnant = 0;
      }
      lower_acc = new_lower;
      upper_acc = new_upper;
    }
  }
}

/// Symmetric outward sweep over the nonnegative integers starting at
/// `center`: c, c+1, c-1, c+2, c-2, ... (negative values skipped).
class RadiatingOrder {
 public:
  explicit RadiatingOrder(std::int64_t center) : center_(center < 0 ? 0 : center) {}
  std::int64_t operator()() {
    for (;;) {
      const std::int64_t offset = step_ == 0 ? 0 : ((step_ % 2 == 1) ? (step_ + 1) / 2 : -(step_ / 2));
      ++step_;
      const std::int64_t value = center_ + offset;
      if (value >= 0) return value;
    }
  }

 private:
  std::int64_t center_;
  std::int64_t step_ = 0;
};

class AscendingOrder {
 public:
  std::int64_t operator()() { return next_++; }

 private:
  std::int64_t next_ = 0;
};

}  // namespace wfexact
