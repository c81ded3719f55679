#include "mmce/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace mmce {

namespace {

constexpr double kEps = 1e-9;

std::size_t grid_index(const ResponseCurve& c, double t) {
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    if (std::abs(c.grid[i] - t) < kEps) return i;
  }
  throw ValidationError("candidate level not on curve grid");
}

}  // namespace

void AllocationProblem::validate() const {
  if (budget < 0.0) throw ValidationError("budget must be >= 0");
  if (levels.empty() || std::abs(levels.front()) > kEps) {
    throw ValidationError("candidate grid must start at 0");
  }
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) throw ValidationError("candidate grid not ascending");
  }
  for (const ResponseCurve& c : curves) {
    for (double t : levels) grid_index(c, t);
  }
}

double AllocationProblem::value_at(std::size_t i, std::size_t j) const {
  return curves[i].incremental[grid_index(curves[i], levels[j])];
}

double roi(const ResponseCurve& curve, double t) {
  if (t <= 0.0) throw ValidationError("roi requires t > 0");
  return curve.incremental[grid_index(curve, t)] / t;
}

namespace {

Assignment make_assignment(const AllocationProblem& p, const std::vector<std::size_t>& pick) {
  Assignment a;
  for (std::size_t i = 0; i < p.curves.size(); ++i) {
    Assignment::Choice c;
    c.id = p.curves[i].id;
    c.t = p.levels[pick[i]];
    c.cost = c.t;
    c.predicted_incremental = p.value_at(i, pick[i]);
    a.total_cost += c.cost;
    a.total_incremental += c.predicted_incremental;
    a.choices.push_back(c);
  }
  return a;
}

// Indices of the upper concave envelope of (cost, value) over candidate levels.
std::vector<std::size_t> concave_envelope(const AllocationProblem& p, std::size_t rider) {
  std::vector<std::size_t> hull;
  for (std::size_t j = 0; j < p.levels.size(); ++j) {
    const double xj = p.levels[j];
    const double yj = p.value_at(rider, j);
    while (hull.size() >= 2) {
      const std::size_t j1 = hull[hull.size() - 1];
      const std::size_t j2 = hull[hull.size() - 2];
      const double cross = (p.levels[j1] - p.levels[j2]) * (yj - p.value_at(rider, j2)) -
                           (xj - p.levels[j2]) * (p.value_at(rider, j1) - p.value_at(rider, j2));
      if (cross >= -1e-12) {
        hull.pop_back();  // j1 lies on or below the chord j2 -> j
      } else {
        break;
      }
    }
    hull.push_back(j);
  }
  // Remove non-improving steps from the tail of the hull.
  std::vector<std::size_t> cleaned;
  cleaned.push_back(hull.front());
  for (std::size_t k = 1; k < hull.size(); ++k) {
    if (p.value_at(rider, hull[k]) > p.value_at(rider, cleaned.back()) + 1e-12) {
      cleaned.push_back(hull[k]);
    }
  }
  return cleaned;
}

}  // namespace

namespace {

using Pin = std::pair<std::size_t, std::size_t>;  // (rider, level index)

// Frontier walk over the concave envelopes; pinned riders are held at a fixed
// level and excluded from the walk.
std::vector<std::size_t> frontier_walk(const AllocationProblem& p,
                                       const std::vector<std::vector<std::size_t>>& hulls,
                                       std::span<const Pin> pins) {
  const std::size_t n = p.curves.size();
  std::vector<std::size_t> pos(n, 0);  // index into hull; hull[0] is level 0
  std::vector<bool> pinned(n, false);
  for (const Pin& pin : pins) pinned[pin.first] = true;

  struct Step {
    double ratio;
    std::int64_t id;
    double t;
    std::size_t rider;
  };
  auto cmp = [](const Step& a, const Step& b) {
    if (a.ratio != b.ratio) return a.ratio < b.ratio;
    if (a.id != b.id) return a.id > b.id;
    return a.t > b.t;
  };
  std::priority_queue<Step, std::vector<Step>, decltype(cmp)> pq(cmp);

  auto push_step = [&](std::size_t rider) {
    const auto& hull = hulls[rider];
    const std::size_t k = pos[rider];
    if (k + 1 >= hull.size()) return;
    const double dcost = p.levels[hull[k + 1]] - p.levels[hull[k]];
    const double dval = p.value_at(rider, hull[k + 1]) - p.value_at(rider, hull[k]);
    pq.push({dval / dcost, p.curves[rider].id, p.levels[hull[k + 1]], rider});
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!pinned[i]) push_step(i);
  }

  double remaining = p.budget;
  for (const Pin& pin : pins) remaining -= p.levels[pin.second];
  while (!pq.empty()) {
    const Step s = pq.top();
    pq.pop();
    const auto& hull = hulls[s.rider];
    const std::size_t k = pos[s.rider];
    const double dcost = p.levels[hull[k + 1]] - p.levels[hull[k]];
    if (dcost <= remaining + kEps) {
      remaining -= dcost;
      pos[s.rider] += 1;
      push_step(s.rider);
    }
    // An unaffordable step blocks the rider's remaining frontier.
  }

  std::vector<std::size_t> pick(n, 0);
  for (std::size_t i = 0; i < n; ++i) pick[i] = hulls[i][pos[i]];
  for (const Pin& pin : pins) pick[pin.first] = pin.second;
  return pick;
}

}  // namespace

Assignment allocate_greedy(const AllocationProblem& p) {
  p.validate();
  const std::size_t n = p.curves.size();
  const std::size_t m = p.levels.size();
  std::vector<std::vector<std::size_t>> hulls(n);
  for (std::size_t i = 0; i < n; ++i) hulls[i] = concave_envelope(p, i);

  Assignment best = make_assignment(p, frontier_walk(p, hulls, {}));
  auto consider = [&](const std::vector<std::size_t>& pick) {
    const Assignment cand = make_assignment(p, pick);
    if (cand.total_incremental > best.total_incremental + 1e-12) best = cand;
  };

  // Repair passes for non-concave frontiers: the envelope walk can strand the
  // budget mid-step, so retry with affordable (rider, level) choices pinned.
  // On large instances only pin single jumps from an otherwise-zero assignment.
  const bool small = n * m <= 4096;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 1; j < m; ++j) {
      if (p.levels[j] > p.budget + kEps) break;
      if (small) {
        const Pin pin{i, j};
        consider(frontier_walk(p, hulls, {&pin, 1}));
      } else {
        std::vector<std::size_t> pick(n, 0);
        pick[i] = j;
        consider(pick);
      }
    }
  }
  if (n * m <= 128) {
    // Tiny instances can afford pinning pairs, covering two strandings at once.
    for (std::size_t i1 = 0; i1 < n; ++i1) {
      for (std::size_t j1 = 1; j1 < m; ++j1) {
        if (p.levels[j1] > p.budget + kEps) break;
        for (std::size_t i2 = i1 + 1; i2 < n; ++i2) {
          for (std::size_t j2 = 1; j2 < m; ++j2) {
            if (p.levels[j1] + p.levels[j2] > p.budget + kEps) break;
            const Pin pins[2] = {{i1, j1}, {i2, j2}};
            consider(frontier_walk(p, hulls, pins));
          }
        }
      }
    }
  }
  return best;
}

Assignment allocate_bruteforce(const AllocationProblem& p) {
  p.validate();
  const std::size_t n = p.curves.size();
  const std::size_t m = p.levels.size();
  double combos = 1.0;
  for (std::size_t i = 0; i < n; ++i) combos *= static_cast<double>(m);
  if (combos > 1e7) throw ValidationError("bruteforce instance too large");

  std::vector<std::size_t> pick(n, 0);
  std::vector<std::size_t> best_pick = pick;
  double best_val = -1.0;
  bool done = n == 0;
  while (!done) {
    double cost = 0.0, val = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cost += p.levels[pick[i]];
      val += p.value_at(i, pick[i]);
    }
    if (cost <= p.budget + kEps && val > best_val + 1e-12) {
      best_val = val;
      best_pick = pick;
    }
    // Odometer in (rider id, treatment) order: first feasible optimum wins ties.
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++pick[i] < m) break;
      pick[i] = 0;
      if (i == 0) done = true;
    }
    if (n == 0) done = true;
  }
  return make_assignment(p, best_pick);
}

}  // namespace mmce
