#pragma once

// Stage-two budget allocation: pick one treatment level per rider to maximize
// predicted incremental orders under a total-cost budget.

#include <cstdint>
#include <vector>

#include "mmce/model.hpp"

namespace mmce {

struct AllocationProblem {
  std::vector<ResponseCurve> curves;
  double budget = 0.0;
  std::vector<double> levels;  // candidate grid, always containing 0

  void validate() const;
  // Incremental value of curve i at candidate level index j.
  double value_at(std::size_t i, std::size_t j) const;
};

struct Assignment {
  struct Choice {
    std::int64_t id = 0;
    double t = 0.0;
    double cost = 0.0;
    double predicted_incremental = 0.0;
  };
  std::vector<Choice> choices;
  double total_cost = 0.0;
  double total_incremental = 0.0;
};

// Greedy over concavified per-rider (cost, incremental) frontiers, highest
// marginal incremental-per-cost first; ties broken by (rider id, treatment).
Assignment allocate_greedy(const AllocationProblem& p);

// Exact optimum by exhaustive enumeration; guarded to levels^riders <= 1e7.
Assignment allocate_bruteforce(const AllocationProblem& p);

double roi(const ResponseCurve& curve, double t);

}  // namespace mmce
