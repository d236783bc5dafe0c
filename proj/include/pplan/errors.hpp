#pragma once

#include <stdexcept>
#include <string>

namespace pplan {

/// Base class for every error raised by the planner pipeline.
class PlannerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Free-space sampling made no progress (workspace effectively blocked).
class InfeasibleSpace : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

/// No roadmap node lies in the goal region and the goal center is blocked.
class NoGoalSample : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

/// Search exhausted without a goal plan that respects the heuristic bound.
class NoFeasiblePlan : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

/// Riccati solve did not reach tolerance or the weights are not detectable.
class NonConvergence : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

class ParseError : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

class ValidationError : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

}  // namespace pplan
