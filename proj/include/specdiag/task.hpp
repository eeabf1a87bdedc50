#pragma once

#include <memory>
#include <utility>

#include "specdiag/model.hpp"
#include "specdiag/sat.hpp"

namespace specdiag {

// (C_R, C_KB): ordered requirements plus background knowledge.
//
// Construction verifies that the id sets are disjoint and that the
// background is satisfiable on its own.
class DiagnosisTask {
 public:
  DiagnosisTask(ConstraintSet requirements, ConstraintSet background,
                std::shared_ptr<const VariableTable> variables = nullptr,
                const SolveOptions& options = {})
      : requirements_(std::move(requirements)),
        background_(std::move(background)),
        variables_(std::move(variables)) {
    for (const auto& c : requirements_)
      if (background_.contains(c->id()))
        throw ContractViolation("constraint '" + c->id() + "' is both requirement and background");
    if (!check_union({std::cref(background_)}, options).consistent)
      throw InconsistentBackground("background knowledge base is inconsistent");
  }

  const ConstraintSet& requirements() const { return requirements_; }
  const ConstraintSet& background() const { return background_; }
  const std::shared_ptr<const VariableTable>& variables() const { return variables_; }

 private:
  ConstraintSet requirements_;
  ConstraintSet background_;
  std::shared_ptr<const VariableTable> variables_;
};

}  // namespace specdiag
