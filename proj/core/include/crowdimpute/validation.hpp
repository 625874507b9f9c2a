#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "crowdimpute/questionnaire.hpp"

namespace crowdimpute {

struct Verdict {
  bool accepted = false;
  /// Human-readable rejection reason, echoed back to respondents.
  std::string reason;
  /// Parsed number, or the choice index for categorical answers.
  std::optional<double> value;
};

/// Checks a raw answer against its constraint. Numeric bounds are inclusive;
/// categorical answers must equal one of the choices exactly (surrounding
/// blanks ignored).
Verdict validate(std::string_view raw, const AnswerConstraint& constraint);

}  // namespace crowdimpute
