#include "crowdimpute/validation.hpp"

#include "crowdimpute/text.hpp"

namespace crowdimpute {

Verdict validate(std::string_view raw, const AnswerConstraint& constraint) {
  Verdict v;
  const auto text = trim(raw);
  if (constraint.kind == ConstraintKind::numeric_range) {
    double x = 0.0;
    if (!parse_number(text, x)) {
      v.reason = "not a number";
      return v;
    }
    if (x < constraint.lo || x > constraint.hi) {
      v.reason = "out of range " + format_number(constraint.lo) + "–" + format_number(constraint.hi);
      return v;
    }
    v.accepted = true;
    v.value = x;
    return v;
  }
  for (std::size_t i = 0; i < constraint.choices.size(); ++i) {
    if (constraint.choices[i] == text) {
      v.accepted = true;
      v.value = static_cast<double>(i);
      return v;
    }
  }
  v.reason = "not one of " + join(constraint.choices, ", ");
  return v;
}

}  // namespace crowdimpute
