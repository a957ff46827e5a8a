#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coldpref/experiment.hpp"

namespace coldpref {

// Fixed policy colours: random green, warm-start blue, cold-start orange; the
// practical limit is drawn in red.
std::string policy_color(PolicyKind policy);
inline constexpr const char* kLimitColor = "red";

// Mean F1 against queries, one <polyline> per policy, a +-1 std band when a
// policy has more than one run, and an optional horizontal <line> for the limit.
// Output depends only on the inputs.
std::string render_learning_curves_svg(const std::vector<AggregateRow>& rows, std::optional<double> limit_f1,
                                       const std::string& title);

}  // namespace coldpref
