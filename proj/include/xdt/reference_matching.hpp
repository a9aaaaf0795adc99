#pragma once

#include "xdt/matching.hpp"

namespace xdt::reference {

/// Straightforward restatement of the collaborative matching procedure, kept
/// deliberately separate from matching.cpp so the two can be cross-checked.
/// Shares only the box projection and IoU primitives.
matching::MatchOutcome naive_collaborate(const std::vector<Box3>& boxes3,
                                         const std::vector<std::vector<Box2>>& boxes2,
                                         const ViewSet& views, double threshold = 0.0);

/// Field-by-field exact comparison; on mismatch writes a reason.
bool same_outcome(const matching::MatchOutcome& a, const matching::MatchOutcome& b,
                  std::string* why = nullptr);

}  // namespace xdt::reference
