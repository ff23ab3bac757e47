#pragma once

#include <iosfwd>
#include <vector>

#include "attract/analysis.hpp"

namespace attract {

// Diagnostic picture: manifolds in black, one tick per tube sample along its
// normal colored by inner-product sign (blue negative, red positive, gray
// within zero_tol), orbit traces in green. The view box is the analysis
// window.
void emit_svg(const AnalysisResult& result,
              const std::vector<OrbitTrace>& traces, std::ostream& out);

}  // namespace attract
