#pragma once

#include <limits>
#include <memory>
#include <string>

namespace puprior {

struct LikelihoodCurve;  // defined in alphamax.hpp

enum class Method { AlphaMax, AlphaMaxN, MSGMM };

std::string method_name(Method method);

// Estimated proportion quadruple. alpha_plus/beta_plus are the one-sided
// maximum proportions; alpha_star/beta_star the corrected, identifiable pair.
// The curve handles hold the likelihood diagnostics when the estimate came
// from an elbow search (null otherwise).
struct PriorEstimate {
  double alpha_plus = std::numeric_limits<double>::quiet_NaN();
  double beta_plus = std::numeric_limits<double>::quiet_NaN();
  double alpha_star = std::numeric_limits<double>::quiet_NaN();
  double beta_star = std::numeric_limits<double>::quiet_NaN();
  Method method = Method::AlphaMaxN;
  std::shared_ptr<const LikelihoodCurve> curve_alpha;
  std::shared_ptr<const LikelihoodCurve> curve_beta;
};

}  // namespace puprior
