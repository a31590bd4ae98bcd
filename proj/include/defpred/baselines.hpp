#ifndef DEFPRED_BASELINES_HPP
#define DEFPRED_BASELINES_HPP

#include <string>

namespace defpred::baselines {

// The two historical size-based defect predictors, with their published
// constants. The LOC unit in the original equations is ambiguous (raw lines
// vs thousands); baseline_predict takes the caller's value verbatim and
// callers must convert explicitly.
enum class BaselineId { linear_loc, power_loc };

struct BaselineModel {
    BaselineId id;
    double a = 0; // additive constant
    double b = 0; // size multiplier
    double e = 1; // exponent on size (1 for the linear model)
};

// linear_loc: defects = 4.86 + 0.018 * loc
BaselineModel linear_loc_model();

// power_loc: defects = 4.2 + 0.0015 * loc^(4/3)
BaselineModel power_loc_model();

std::string baseline_name(BaselineId id);

// Evaluate a baseline at a size. The linear model avoids pow() so that
// published spot values (e.g. 22.86 at loc = 1000) come out exact in double
// arithmetic. Throws DataError on negative or non-finite loc.
double baseline_predict(const BaselineModel& b, double loc);

} // namespace defpred::baselines

#endif // DEFPRED_BASELINES_HPP
