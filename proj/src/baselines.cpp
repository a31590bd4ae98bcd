#include "defpred/baselines.hpp"

#include <cmath>

#include "defpred/errors.hpp"

namespace defpred::baselines {

BaselineModel linear_loc_model() { return {BaselineId::linear_loc, 4.86, 0.018, 1.0}; }

BaselineModel power_loc_model() {
    return {BaselineId::power_loc, 4.2, 0.0015, 4.0 / 3.0};
}

std::string baseline_name(BaselineId id) {
    return id == BaselineId::linear_loc ? "linear_loc" : "power_loc";
}

double baseline_predict(const BaselineModel& b, double loc) {
    if (!std::isfinite(loc)) throw DataError("baseline size input must be finite");
    if (loc < 0.0) throw DataError("baseline size input must be non-negative");
    if (b.id == BaselineId::linear_loc) {
        // Plain multiply (no pow) so published spot values stay exact in
        // double arithmetic.
        return b.a + b.b * loc;
    }
    return b.a + b.b * std::pow(loc, b.e);
}

} // namespace defpred::baselines
