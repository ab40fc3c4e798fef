#include "qreflect/units.hpp"

#include "qreflect/errors.hpp"

#include <cmath>
#include <string>

namespace qreflect::units {

namespace {
constexpr double kCubicAngstromPerCubicMetre = 1.0e30;
}

double mev_to_joule(double energy_mev) { return energy_mev * kConstants.joule_per_mev; }

double joule_to_mev(double energy_joule) { return energy_joule / kConstants.joule_per_mev; }

double c3_to_internal(double c3_si) {
    if (!(c3_si > 0.0) || !std::isfinite(c3_si)) {
        throw DomainError("c3_to_internal: C3 must be positive and finite, got " +
                          std::to_string(c3_si));
    }
    return c3_si * kCubicAngstromPerCubicMetre / kConstants.joule_per_mev;
}

} // namespace qreflect::units
