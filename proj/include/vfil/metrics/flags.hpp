#pragma once

namespace vfil::metrics {

// Bits of the `flags` column in diagnostics.csv.
enum Flag : unsigned {
    kFlagFallback = 1u << 0,        // some slice used the grid LP instead of matching
    kFlagCountMismatch = 1u << 1,   // some slice did not show exactly n unit charges
    kFlagChargeChanged = 1u << 2,   // total detected charge differs from the initial one
    kFlagNegativeI3 = 1u << 3,      // I3 below -tolerance
    kFlagNoFStar = 1u << 4,         // f* unavailable, Gronwall columns are NaN
    kFlagModulusAlarm = 1u << 5,    // the GP solver saw max|u| > 2
    kFlagCollision = 1u << 6,       // the KMD run stopped on a near collision
    kFlagTSkipped = 1u << 7,        // cutoff radius too large for T
};

}  // namespace vfil::metrics
