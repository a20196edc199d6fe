#pragma once

#include <stdexcept>
#include <string>

namespace vfil {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define VFIL_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                  \
    public:                                                      \
        explicit Name(const std::string& what) : Error(what) {}  \
    }

VFIL_DEFINE_ERROR(NonSimpleConfiguration);
VFIL_DEFINE_ERROR(PointOutsideDomain);
VFIL_DEFINE_ERROR(SingularPoint);
VFIL_DEFINE_ERROR(NonConvergence);
VFIL_DEFINE_ERROR(InvalidParameters);
VFIL_DEFINE_ERROR(CollisionImminent);
VFIL_DEFINE_ERROR(FilamentTooCloseToBoundary);
VFIL_DEFINE_ERROR(FormatError);
VFIL_DEFINE_ERROR(VersionMismatch);
VFIL_DEFINE_ERROR(RadiusTooLarge);
VFIL_DEFINE_ERROR(SolverFailure);
VFIL_DEFINE_ERROR(TimeGridMismatch);

#undef VFIL_DEFINE_ERROR

}  // namespace vfil
