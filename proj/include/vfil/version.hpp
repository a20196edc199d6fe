#pragma once

namespace vfil {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace vfil
