#pragma once

namespace parashoot {

inline constexpr const char* kToolName = "parashoot";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace parashoot
