#pragma once

namespace repure {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace repure
