#pragma once

namespace keyloco {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace keyloco
