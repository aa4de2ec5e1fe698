#pragma once

namespace funflir {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace funflir
