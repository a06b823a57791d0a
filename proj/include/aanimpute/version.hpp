#pragma once

namespace aanimpute {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace aanimpute
