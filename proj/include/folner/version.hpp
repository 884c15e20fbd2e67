#pragma once

namespace folner {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace folner
