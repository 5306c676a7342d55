#pragma once

namespace factorscope {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace factorscope
