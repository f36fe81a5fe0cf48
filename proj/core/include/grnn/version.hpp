#pragma once

namespace grnn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace grnn
