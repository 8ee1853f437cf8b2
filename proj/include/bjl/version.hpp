#pragma once

namespace bjl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bjl
