#pragma once

namespace krs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace krs
