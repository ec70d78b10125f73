#pragma once

namespace oac {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace oac
