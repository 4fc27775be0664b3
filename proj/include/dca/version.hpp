#pragma once

namespace dca {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dca
