#pragma once

namespace callosim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace callosim
