#pragma once

namespace wkam {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wkam
