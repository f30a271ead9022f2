#pragma once

#include <string_view>

namespace petroscope {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kGeneratedBy = "petroscope 0.1.0";

}  // namespace petroscope
