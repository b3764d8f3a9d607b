#pragma once

namespace adiapump {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace adiapump
