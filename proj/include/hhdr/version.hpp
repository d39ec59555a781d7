#pragma once

namespace hhdr {
inline constexpr const char* version = "0.1.0";
}
