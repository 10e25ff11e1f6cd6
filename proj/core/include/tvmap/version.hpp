#pragma once

namespace tvmap {
inline constexpr const char* version = "0.1.0";
}
