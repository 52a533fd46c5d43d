#pragma once

namespace graphsmooth {

inline constexpr const char* kVersion = "graphsmooth 0.1.0";

}
