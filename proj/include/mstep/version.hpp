#pragma once

namespace mstep {
inline constexpr const char* kVersion = "0.1.0";
}
