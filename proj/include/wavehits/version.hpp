#pragma once

namespace wavehits {
inline constexpr const char* kVersion = "0.1.0";
}
