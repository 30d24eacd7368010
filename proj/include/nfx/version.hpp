#pragma once

namespace nfx {
inline constexpr const char* kVersion = "0.1.0";
}
