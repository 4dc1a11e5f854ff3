#pragma once

namespace diskq {
inline constexpr const char* kVersion = "0.1.0";
}
