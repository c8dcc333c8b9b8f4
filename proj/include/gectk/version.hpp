#pragma once

namespace gectk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gectk
