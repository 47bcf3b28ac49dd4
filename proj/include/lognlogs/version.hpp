#pragma once

namespace lognlogs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lognlogs
