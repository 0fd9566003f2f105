#pragma once

namespace advfold {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace advfold
