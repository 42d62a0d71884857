#pragma once

namespace clvboost {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace clvboost
