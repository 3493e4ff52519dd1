#pragma once

namespace qthermo {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kArtifactVersion = 1;

}  // namespace qthermo
