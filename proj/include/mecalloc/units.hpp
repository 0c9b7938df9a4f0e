#pragma once

// Canonical units: bits, bits/second, Hz, cycles/second.
namespace mecalloc::units {

inline constexpr double kMb = 1e6;      // bits
inline constexpr double kMbps = 1e6;    // bits/second
inline constexpr double kGB = 8e9;      // bits
inline constexpr double kGHz = 1e9;     // cycles/second

}  // namespace mecalloc::units
