#pragma once

#include <cstdint>

namespace samem {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Binary episode-trace format (see trace.hpp for the layout).
inline constexpr std::uint32_t kTraceFormatVersion = 1;

// JSONL dataset / episode-record schemas.
inline constexpr std::uint32_t kDatasetFormatVersion = 1;

}  // namespace samem
