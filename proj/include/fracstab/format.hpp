#pragma once

#include <string>

namespace fracstab {

/// Shortest-round-trip is not what we want for CSV diffs; this always prints
/// 17 significant digits (scientific form chosen by to_chars general format).
std::string format_double(double v);

}  // namespace fracstab
