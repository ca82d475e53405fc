#pragma once

#include <stdexcept>
#include <string>

namespace cmc {

// ---------- error taxonomy ----------
// One exception type per contract failure class; all derive from cmc::Error
// so callers can catch the whole family at the CLI boundary.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RowSumError : Error { using Error::Error; };
struct NegativeEntryError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotErgodic : Error { using Error::Error; };
struct InvalidParameter : Error { using Error::Error; };
struct WindowTooLong : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct MTooSmall : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct MissingFlags : Error { using Error::Error; };
struct InvalidUpsilon : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace cmc
