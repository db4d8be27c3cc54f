#include "dsnfp/error.hpp"

namespace dsnfp {

const char* errc_name(errc c) noexcept {
    switch (c) {
        case errc::malformed_header: return "MalformedHeader";
        case errc::truncated_data: return "TruncatedData";
        case errc::unsupported_maxval: return "UnsupportedMaxval";
        case errc::bad_magic: return "BadMagic";
        case errc::version_mismatch: return "VersionMismatch";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::empty_set: return "EmptySet";
        case errc::degenerate_input: return "DegenerateInput";
        case errc::insufficient_data: return "InsufficientData";
        case errc::monotone_decreasing: return "MonotoneDecreasing";
        case errc::all_non_positive: return "AllNonPositive";
        case errc::invalid_param: return "InvalidParam";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

} // namespace dsnfp
