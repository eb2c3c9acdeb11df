#pragma once

#include <stdexcept>
#include <string>

namespace pet {

// Error identities used across the toolkit. Tests match on these rather
// than on message text.
enum class Errc {
    missing_file,
    bad_magic,
    dimension_mismatch,
    odd_dimensions,
    range_error,
    io_failure,
    parse_error,
    unresolved_frame_path,
    duplicate_participant,
    non_positive_sigma,
    non_positive_gamma,
    non_positive_delta,
    empty_input,
    unpaired_participants,
    image_too_small,
    too_few_matches,
    degenerate_sample,
    degenerate_axis,
    grid_too_fine,
    too_few_samples,
    singular_system,
    invalid_argument,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::missing_file: return "MissingFile";
        case Errc::bad_magic: return "BadMagic";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::odd_dimensions: return "OddDimensions";
        case Errc::range_error: return "RangeError";
        case Errc::io_failure: return "IoFailure";
        case Errc::parse_error: return "ParseError";
        case Errc::unresolved_frame_path: return "UnresolvedFramePath";
        case Errc::duplicate_participant: return "DuplicateParticipant";
        case Errc::non_positive_sigma: return "NonPositiveSigma";
        case Errc::non_positive_gamma: return "NonPositiveGamma";
        case Errc::non_positive_delta: return "NonPositiveDelta";
        case Errc::empty_input: return "EmptyInput";
        case Errc::unpaired_participants: return "UnpairedParticipants";
        case Errc::image_too_small: return "ImageTooSmall";
        case Errc::too_few_matches: return "TooFewMatches";
        case Errc::degenerate_sample: return "DegenerateSample";
        case Errc::degenerate_axis: return "DegenerateAxis";
        case Errc::grid_too_fine: return "GridTooFine";
        case Errc::too_few_samples: return "TooFewSamples";
        case Errc::singular_system: return "SingularSystem";
        case Errc::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, Errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace pet
