#pragma once

#include <stdexcept>
#include <string>

namespace scprop {

// Every numerical guard carries its own name so the CLI can report it.
class Error : public std::runtime_error {
public:
    Error(std::string guard, const std::string& what)
        : std::runtime_error(guard + ": " + what), guard_(std::move(guard)) {}
    const std::string& guard() const noexcept { return guard_; }

private:
    std::string guard_;
};

#define SCPROP_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name, what) {}   \
    }

SCPROP_DEFINE_ERROR(ConjugacyViolation);
SCPROP_DEFINE_ERROR(CausticSingular);
SCPROP_DEFINE_ERROR(DegenerateOrbit);
SCPROP_DEFINE_ERROR(TruncationTooSmall);
SCPROP_DEFINE_ERROR(SamplingTooCoarse);
SCPROP_DEFINE_ERROR(PhaseJumpTooLarge);
SCPROP_DEFINE_ERROR(EmptyWindow);
SCPROP_DEFINE_ERROR(GridMismatch);
SCPROP_DEFINE_ERROR(MissingFile);
SCPROP_DEFINE_ERROR(ParseError);
SCPROP_DEFINE_ERROR(InvalidArgument);

#undef SCPROP_DEFINE_ERROR

}  // namespace scprop
