#pragma once

#include <stdexcept>
#include <string>

namespace grnn {

// Domain error carrying a stable name; the CLI maps any Error to exit code 1
// and prints the name, so tests can match on it.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& msg)
        : std::runtime_error(name + ": " + msg), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define GRNN_DEFINE_ERROR(NAME)                                        \
    class NAME : public Error {                                        \
    public:                                                            \
        explicit NAME(const std::string& msg) : Error(#NAME, msg) {}   \
    };

GRNN_DEFINE_ERROR(UnknownGene)
GRNN_DEFINE_ERROR(UnknownAxis)
GRNN_DEFINE_ERROR(MissingCell)
GRNN_DEFINE_ERROR(DivisionByZeroBase)
GRNN_DEFINE_ERROR(SchemaError)
GRNN_DEFINE_ERROR(ValueError)
GRNN_DEFINE_ERROR(DuplicateGene)
GRNN_DEFINE_ERROR(DuplicateEdge)
GRNN_DEFINE_ERROR(EmptySample)
GRNN_DEFINE_ERROR(DegenerateSeries)
GRNN_DEFINE_ERROR(TooFewSamples)
GRNN_DEFINE_ERROR(Overflow)
GRNN_DEFINE_ERROR(EmptySet)
GRNN_DEFINE_ERROR(LengthMismatch)
GRNN_DEFINE_ERROR(DegenerateProfile)
GRNN_DEFINE_ERROR(EmptyCandidates)
GRNN_DEFINE_ERROR(ZeroVariance)
GRNN_DEFINE_ERROR(SingletonNetwork)
GRNN_DEFINE_ERROR(NonPositiveAlpha)
GRNN_DEFINE_ERROR(AlphaNonPositiveOnGrid)
GRNN_DEFINE_ERROR(NoPositiveRoot)
GRNN_DEFINE_ERROR(DegenerateA)
GRNN_DEFINE_ERROR(SpecError)
GRNN_DEFINE_ERROR(IoError)
GRNN_DEFINE_ERROR(ConfigError)

#undef GRNN_DEFINE_ERROR

}  // namespace grnn
