#pragma once

#include <stdexcept>
#include <string>

namespace gridlight {

enum class Errc {
    // gridfile
    BadMagic,
    TruncatedHeader,
    UnsupportedFeature,
    NoCoordinateVariable,
    NonMonotonicAxis,
    OutOfBounds,
    UnknownVariable,
    IoFailure,
    InvalidSchema,
    // catalog
    EmptyFileList,
    SchemaInferenceFailure,
    UnknownSpanningDim,
    SchemaMismatch,
    ParseFailure,
    ArityMismatch,
    UnparsableUnits,
    // query ir
    SyntaxError,
    UnknownDataset,
    UnknownColumn,
    TypeMismatch,
    // rewrite / cover
    PredicateTooComplex,
    DimensionMismatch,
    CoverTooLarge,
    SplitImpossible,
    InvalidParams,
    OutOfDomain,
    // engine
    DomainError,
    EnvelopeMissing,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace gridlight
