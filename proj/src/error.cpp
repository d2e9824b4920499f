#include "gridlight/error.hpp"

namespace gridlight {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::BadMagic: return "BadMagic";
        case Errc::TruncatedHeader: return "TruncatedHeader";
        case Errc::UnsupportedFeature: return "UnsupportedFeature";
        case Errc::NoCoordinateVariable: return "NoCoordinateVariable";
        case Errc::NonMonotonicAxis: return "NonMonotonicAxis";
        case Errc::OutOfBounds: return "OutOfBounds";
        case Errc::UnknownVariable: return "UnknownVariable";
        case Errc::IoFailure: return "IoFailure";
        case Errc::InvalidSchema: return "InvalidSchema";
        case Errc::EmptyFileList: return "EmptyFileList";
        case Errc::SchemaInferenceFailure: return "SchemaInferenceFailure";
        case Errc::UnknownSpanningDim: return "UnknownSpanningDim";
        case Errc::SchemaMismatch: return "SchemaMismatch";
        case Errc::ParseFailure: return "ParseFailure";
        case Errc::ArityMismatch: return "ArityMismatch";
        case Errc::UnparsableUnits: return "UnparsableUnits";
        case Errc::SyntaxError: return "SyntaxError";
        case Errc::UnknownDataset: return "UnknownDataset";
        case Errc::UnknownColumn: return "UnknownColumn";
        case Errc::TypeMismatch: return "TypeMismatch";
        case Errc::PredicateTooComplex: return "PredicateTooComplex";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::CoverTooLarge: return "CoverTooLarge";
        case Errc::SplitImpossible: return "SplitImpossible";
        case Errc::InvalidParams: return "InvalidParams";
        case Errc::OutOfDomain: return "OutOfDomain";
        case Errc::DomainError: return "DomainError";
        case Errc::EnvelopeMissing: return "EnvelopeMissing";
    }
    return "UnknownError";
}

} // namespace gridlight
