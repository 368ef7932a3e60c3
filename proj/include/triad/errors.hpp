#pragma once

#include <stdexcept>
#include <string>

namespace triad {

// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class ZeroRowNorm : public Error {
public:
    using Error::Error;
};

class NonFiniteInput : public Error {
public:
    using Error::Error;
};

class NonFiniteGradient : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

class GraphNotRecorded : public Error {
public:
    using Error::Error;
};

class StepOutOfRange : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class OnsetOutOfBounds : public Error {
public:
    using Error::Error;
};

class NonIntegerFactor : public Error {
public:
    using Error::Error;
};

class SingularCovariance : public Error {
public:
    using Error::Error;
};

class IndivisibleTrialCount : public Error {
public:
    using Error::Error;
};

class KExceedsClasses : public Error {
public:
    using Error::Error;
};

class MissingModality : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class MalformedCsv : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class UnknownModalityAttribution : public Error {
public:
    using Error::Error;
};

} // namespace triad
