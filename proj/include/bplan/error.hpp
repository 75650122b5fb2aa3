#pragma once

#include <stdexcept>
#include <string>

namespace bplan {

/// Base class for all domain errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class OutOfBoundsError : public Error {
public:
    explicit OutOfBoundsError(const std::string& what) : Error(what) {}
};

class ResolutionTooFineError : public Error {
public:
    explicit ResolutionTooFineError(const std::string& what) : Error(what) {}
};

class GenerationExhaustedError : public Error {
public:
    explicit GenerationExhaustedError(const std::string& what) : Error(what) {}
};

class StartInCollisionError : public Error {
public:
    explicit StartInCollisionError(const std::string& what) : Error(what) {}
};

class TooFewWaypointsError : public Error {
public:
    explicit TooFewWaypointsError(const std::string& what) : Error(what) {}
};

class ShapeMismatchError : public Error {
public:
    explicit ShapeMismatchError(const std::string& what) : Error(what) {}
};

class OddDimensionError : public Error {
public:
    explicit OddDimensionError(const std::string& what) : Error(what) {}
};

class CorruptFileError : public Error {
public:
    explicit CorruptFileError(const std::string& what) : Error(what) {}
};

class EmptyInputError : public Error {
public:
    explicit EmptyInputError(const std::string& what) : Error(what) {}
};

}  // namespace bplan
