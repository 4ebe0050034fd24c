#pragma once

#include <stdexcept>
#include <string>

namespace sphsmooth {

// Bad input from the caller: out-of-range arguments, malformed files,
// duplicate design points. The CLI maps these to exit code 1.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical breakdown on otherwise valid input. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public InputError {
public:
    using InputError::InputError;
};

class DuplicatePoints : public InputError {
public:
    using InputError::InputError;
};

class EmptyInput : public InputError {
public:
    using InputError::InputError;
};

class ArchiveError : public InputError {
public:
    using InputError::InputError;
};

class RankDeficient : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonIntegrable : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace sphsmooth
