#pragma once

#include <stdexcept>
#include <string>

namespace pancake {

/// Input outside an operation's domain (bad radius, point outside region, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A desk-scale cap was exceeded (oracle point count, enumeration depth).
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// An internal guarantee failed. Never caught inside the library.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace pancake
