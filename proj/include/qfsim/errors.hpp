#pragma once

#include <stdexcept>
#include <string>

namespace qfsim {

// Base class for all domain errors thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A four-momentum declared for an external particle violates e^2 - p^2 = m^2.
class OnShellViolation : public Error {
public:
    using Error::Error;
};

// Spin/helicity label outside the domain admitted by the particle type.
class SpinDomainError : public Error {
public:
    using Error::Error;
};

// Structural mismatch between q-object paths or channel out states.
class StructureError : public Error {
public:
    using Error::Error;
};

// All path amplitudes vanish; no probabilistic statement is possible.
class DegenerateObjectError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

// Kinematically inadmissible input (non-positive energy, spacelike mass, ...).
class KinematicsError : public Error {
public:
    using Error::Error;
};

// No vertex rule matches the requested combine.
class VertexError : public Error {
public:
    using Error::Error;
};

// No ia-channel can be typed for the in-pair: the process is forbidden
// at this order.
class EmptyChannelSetError : public Error {
public:
    using Error::Error;
};

class PropagatorPoleError : public Error {
public:
    using Error::Error;
};

// No path of the q-object covers the requested cell.
class CoverageError : public Error {
public:
    using Error::Error;
};

// Bad scenario file or command-line configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace qfsim
