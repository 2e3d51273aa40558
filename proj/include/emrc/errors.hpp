#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emrc {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Topology file could not be parsed. Carries the 1-based line number
// (0 for document-level problems, e.g. a bad JSON body).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error(line == 0 ? reason : "line " + std::to_string(line) + ": " + reason),
          line_(line),
          reason_(reason) {}

    std::size_t line() const { return line_; }
    const std::string& reason() const { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

// A directed link (u,v) has no reverse (v,u) and auto-mirroring is off.
class AsymmetricLink : public Error {
public:
    using Error::Error;
};

class UnknownNode : public Error {
public:
    using Error::Error;
};

class NotBiconnected : public Error {
public:
    using Error::Error;
};

// The requested number of backup configurations is too small to isolate
// every node and link. Carries a description of the first component that
// could not be placed.
class InsufficientConfigurations : public Error {
public:
    InsufficientConfigurations(int n, const std::string& component)
        : Error("cannot isolate " + component + " in any of " + std::to_string(n) +
                " backup configuration(s)"),
          n_(n),
          component_(component) {}

    int n() const { return n_; }
    const std::string& component() const { return component_; }

private:
    int n_;
    std::string component_;
};

class DisconnectedBackbone : public Error {
public:
    using Error::Error;
};

// No backup configuration isolates the failed component.
class NoBackupConfig : public Error {
public:
    using Error::Error;
};

class NoRoute : public Error {
public:
    using Error::Error;
};

// A destination is unreachable under a configuration that should be valid.
class UnreachableError : public Error {
public:
    using Error::Error;
};

class ZeroWeightOriginal : public Error {
public:
    using Error::Error;
};

class ScenarioError : public Error {
public:
    using Error::Error;
};

class UnknownComponent : public Error {
public:
    using Error::Error;
};

}  // namespace emrc
