#pragma once

#include <stdexcept>
#include <string>

namespace coneshap {

// Error taxonomy for the whole library. Everything derives from Error so the
// CLI boundary can map the family onto exit codes in one place.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A value lies outside the documented domain (player id out of range, ...).
struct DomainError : Error {
    using Error::Error;
};

// The caller broke an operation contract (e.g. marginal contribution of a
// player that is not in the coalition).
struct PreconditionError : Error {
    using Error::Error;
};

// Exact computation would blow up (2^N enumeration guards).
struct CapacityError : Error {
    using Error::Error;
};

// Malformed file or payload.
struct FormatError : Error {
    using Error::Error;
};

// A model lacks a required feature (e.g. no representation layer).
struct CapabilityError : Error {
    using Error::Error;
};

// An adapter replied with something that is not the protocol.
struct ProtocolError : Error {
    using Error::Error;
};

// Adapter process or pipe trouble (exit, timeout, broken pipe).
struct TransportError : Error {
    using Error::Error;
};

// A metric has no defined value for the given inputs (zero variance, all
// non-positive scores, ...).
struct MetricUndefinedError : Error {
    using Error::Error;
};

} // namespace coneshap
