// errors.hpp — Exception taxonomy shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace oqsid {

// Input fails a documented precondition (bad dimensions, invalid density matrix, ...)
struct validation_error : std::invalid_argument {
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Problem size exceeds a documented hard cap
struct capacity_error : std::invalid_argument {
    explicit capacity_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Internal self-check failed (imaginary residue, Faddeev–LeVerrier check, trace drift, ...)
struct consistency_error : std::runtime_error {
    explicit consistency_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Discrete-to-continuous conversion hit the log branch cut (aliasing); reduce dt
struct branch_cut_error : std::runtime_error {
    explicit branch_cut_error(const std::string& msg) : std::runtime_error(msg) {}
};

// All-zero (or numerically zero) signal handed to the realization step
struct degenerate_signal_error : std::runtime_error {
    explicit degenerate_signal_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model transfer function and target disagree in degree (wrong realization order)
struct order_mismatch_error : std::runtime_error {
    explicit order_mismatch_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace oqsid
