// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace pricing {

// Base of every error thrown by the library.
class PricingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public PricingError {
public:
    using PricingError::PricingError;
};

// Elasticity term beta^T y is non-negative, so the revenue curve has no interior maximum.
class DegenerateElasticity : public PricingError {
public:
    using PricingError::PricingError;
};

class UnsupportedDimension : public PricingError {
public:
    using PricingError::PricingError;
};

class InfeasibleBias : public PricingError {
public:
    using PricingError::PricingError;
};

class NumericError : public PricingError {
public:
    using PricingError::PricingError;
};

class ConfigError : public PricingError {
public:
    using PricingError::PricingError;
};

// choose_price/observe called out of order.
class ContractViolation : public PricingError {
public:
    using PricingError::PricingError;
};

}  // namespace pricing
