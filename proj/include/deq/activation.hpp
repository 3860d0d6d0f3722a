#pragma once

#include <cmath>
#include <string>

#include "deq/types.hpp"

namespace deq {

enum class ActivationKind { Linear, Sigmoid, Tanh, Softplus };

/// Scalar activation with certified Lipschitz bound. The set is a closed
/// enumeration: every member needs a certified bound for the contraction
/// check, so user plugins are not supported.
class Activation {
  public:
    explicit Activation(ActivationKind kind) : kind_(kind) {}

    static Activation linear() { return Activation(ActivationKind::Linear); }
    static Activation sigmoid() { return Activation(ActivationKind::Sigmoid); }
    static Activation tanh() { return Activation(ActivationKind::Tanh); }
    static Activation softplus() { return Activation(ActivationKind::Softplus); }

    ActivationKind kind() const { return kind_; }

    double value(double z) const {
        switch (kind_) {
            case ActivationKind::Linear:
                return z;
            case ActivationKind::Sigmoid:
                return stable_sigmoid(z);
            case ActivationKind::Tanh:
                return std::tanh(z);
            case ActivationKind::Softplus:
                // branch form: log1p(exp(z)) overflows for large z
                return z > 0.0 ? z + std::log1p(std::exp(-z))
                               : std::log1p(std::exp(z));
        }
        return 0.0;
    }

    double derivative(double z) const {
        switch (kind_) {
            case ActivationKind::Linear:
                return 1.0;
            case ActivationKind::Sigmoid: {
                const double s = stable_sigmoid(z);
                return s * (1.0 - s);
            }
            case ActivationKind::Tanh: {
                const double t = std::tanh(z);
                return 1.0 - t * t;
            }
            case ActivationKind::Softplus:
                return stable_sigmoid(z);
        }
        return 0.0;
    }

    /// Supremum of the derivative; the contraction modulus is
    /// lipschitz_bound() * |theta2|.
    double lipschitz_bound() const {
        switch (kind_) {
            case ActivationKind::Linear:
                return 1.0;
            case ActivationKind::Sigmoid:
                return 0.25;
            case ActivationKind::Tanh:
                return 1.0;
            case ActivationKind::Softplus:
                return 1.0;
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind_) {
            case ActivationKind::Linear:
                return "linear";
            case ActivationKind::Sigmoid:
                return "sigmoid";
            case ActivationKind::Tanh:
                return "tanh";
            case ActivationKind::Softplus:
                return "softplus";
        }
        return "?";
    }

    static Activation parse(const std::string& name) {
        if (name == "linear") return linear();
        if (name == "sigmoid") return sigmoid();
        if (name == "tanh") return tanh();
        if (name == "softplus") return softplus();
        throw InputError("unknown activation: " + name);
    }

  private:
    static double stable_sigmoid(double z) {
        if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
        const double e = std::exp(z);
        return e / (1.0 + e);
    }

    ActivationKind kind_;
};

}  // namespace deq
