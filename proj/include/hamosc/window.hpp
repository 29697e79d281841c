#pragma once

#include "hamosc/errors.hpp"

namespace hamosc {

/// A closed interval [a, b] inside the system's domain.
struct Window {
    double a = 0.0;
    double b = 0.0;

    Window() = default;
    Window(double a_, double b_) : a(a_), b(b_) {
        if (!(a < b)) throw PreconditionFailed("window requires a < b");
    }
    double length() const { return b - a; }
};

}  // namespace hamosc
