#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <vector>

namespace omit {

/// Real roots of the monic cubic x^3 + c2 x^2 + c1 x + c0, ascending.
///
/// Closed form (trigonometric branch for three real roots, Cardano otherwise),
/// each root then refined by `polish_steps` Newton iterations on the original
/// polynomial. Roots that collapse onto each other after polishing are merged.
template <std::floating_point T>
std::vector<T> real_cubic_roots(T c2, T c1, T c0, int polish_steps = 3) {
    const T shift = c2 / T(3);
    // depressed cubic t^3 + p t + q with x = t - shift
    const T p = c1 - c2 * c2 / T(3);
    const T q = T(2) * c2 * c2 * c2 / T(27) - c2 * c1 / T(3) + c0;

    std::vector<T> roots;
    const T disc = q * q / T(4) + p * p * p / T(27);
    if (p < T(0) && disc <= T(0)) {
        const T r = T(2) * std::sqrt(-p / T(3));
        T arg = T(3) * q / (p * r);
        arg = std::clamp(arg, T(-1), T(1));
        const T phi = std::acos(arg) / T(3);
        for (int k = 0; k < 3; ++k)
            roots.push_back(r * std::cos(phi - T(2) * std::numbers::pi_v<T> * T(k) / T(3)) - shift);
    } else {
        // one real root; pick the non-cancelling cube root
        const T s = std::sqrt(std::max(disc, T(0)));
        const T a = -std::copysign(std::cbrt(std::abs(q) / T(2) + s), q);
        const T t = a == T(0) ? T(0) : a - p / (T(3) * a);
        roots.push_back(t - shift);
    }

    auto poly = [&](T x) { return ((x + c2) * x + c1) * x + c0; };
    auto dpoly = [&](T x) { return (T(3) * x + T(2) * c2) * x + c1; };
    for (T& x : roots) {
        for (int i = 0; i < polish_steps; ++i) {
            const T d = dpoly(x);
            if (d == T(0)) break;
            const T next = x - poly(x) / d;
            if (!std::isfinite(next)) break;
            // Newton only helps if it does not increase the residual
            if (std::abs(poly(next)) > std::abs(poly(x))) break;
            x = next;
        }
    }

    std::sort(roots.begin(), roots.end());
    std::vector<T> out;
    for (T x : roots) {
        const T scale = std::max({T(1), std::abs(x)});
        if (!out.empty() && std::abs(x - out.back()) <= T(64) * std::numeric_limits<T>::epsilon() * scale)
            continue;
        out.push_back(x);
    }
    return out;
}

} // namespace omit
