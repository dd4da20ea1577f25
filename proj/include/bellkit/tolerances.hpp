#pragma once

#include <cstddef>

namespace bellkit {

/// Shared numeric tolerances.
namespace tol {
inline constexpr double algebraic = 1e-10;
inline constexpr double optimization = 1e-6;
inline constexpr double monte_carlo_sigmas = 3.0;
inline constexpr double rank_pivot = 1e-9;
inline constexpr double coefficient = 1e-9;
}  // namespace tol

/// Largest qubit register accepted by the state factory (4^10 tensor entries).
inline constexpr int max_qubits = 10;

}  // namespace bellkit
