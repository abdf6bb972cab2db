#pragma once

namespace ecbf::tol {

// Relative singular-value threshold for "full row rank".
inline constexpr double kRank = 1e-10;

// Gates used when accepting an explicit active-set candidate.
inline constexpr double kExplicitDual = 1e-10;
inline constexpr double kExplicitPrimal = 1e-10;

// Gates used by the brute-force oracle.
inline constexpr double kOracleDual = 1e-12;
inline constexpr double kOraclePrimal = 1e-10;
inline constexpr double kOracleObjectiveTie = 1e-12;

// Adaptive coefficients above this are flagged as near-degenerate.
inline constexpr double kAdaptiveCap = 1e6;

}  // namespace ecbf::tol
