#pragma once

// Generated by tests/oracles/generate.py (mpmath, 40 digits). Do not edit.
// Profile W(r) = (1+r)^-2 beyond R = 1, bounds beta0 = 1, beta1 = 2.

namespace oracle {

inline constexpr double nonrel_E = 10.0;
inline constexpr double nonrel_beta = 4.6904157598234296;
inline constexpr double nonrel_beta_prime = 1.1055415967851333;
inline constexpr double nonrel_rmin_q5 = 1.1305564023946906;
inline constexpr double nonrel_rmin_beta = 1.0613721228097788;
inline constexpr double nonrel_g_q5 = 0.62340815400993226;
inline constexpr double nonrel_g_q10 = 0.31293904005947155;
inline constexpr double nonrel_g_beta = 0.66428857302659321;

inline constexpr double rel_c = 10.0;
inline constexpr double rel_E = 110.0;
inline constexpr double rel_beta = 4.3797052619803289;
inline constexpr double rel_beta_prime = 1.1108186749667881;
inline constexpr double rel_rmin_q5 = 1.2132300330831229;
inline constexpr double rel_g_q5 = 0.0056679242029241878;
inline constexpr double rel_g_beta = 0.0064650491138869482;

inline constexpr double CE_unit_bounds = 0.87867041900557847;
inline constexpr double RE_unit_bounds = 0.50869688934834482;

}  // namespace oracle
