"""Independent high-precision oracles for the frozen test values.

Run:  python3 tests/oracles/generate.py > tests/oracles.hpp

Everything here is evaluated from the defining integrals and formulas with
mpmath at 40 digits; nothing calls into the C++ library.
"""
import mpmath as mp

mp.mp.dps = 40

# standard profile: W(r) = A (1+r)^-alpha beyond R, exact bounds
A, ALPHA, R = mp.mpf(1), mp.mpf(2), mp.mpf(1)
B0, B1 = abs(A), abs(A) * ALPHA


def W(r):
    return A * (1 + r) ** (-ALPHA)


def beta_nonrel(E):
    return mp.sqrt(2 * E + 2 * B0) * max(R, ((B1 + 2 * B0) / (2 * E)) ** (1 / ALPHA))


def beta_prime_nonrel(E, beta):
    return beta / mp.sqrt(2 * E - 2 * B0 * beta ** (-ALPHA) * (2 * B0 + 2 * E) ** (ALPHA / 2))


def beta_rel(E, c):
    P = E * (2 * B0 + B1) + B1 * B0
    D = E * E - c ** 4
    disc = P * P - 4 * B0 * B0 * D
    tilde = (2 * B0 * B0) ** (1 / ALPHA) * (P - mp.sqrt(disc)) ** (-1 / ALPHA)
    root = mp.sqrt((E + B0) ** 2 - c ** 4)
    second = (B0 / (E - c * c)) ** (1 / ALPHA) * c * root / E
    third = c * R * root / E
    return max(tilde, second, third)


def beta_prime_rel(E, c, beta):
    lower = beta * E / (c * mp.sqrt((E + B0) ** 2 - c ** 4))
    K = E - B0 * lower ** (-ALPHA)
    return E * beta / (c * mp.sqrt(K * K - c ** 4))


def radicand(E, q, r, c=None):
    if c is None:
        return E - W(r) - q * q / (2 * r * r)
    K = E - W(r)
    return K * K - c ** 4 - q * q * E * E / (c * c * r * r)


def r_min(E, q, c=None):
    # largest zero: scan down from far out, then refine
    hi = q  # radicand > 0 at r = q for these energies
    while radicand(E, q, hi, c) <= 0:
        hi *= 2
    lo = hi
    step = hi / 1000
    while radicand(E, q, lo, c) > 0:
        lo -= step
    return mp.findroot(lambda r: radicand(E, q, r, c), (lo, lo + step), solver="bisect")


def g(E, q, c=None):
    chi = 1 / r_min(E, q, c)
    if c is None:
        f = lambda s: 1 / mp.sqrt(2 * (E - W(1 / s)) - q * q * s * s)
        pref = 2
    else:
        f = lambda s: 1 / mp.sqrt((E - W(1 / s)) ** 2 - c ** 4 - q * q * E * E * s * s / (c * c))
        pref = 2 / c
    # s = chi sin(theta) removes the inverse square root at s = chi
    v = pref * mp.quad(lambda th: f(chi * mp.sin(th)) * chi * mp.cos(th), [0, mp.pi / 2])
    # rounding in r_min can leave a radicand of -1e-40 at the last node
    assert abs(mp.im(v)) < 1e-15 * abs(v)
    return mp.re(v)


def nontrapping_nonrel(E, n, b0, b1, alpha):
    C = 2 * E / ((n * b1 + 2 * b0) * (1 + mp.sqrt(2 * (E + b0))))
    return C, max(0, (2 / C) ** (1 / alpha) - 1)


def emit(name, x):
    print(f"inline constexpr double {name} = {mp.nstr(x, 17, min_fixed=-30, max_fixed=30)};")


print("#pragma once")
print()
print("// Generated by tests/oracles/generate.py (mpmath, 40 digits). Do not edit.")
print("// Profile W(r) = (1+r)^-2 beyond R = 1, bounds beta0 = 1, beta1 = 2.")
print()
print("namespace oracle {")
print()
E = mp.mpf(10)
b = beta_nonrel(E)
emit("nonrel_E", E)
emit("nonrel_beta", b)
emit("nonrel_beta_prime", beta_prime_nonrel(E, b))
emit("nonrel_rmin_q5", r_min(E, mp.mpf(5)))
emit("nonrel_rmin_beta", r_min(E, b))
emit("nonrel_g_q5", g(E, mp.mpf(5)))
emit("nonrel_g_q10", g(E, mp.mpf(10)))
emit("nonrel_g_beta", g(E, b))
print()
c = mp.mpf(10)
Er = c * c + 10
br = beta_rel(Er, c)
emit("rel_c", c)
emit("rel_E", Er)
emit("rel_beta", br)
emit("rel_beta_prime", beta_prime_rel(Er, c, br))
emit("rel_rmin_q5", r_min(Er, mp.mpf(5), c))
emit("rel_g_q5", g(Er, mp.mpf(5), c))
emit("rel_g_beta", g(Er, br, c))
print()
C, RE = nontrapping_nonrel(mp.mpf(10), 2, mp.mpf(1), mp.mpf(1), mp.mpf(2))
emit("CE_unit_bounds", C)
emit("RE_unit_bounds", RE)
print()
print("}  // namespace oracle")
