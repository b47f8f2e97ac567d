"""Reference values of the Hartman-Watson kernel theta(y, t) and of the law of A(t) = int_0^t exp(2 W(s)) ds.

theta(y, t) = y / sqrt(2 pi^3 t) * exp(pi^2 / (2 t))
              * int_0^inf exp(-xi^2 / (2 t) - y cosh xi) sinh xi sin(pi xi / t) dxi

P(A(t) in du, W(t) in dx) = exp(-(1 + e^{2x}) / (2u)) theta(e^x / u, t) du dx / u

Evaluated with mpmath at 60 digits on the real axis; the cancellation against exp(pi^2/(2t)) is absorbed by
the working precision. Prints C++ initialisers for tests/unit/test_breaking_law.cpp.
"""

import mpmath as mp

mp.mp.dps = 60


def theta(y, t):
    y, t = mp.mpf(y), mp.mpf(t)
    f = lambda xi: mp.exp(-xi**2 / (2 * t) - y * mp.cosh(xi)) * mp.sinh(xi) * mp.sin(mp.pi * xi / t)
    # Split at the zeros of sin(pi xi / t) so each piece is one-signed.
    edge = max(mp.mpf(40), 20 * t)
    pts = [k * t for k in range(int(edge / t) + 1)]
    integral = mp.quad(f, pts)
    return y / mp.sqrt(2 * mp.pi**3 * t) * mp.exp(mp.pi**2 / (2 * t)) * integral


def yor_density(u, t):
    u, t = mp.mpf(u), mp.mpf(t)
    g = lambda x: mp.exp(-(1 + mp.exp(2 * x)) / (2 * u)) * theta(mp.exp(x) / u, t) / u
    return mp.quad(g, [-12, -4, 0, 4, 12])


if __name__ == "__main__":
    for t in ("1", "0.5", "0.2"):
        for y in ("0.3", "2", "10", "50"):
            print(f"    {{{y}, {t}, {mp.nstr(theta(y, t), 17)}}},")
    mp.mp.dps = 30
    print("yor_density(1, 1) =", mp.nstr(yor_density(1, 1), 15))
