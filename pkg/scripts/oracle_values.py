#!/usr/bin/env python3
"""High-precision reference values frozen into the unit tests.

Evaluated with mpmath (30 digits) directly from the Bessel-function form of the
non-central chi-squared density, independently of the package code.
"""

import mpmath as mp

mp.mp.dps = 30


def pdf(d, t, x):
    t2, x = mp.mpf(t) ** 2, mp.mpf(x)
    nu = mp.mpf(d) / 2 - 1
    return mp.e ** (-(x + t2) / 2) / 2 * (x / t2) ** (nu / 2) * mp.besseli(nu, mp.sqrt(t2 * x))


def renyi(alpha, d, tv, tw):
    f = lambda x: pdf(d, tv, x) ** alpha * pdf(d, tw, x) ** (1 - alpha)
    return mp.log(mp.quad(f, [0, 5, 20, 60, mp.inf])) / (alpha - 1)


def fisher(d, t):
    f = lambda x: mp.diff(lambda s: mp.log(pdf(d, s, x)), t) ** 2 * pdf(d, t, x)
    return mp.quad(f, [0, 5, 20, 60, mp.inf])


if __name__ == "__main__":
    print("log I_0(1)          ", mp.log(mp.besseli(0, 1)))
    print("log I_1/2(1)        ", mp.log(mp.besseli(0.5, 1)))
    print("R_0(1)              ", mp.besseli(1, 1) / mp.besseli(0, 1))
    print("R_2(1000)           ", mp.besseli(3, 1000) / mp.besseli(2, 1000))
    print("log I_3.5(1e5)      ", mp.log(mp.besseli(3.5, 100000)))
    print("score(d=4,t=1,x=4)  ", -1 + 2 * mp.besseli(2, 2) / mp.besseli(1, 2))
    print("log pdf(5, 2, 3)    ", mp.log(pdf(5, 2, 3)))
    print("D_2(5; 2 || 1)      ", renyi(2, 5, 2, 1))
    print("D_2(10; 2 || 1)     ", renyi(2, 10, 2, 1))
    print("I(10, 2)            ", fisher(10, 2))
    print("I(4, 1)             ", fisher(4, 1))
