"""Brute-force oracles used to freeze expected values in the C++ tests.

Each value is computed by direct enumeration / dense grid search, never by the
root-finding path used in the library.
"""
import math
import numpy as np


def breg_lb(q, p):
    r = q / p
    return r - 1.0 - np.log(r)


def gap_grid_2(p, loss, eta, h=1e-7):
    q1 = np.arange(h, 1.0, h)
    q = np.stack([q1, 1.0 - q1])
    obj = loss[0] * (p[0] - q[0]) + loss[1] * (p[1] - q[1]) \
        - (breg_lb(q[0], p[0]) + breg_lb(q[1], p[1])) / eta
    k = int(np.argmax(obj))
    return obj[k], q[:, k]


def argmin_ftrl_2(cum, eta, h=1e-7):
    q1 = np.arange(h, 1.0, h)
    obj = -np.log(q1) - np.log(1 - q1) + eta * (cum[0] * q1 + cum[1] * (1 - q1))
    k = int(np.argmin(obj))
    return q1[k], 1 - q1[k]


if __name__ == "__main__":
    print("breg log-barrier (0.25||0.5)", 0.25 / 0.5 - 1 - math.log(0.5))
    print("mixed bregman example", (0.5 - 1 - math.log(0.5)) + (1.5 - 1 - math.log(1.5)))
    print("exp lower bound", 1 / (2 * (math.e - 1)), "breg", 2 * math.log(2) - 1)
    v, q = gap_grid_2(np.array([0.5, 0.5]), np.array([1.0, 0.0]), 0.1)
    print("gap p=uniform l=(1,0) eta=0.1: %.12f  q*=%s" % (v, q))
    m1, q = gap_grid_2(np.array([0.5, 0.5]), np.array([1.0, 0.0]), 2.0)
    eta1 = 2.0 / (1.0 + m1)
    p2 = argmin_ftrl_2(np.array([1.0, 0.0]), eta1)
    print("adaftrl step: M1=%.12f eta1=%.12f p2=(%.9f, %.9f)" % (m1, eta1, *p2))
    p = argmin_ftrl_2(np.array([0.0, 1.0]), 1.0)
    print("ftrl iterate sum=(0,1) eta=1: (%.9f, %.9f)" % p)
