"""Hand-integrated one-step formulas for the two model families.

Written out term by term from the exponential representations of W and Z,
independently of the library's convolution helpers; used as test oracles
for omega = q 1(z < a) + p 1(z >= a).
"""
import math


def _roots(a2, a1, a0):
    disc = math.sqrt(a1 * a1 - 4 * a2 * a0)
    return (-a1 + disc) / (2 * a2), (-a1 - disc) / (2 * a2)


def _tail(r, e, a, t):
    # (e^{r t} - e^{r a + e (t - a)})
    return math.exp(r * t) - math.exp(r * a + e * (t - a))


def brownian_one_step(mu, sigma, q, p, a, t):
    """(W, Zhat) at t for the Brownian surplus."""
    D = sigma * sigma / 2
    r1, r2 = _roots(D, mu, -q)
    e1, e2 = _roots(D, mu, -p)
    W = (math.exp(r1 * t) - math.exp(r2 * t)) / (D * (r1 - r2))
    Z = (r2 * math.exp(r1 * t) - r1 * math.exp(r2 * t)) / (r2 - r1)
    if t <= a:
        return W, Z
    cw = (p - q) / (D * D * (r1 - r2) * (e1 - e2))
    W += cw * (_tail(r1, e1, a, t) / (r1 - e1) + _tail(r2, e1, a, t) / (e1 - r2)
               + _tail(r1, e2, a, t) / (e2 - r1) + _tail(r2, e2, a, t) / (r2 - e2))
    cz = (p - q) / (D * (e2 - e1) * (r1 - r2))
    Z += cz * (e2 * _tail(r1, e1, a, t) / (r1 - e1) + e2 * _tail(r2, e1, a, t) / (e1 - r2)
               + e1 * _tail(r1, e2, a, t) / (e2 - r1) + e1 * _tail(r2, e2, a, t) / (r2 - e2))
    return W, Z


def cl_one_step(mu, lam, beta, q, p, a, t):
    """(W, Zhat) at t for the Cramer-Lundberg surplus with exponential claims."""
    r1, r2 = _roots(mu, mu * beta - lam - q, -q * beta)
    e1, e2 = _roots(mu, mu * beta - lam - p, -p * beta)
    W = ((beta + r1) * math.exp(r1 * t) / (mu * (r1 - r2))
         + (beta + r2) * math.exp(r2 * t) / (mu * (r2 - r1)))
    if q > 0:
        Z = (r2 * (beta + r1) / (beta * (r2 - r1)) * math.exp(r1 * t)
             + r1 * (beta + r2) / (beta * (r1 - r2)) * math.exp(r2 * t))
    else:
        Z = 1.0
    if t <= a:
        return W, Z
    cw = (p - q) / (mu * mu * (r1 - r2) * (e1 - e2))
    W += cw * (_tail(r1, e1, a, t) / (r1 - e1) * (beta + e1) * (beta + r1)
               + _tail(r2, e1, a, t) / (e1 - r2) * (beta + e1) * (beta + r2)
               + _tail(r1, e2, a, t) / (e2 - r1) * (beta + e2) * (beta + r1)
               + _tail(r2, e2, a, t) / (r2 - e2) * (beta + e2) * (beta + r2))
    cz = (q - p) / (mu * beta * (e1 - e2) * (r1 - r2))
    Z += cz * (_tail(r1, e1, a, t) / (r1 - e1) * e2 * (beta + e1) * (beta + r1)
               + _tail(r2, e1, a, t) / (e1 - r2) * e2 * (beta + e1) * (beta + r2)
               + _tail(r1, e2, a, t) / (e2 - r1) * e1 * (beta + e2) * (beta + r1)
               + _tail(r2, e2, a, t) / (r2 - e2) * e1 * (beta + e2) * (beta + r2))
    return W, Z
