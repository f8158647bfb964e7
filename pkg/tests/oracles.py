"""Independent scalar transcriptions of the closed-form bounds.

Plain loops over indices with the math module; deliberately shares no code
with the vectorized implementation.
"""

import math


def lower_levels(d, alpha, k, ulow):
    n = len(d)
    lam2 = min(
        alpha[j] * d[j] * math.log(ulow[j] + k[j])
        + sum(alpha[i] * d[i] * math.log(k[i]) for i in range(n) if i != j)
        for j in range(n)
    )

    def cross(j):
        return sum(alpha[i] * (d[i] - d[j]) * math.log(k[i]) for i in range(n) if i != j)

    eta = min((lam2 - cross(j)) / d[j] for j in range(n))
    lam1 = min(eta * d[j] + cross(j) for j in range(n))
    return lam2, eta, lam1


def equal_diffusion_bound(alpha, k, ulow):
    n = len(alpha)
    best = math.inf
    for j in range(n):
        v = (ulow[j] + k[j]) ** alpha[j]
        for i in range(n):
            if i != j:
                v *= k[i] ** alpha[i]
        best = min(best, v)
    return best


def upper_sum(d, alpha, m, uhigh):
    return max(a * u**e for a, u, e in zip(alpha, uhigh, m)) * max(d) / min(d)


def upper_product(d, alpha, m, uhigh):
    n = len(d)
    return upper_sum(d, alpha, m, uhigh) / (n * math.prod(alpha) ** (1.0 / n))


def upper_levels(d, alpha, m, uhigh):
    lam2 = max(a * di * u**e for a, di, u, e in zip(alpha, d, uhigh, m))
    eta = lam2 / min(d)
    return lam2, eta, eta * max(d)


def log_equal_diffusion_bound(alpha, k, ulow):
    n = len(alpha)
    return min(
        alpha[j] * math.log(ulow[j] + k[j]) + sum(alpha[i] * math.log(k[i]) for i in range(n) if i != j)
        for j in range(n)
    )
