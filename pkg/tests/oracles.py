"""Reference computations that share no code with the package.

Each one reaches its answer by a different route from the library: mpmath
integration instead of the log-domain scipy scheme, a plain numpy field
simulation without far-field compensation, brute-force enumeration instead
of waterfilling.
"""
import itertools
import math

import mpmath
import numpy as np


def kernel(r, d, p, alpha, beta):
    return 1 - p + p * r ** alpha / (r ** alpha + beta * d ** alpha)


def _radial_mp(one_minus, knee, alpha):
    """2 pi int_0^inf r g(r) dr, tail taken in w = r^(2-a) so algebraic decay is harmless."""
    with mpmath.workdps(30):
        a = mpmath.mpf(alpha)
        head = mpmath.quad(lambda r: 2 * mpmath.pi * r * one_minus(r), [0, knee])
        w0 = mpmath.mpf(knee) ** (2 - a)

        def tail(w):
            if w == 0:
                return mpmath.mpf(0)
            r = w ** (1 / (2 - a))
            # r dr = r^2 / ((2 - a) w) dw, orientation flipped
            return 2 * mpmath.pi * one_minus(r) * r * r / ((a - 2) * w)

        # limit at w -> 0 is finite; quad never evaluates the endpoint
        return float(head + mpmath.quad(tail, [0, w0]))


def _log_k(r, d, p, alpha, beta):
    # ln K without forming 1 - (1 - tiny)
    w = beta * mpmath.mpf(d) ** alpha
    return mpmath.log1p(-p * w / (r ** alpha + w))


def J_mp(ell, d, p, alpha, beta):
    """2 pi int r (1 - K^ell) dr at 30 digits."""
    knee = d * mpmath.mpf(beta) ** (1 / mpmath.mpf(alpha))
    return _radial_mp(lambda r: -mpmath.expm1(ell * _log_k(r, d, p, alpha, beta)), knee, alpha)


def J2_mp(r_exp, s_exp, d1, d2, p, alpha, beta):
    knee = max(d1, d2) * mpmath.mpf(beta) ** (1 / mpmath.mpf(alpha))
    return _radial_mp(lambda x: -mpmath.expm1(r_exp * _log_k(x, d1, p, alpha, beta)
                                              + s_exp * _log_k(x, d2, p, alpha, beta)),
                      knee, alpha)


def closed_form_J1(d, p, alpha, beta):
    c1 = 2 * math.pi ** 2 / (alpha * math.sin(2 * math.pi / alpha))
    return p * d * d * beta ** (2 / alpha) * c1


def tail_J1(radius, d, p, alpha, beta):
    """2 pi int_radius^inf r (1 - K) dr."""
    return J_mp(1, d, p, alpha, beta) - float(mpmath.quad(
        lambda r: 2 * mpmath.pi * r * (1 - kernel(r, d, p, alpha, beta)), [0, radius]))


def mc_outage(lam, p, alpha, beta, d, trials, radius, seed, batch=20_000):
    """Single-slot SIR outage frequency on a PPP disc centred at the receiver.

    Interferers beyond ``radius`` enter through their exact Laplace factor:
    the desired fade must also clear lam * tail_J1, which keeps the estimate
    unbiased for any radius.
    """
    rng = np.random.default_rng(seed)
    tail = lam * tail_J1(radius, d, p, alpha, beta)
    gain = beta * d ** alpha
    fails = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        counts = rng.poisson(lam * p * math.pi * radius ** 2, size=b)  # active interferers only
        r = radius * np.sqrt(rng.random(counts.sum()))
        power = rng.exponential(size=counts.sum()) * r ** -alpha
        owner = np.repeat(np.arange(b), counts)
        interference = np.bincount(owner, weights=power, minlength=b)
        h = rng.exponential(size=b)
        fails += int(np.sum(h < gain * interference + tail))
        done += b
    return fails / trials


def single_hop_enumeration(D, lam, p, alpha, beta, d):
    """P_s summed over explicit ALOHA patterns of the D+1 slots.

    A pattern with k transmitted slots succeeds unless all k fail, and
    P(k given slots all fail) = sum_l (-1)^l C(k,l) exp(-lam J(l)).
    """
    Js = [J_mp(ell, d, p, alpha, beta) for ell in range(D + 2)]
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=D + 1):
        k = sum(pattern)
        weight = p ** k * (1 - p) ** (D + 1 - k)
        all_fail = sum((-1) ** ell * math.comb(k, ell) * math.exp(-lam * Js[ell])
                       for ell in range(k + 1))
        total += weight * (1 - all_fail)
    return total


def brute_force_allocation(q_hats, D):
    """Best integer split of D maximizing sum ln(1 - qh^(D_n+1)), smallest index tie-break."""
    n = len(q_hats)
    best, best_val = None, -math.inf
    for cut in itertools.combinations(range(D + n - 1), n - 1):
        parts, prev = [], -1
        for c in cut + (D + n - 1,):
            parts.append(c - prev - 1)
            prev = c
        val = sum(math.log1p(-qh ** (b + 1)) for b, qh in zip(parts, q_hats))
        if val > best_val + 1e-13:
            best, best_val = tuple(parts), val
    return best, best_val
