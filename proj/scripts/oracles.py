#!/usr/bin/env python3
"""Independent high-precision reference values frozen into the unit tests.

Run with `python3 scripts/oracles.py`; requires mpmath.
"""
import mpmath as mp

mp.mp.dps = 50


def Q(a, x):
    return mp.gammainc(a, x, mp.inf, regularized=True)


def P(a, x):
    return mp.gammainc(a, 0, x, regularized=True)


def show(label, v):
    print(f"{label} = {mp.nstr(v, 17)}")


print("# regularized incomplete gamma")
for a, x in [(0.5, 0.1), (5, 3), (100, 120), (19200, 19200), (19200, 19200 / 0.97), (19200, 18900),
             (100000, 101000), (3, 2.674), (2.5, 40)]:
    show(f"Q({a}, {x})", Q(a, mp.mpf(x)))
    show(f"P({a}, {x})", P(a, mp.mpf(x)))

print("# poisson")
show("ln_pmf(50, 50)", 50 * mp.log(50) - 50 - mp.loggamma(51))


def pois(mu, k):
    return mp.exp(k * mp.log(mu) - mu - mp.loggamma(k + 1))


def window(mu, thr, end):
    pm = [pois(mu, k) for k in range(end)]
    mode = max(range(end), key=lambda k: pm[k])
    lo = hi = mode
    inside = pm[mode]
    while 1 - inside >= thr:
        left = pm[lo - 1] if lo > 0 else -1
        right = pm[hi + 1] if hi + 1 < end else -1
        if right >= left:
            hi += 1
            inside += right
        else:
            lo -= 1
            inside += left
    return lo, hi, 1 - inside, pm


lo, hi, out, pm50 = window(50, mp.mpf("1e-9"), 200)
print(f"poisson(50) window 1e-9 = [{lo}, {hi}] outside = {mp.nstr(out, 17)}")

print("# xi pairwise, n=19200, P' = 0.97 * P at 1 dB")
n = 19200
P1 = mp.mpf(10) ** (mp.mpf(1) / 10) * 128 / n
pp = mp.mpf("0.97") * P1
show("pprime(1dB,0.97)", pp)


def zeta_ml(K, ka, kp, pp):
    vk, vp = 1 + K * pp, 1 + kp * pp
    return n * mp.log(vk / vp) / (1 + ka * pp) / (1 / vp - 1 / vk)


def zeta_en(K, ka, kp, pp):
    return n / (1 + ka * pp) * (1 + (K + kp) * pp / 2)


def xi_pair(est, K, ka, kp, pp):
    z = zeta_ml(K, ka, kp, pp) if est == "ml" else zeta_en(K, ka, kp, pp)
    z = max(z, 0)
    return Q(n, z) if K < kp else P(n, z)


for est in ("ml", "energy"):
    for (K, ka, kp) in [(50, 50, 51), (49, 50, 50), (51, 50, 50), (45, 45, 50), (55, 55, 50), (50, 52, 49)]:
        show(f"xi_{est}(K={K}, Ka={ka}, Ka'={kp})", xi_pair(est, K, ka, kp, pp))

print("# p0 for Poisson(50), n=19200, k=128, 1 dB, ratio 0.97")
M = mp.mpf(2) ** 128
coll = mp.mpf(0)
for k in range(200):
    s = mp.mpf(1)
    for i in range(1, k):
        s *= 1 - i / M
    coll += pois(50, k) * (1 - s)
show("truncation", out)
show("collision", coll)
show("power", 50 * Q(n, n / mp.mpf("0.97")))


def floors(r, est="ml"):
    """Asymptotic floors with xi measured against the true count (default mode)."""
    lo_, hi_ = lo, hi
    md = fa = mp.mpf(0)
    for ka in range(lo_, hi_ + 1):
        for kp in range(lo_, hi_ + 1):
            wl, wu = max(lo_, kp - r), min(hi_, kp + r)
            d, e = max(ka - wu, 0), max(wl - ka, 0)
            if d + e == 0:
                continue
            if ka == 0:
                x = mp.mpf(0)  # zeta = +inf for K_a = 0 is not reached in this window
            else:
                K = ka
                kd, pd = mp.mpf(K), mp.mpf(kp)
                if est == "ml":
                    z = n * mp.log(kd / pd) / ka / (1 / pd - 1 / kd)
                else:
                    z = n * (kd + pd) / (2 * ka)
                x = Q(n, z) if K < kp else P(n, z)
            if ka >= max(lo_, 1):
                md += pm50[ka] * mp.mpf(d) / ka * x
            fa += pm50[ka] * mp.mpf(e) / (ka - d + e) * x
    pbar = out + coll
    return md + pbar, fa + pbar


for r in (0, 1):
    m, f = floors(r)
    show(f"floor_md(r={r})", m)
    show(f"floor_fa(r={r})", f)

print("# E0 at fixed (rho, rho1): sup over lambda > 0 of rho1*a + ln(1 - rho1*P2*b)")


def e0(pp, p2, t, tp, rho, rho1):
    def obj(lam):
        mu = rho * lam / (1 + pp * tp * lam)
        a = rho * mp.log(1 + pp * tp * lam) + mp.log(1 + pp * t * mu)
        b = rho * lam - mu / (1 + pp * t * mu)
        arg = 1 - rho1 * p2 * b
        if arg <= 0:
            return mp.mpf("-inf")
        return rho1 * a + mp.log(arg)

    # upper end of the feasible region
    hi_ = mp.mpf(1)
    while obj(hi_) > mp.mpf("-inf"):
        hi_ *= 2
    lo_ = mp.mpf(0)
    for _ in range(200):
        mid = (lo_ + hi_) / 2
        if obj(mid) > mp.mpf("-inf"):
            lo_ = mid
        else:
            hi_ = mid
    # golden section on (0, lo_)
    g = (mp.sqrt(5) - 1) / 2
    a_, b_ = mp.mpf(0), lo_
    x1, x2 = b_ - g * (b_ - a_), a_ + g * (b_ - a_)
    f1, f2 = obj(x1), obj(x2)
    for _ in range(300):
        if f1 < f2:
            a_, x1, f1 = x1, x2, f2
            x2 = a_ + g * (b_ - a_)
            f2 = obj(x2)
        else:
            b_, x2, f2 = x2, x1, f1
            x1 = b_ - g * (b_ - a_)
            f1 = obj(x1)
    return max(f1, f2, mp.mpf(0)), (x1 + x2) / 2


for args in [(0.05, 1.0, 1, 1, 1.0, 1.0), (0.05, 1.1, 1, 2, 0.6, 0.8), (0.02, 1.06, 2, 3, 0.3, 0.5),
             (0.5, 2.0, 3, 0, 0.7, 0.9), (0.1, 1.0, 0, 2, 0.9, 0.4)]:
    v, lam = e0(*[mp.mpf(x) for x in args[:2]], args[2], args[3], mp.mpf(args[4]), mp.mpf(args[5]))
    show(f"E0{args}", v)
    show(f"  lambda{args}", lam)
