#!/usr/bin/env python3
"""Generate high-precision reference values frozen into the C++ unit tests.

Run:  python3 gen_reference.py
Every value is printed with 50 significant digits via mpmath; the C++ tests
embed the first ~17 digits (double precision) as string constants.
"""
import mpmath as mp
from fractions import Fraction

mp.mp.dps = 60


def show(tag, v):
    if isinstance(v, mp.mpc):
        print(f"{tag}.re = {mp.nstr(v.real, 50)}")
        print(f"{tag}.im = {mp.nstr(v.imag, 50)}")
    else:
        print(f"{tag} = {mp.nstr(v, 50)}")


# --- generalized hypergeometric series, brute force (independent of mpmath.hyper) ---
def pfq_series(a, b, z, terms=4000):
    s = mp.mpc(0)
    t = mp.mpc(1)
    for k in range(terms):
        s += t
        num = mp.mpc(1)
        for ai in a:
            num *= (ai + k)
        den = mp.mpc(1)
        for bi in b:
            den *= (bi + k)
        t = t * num / den * z / (k + 1)
        if abs(t) < mp.mpf(10) ** (-58) * (1 + abs(s)):
            break
    return s + t


def phi_series(a, b, z, terms=4000):
    # regularized: sum_k prod Gamma(a_i+k)/prod Gamma(b_j+k) z^k/k!
    s = mp.mpc(0)
    for k in range(terms):
        t = mp.mpc(1)
        for ai in a:
            t *= mp.gamma(ai + k)
        for bi in b:
            t *= mp.rgamma(bi + k)
        t *= z ** k / mp.factorial(k)
        s += t
        if k > 8 and abs(t) < mp.mpf(10) ** (-58) * (1 + abs(s)):
            break
    return s


print("# hypergeometric")
show("F33_unit", pfq_series([1, 1, 1], [2, 2, 2], mp.mpf("0.5")))
show("F33_cplx", pfq_series([mp.mpc("1.3", "0.4"), mp.mpc("0.9"), mp.mpc("1.1", "-0.2")],
                            [mp.mpc("2.1"), mp.mpc("1.7", "0.1"), mp.mpc("2.4")],
                            mp.mpc("0.6", "-0.3")))
show("F44_real", pfq_series([mp.mpf("1.2"), mp.mpf("0.7"), mp.mpf("1.5"), mp.mpf("0.9")],
                            [mp.mpf("2.3"), mp.mpf("1.8"), mp.mpf("2.6"), mp.mpf("1.4")],
                            mp.mpf("-0.8")))
show("PHI33_intb", phi_series([mp.mpf("0.5"), mp.mpf("1.2"), mp.mpf("0.8")],
                              [mp.mpf("-2"), mp.mpf("1.5"), mp.mpf("2.2")],
                              mp.mpf("0.7")))

print("# log-gamma principal branch")
show("lgamma_m05", mp.loggamma(mp.mpf("-0.5")))
show("lgamma_3p4i", mp.loggamma(mp.mpc(3, 4)))
show("lgamma_05m25i", mp.loggamma(mp.mpc("0.5", "-2.5")))
show("lgamma_m35p02i", mp.loggamma(mp.mpc("-3.5", "0.2")))

print("# Meijer G (paper-orientation: mpmath meijerg with same a/b ordering)")
# G^{2,2}_{2,3}(a1,a2; b1,b2,b3 | x), m=2 n=2: a-groups [[a1,a2],[]], b-groups [[b1,b2],[b3]]
show("G2223", mp.meijerg([[mp.mpf("0.2"), mp.mpf("0.4")], []],
                         [[mp.mpf("0.7"), mp.mpf("0.15")], [mp.mpf("-0.3")]],
                         mp.mpf("0.35")))
# G^{3,1}_{3,4}(a;b|x) with generic parameters resembling the CDF shape
show("G3134", mp.meijerg([[mp.mpf("-0.8")], [mp.mpf("0.9"), mp.mpf("1.0")]],
                         [[mp.mpf("1.3"), mp.mpf("2.6"), mp.mpf("-0.35")], [mp.mpf("-1.15")]],
                         mp.mpf("0.6")))

print("# Whittaker")
show("whitM_03_07_15", mp.whitm(mp.mpf("0.3"), mp.mpf("0.7"), mp.mpf("1.5")))
show("whitW_03_07_15", mp.whitw(mp.mpf("0.3"), mp.mpf("0.7"), mp.mpf("1.5")))

print("# Laplace exponent at z=1, table-1 parameter set, exact rational")
mu = Fraction(34161, 1000000)   # 0.034161
A = Fraction(128, 10000)        # sigma^2/2 = 0.0128
lam, p = Fraction(1), Fraction(3, 10)
rho, rho_hat = Fraction(20), Fraction(10)
z = Fraction(1)
psi1 = mu * z + A * z * z + lam * p * z / (rho - z) - lam * (1 - p) * z / (rho_hat + z)
print("psi1_exact =", psi1)
show("psi1_dec", mp.mpf(psi1.numerator) / mp.mpf(psi1.denominator))

print("# Gompertz-Makeham f(0) at x=65, A=7e-4, B=5e-5, c=10^0.04")
c = mp.mpf(10) ** mp.mpf("0.04")
show("gm_f0", mp.mpf("0.0007") + mp.mpf("0.00005") * c ** 65)
show("gm_mean", mp.quad(lambda t: t * (mp.mpf("0.0007") + mp.mpf("0.00005") * c ** (65 + t))
                        * mp.exp(-mp.mpf("0.0007") * t - mp.mpf("0.00005") * c ** 65 * (c ** t - 1) / mp.log(c)),
                        [0, 30, 60, 120]))
show("gm_S35", mp.exp(-mp.mpf("0.0007") * 35 - mp.mpf("0.00005") * c ** 65 * (c ** 35 - 1) / mp.log(c)))

print("# deep-cancellation pFq values (escalation path)")
show("F22_neg30", pfq_series([mp.mpf("1.5"), mp.mpf("2.5")],
                             [mp.mpf("1.2"), mp.mpf("3.0")], mp.mpf("-30")))
show("F33_neg35", pfq_series([mp.mpf("2.3"), mp.mpf("1.1"), mp.mpf("3.7")],
                             [mp.mpf("4.2"), mp.mpf("2.9"), mp.mpf("5.1")], mp.mpf("-35")))

# ---------------------------------------------------------------------------
# Exponential functional of the Kou process: Mellin transform, density, CDF
# and truncated expectations at the risk-adjusted table parameter set.
# Computed from the closed forms with mpmath primitives (meijerg, gamma,
# brute-force series), fully independent of the C++ evaluation strategy.
# ---------------------------------------------------------------------------
print("# exponential functional, Kou(mu=0.034161 sigma=0.16 lambda=1 p=0.3 rho=20 rhohat=10), q=0.05, x=1/0.0035")
mu = mp.mpf("0.034161")
sig = mp.mpf("0.16")
lam = mp.mpf(1)
pup = mp.mpf("0.3")
rho = mp.mpf(20)
rho_hat = mp.mpf(10)
A = sig ** 2 / 2
q = mp.mpf("0.05")
x = 1 / mp.mpf("0.0035")
u = 1 / (A * x)

c4 = -A
c3 = A * (rho - rho_hat) - mu
c2 = A * rho * rho_hat + mu * (rho - rho_hat) + q + lam
c1 = mu * rho * rho_hat - q * (rho - rho_hat) + lam * pup * rho_hat - lam * (1 - pup) * rho
c0 = -q * rho * rho_hat
rts = mp.polyroots([c4, c3, c2, c1, c0], maxsteps=300, extraprec=200)
pos = sorted([mp.re(r) for r in rts if mp.re(r) > 0])
neg = sorted([mp.re(r) for r in rts if mp.re(r) < 0], reverse=True)
z1, z2 = pos[0], pos[1]
zh1, zh2 = -neg[0], -neg[1]
print(f"# roots: z1={mp.nstr(z1, 25)} z2={mp.nstr(z2, 25)} zh1={mp.nstr(zh1, 25)} zh2={mp.nstr(zh2, 25)}")


def gammaprod(num, den):
    r = mp.mpf(1)
    for v in num:
        r *= mp.gamma(v)
    for v in den:
        r *= mp.rgamma(v)
    return r


def sinp(v):
    return mp.sin(mp.pi * v)


def psip(z):
    return mu + 2 * A * z + lam * pup * rho / (rho - z) ** 2 - lam * (1 - pup) * rho_hat / (rho_hat + z) ** 2


def mellin_G(s):  # Meijer-G closed form
    pre = q * A ** (-s) * gammaprod([1 + z1 - s, 1 + z2 - s, rho_hat + s],
                                    [1 - s, 1 + rho - s, zh1 + s, zh2 + s])
    G = mp.meijerg([[1 - s, 1, -rho], [rho_hat]], [[1 - s, zh1, zh2], [-z1, -z2]], u)
    return pre * G


def mellin_sine(s):  # sine/Phi expansion of the same transform
    pre = q * A ** (-s) * gammaprod([1 + z1 - s, 1 + z2 - s, rho_hat + s],
                                    [1 - s, 1 + rho - s, zh1 + s, zh2 + s])
    ax = A * x
    f1 = phi_series([1, 1 - s, 2 + rho - s, 2 - rho_hat - s],
                    [2 - s - zh1, 2 - s - zh2, 2 - s + z1, 2 - s + z2], u)
    f2 = phi_series([zh1, 1 + zh1 + rho, 1 + zh1 - rho_hat],
                    [1 + zh1 - zh2, 1 + zh1 + z1, 1 + zh1 + z2], u)
    f3 = phi_series([zh2, 1 + zh2 + rho, 1 + zh2 - rho_hat],
                    [1 + zh2 - zh1, 1 + zh2 + z1, 1 + zh2 + z2], u)
    a1 = -mp.pi * pre * sinp(rho_hat + s) / (sinp(zh1 + s) * sinp(zh2 + s)) * ax ** (s - 1)
    a2 = mp.pi * pre * sinp(rho_hat - zh1) / (sinp(s + zh1) * sinp(zh2 - zh1)) * ax ** (-zh1)
    a3 = mp.pi * pre * sinp(rho_hat - zh2) / (sinp(s + zh2) * sinp(zh1 - zh2)) * ax ** (-zh2)
    return a1 * f1 + a2 * f2 + a3 * f3


s07 = mp.mpf("0.7")
M07g, M07s = mellin_G(s07), mellin_sine(s07)
print(f"# mellin cross-check |G-form - sine-form| = {mp.nstr(abs(M07g - M07s), 5)}")
show("EF_M07", M07g)
Mz1 = mellin_sine(z1)
Mz2 = mellin_sine(z2)
print(f"# continuation cross-check at zeta1: {mp.nstr(abs(mellin_G(z1) - Mz1) / abs(Mz1), 5)}")
show("EF_Mz1", Mz1)
show("EF_Mz2", Mz2)
psi1 = mu + A + lam * pup / (rho - 1) - lam * (1 - pup) / (rho_hat + 1)
M2 = (q * x + 1) / (q - psi1)


def psi(z):
    return mu * z + A * z * z + lam * pup * z / (rho - z) - lam * (1 - pup) * z / (rho_hat + z)


s45 = mp.mpf("0.45")
fe_res = abs(mellin_G(s45 + 1) - (q * x ** s45 + s45 * mellin_G(s45)) / (q - psi(s45)))
print(f"# functional equation at s=0.45: {mp.nstr(fe_res, 5)}")


def right_piece(y, kind):
    tot = mp.mpf(0)
    for (za, zb) in [(z1, z2), (z2, z1)]:
        N = (q * x ** za + za * mellin_sine(za)) / psip(za)
        bb = [1 + za - zb, 1 + za + zh1, 1 + za + zh2]
        if kind == 0:
            tot += N * y ** (-1 - za) * pfq_series([1 + za, 1 + za - rho, 1 + za + rho_hat], bb, -1 / (A * y))
        elif kind == 1:
            tot += N / za * y ** (-za) * pfq_series([1 + za - rho, 1 + za + rho_hat, za], bb, -1 / (A * y))
        else:
            tot += N / (za - 1) * y ** (1 - za) * pfq_series(
                [1 + za, 1 + za - rho, 1 + za + rho_hat, za - 1], bb + [za], -1 / (A * y))
    return tot


S1 = sinp(rho_hat - zh1) / sinp(zh2 - zh1) * phi_series(
    [zh1, 1 + zh1 + rho, 1 + zh1 - rho_hat], [1 + zh1 - zh2, 1 + zh1 + z1, 1 + zh1 + z2], u)
S2 = sinp(rho_hat - zh2) / sinp(zh1 - zh2) * phi_series(
    [zh2, 1 + zh2 + rho, 1 + zh2 - rho_hat], [1 + zh2 - zh1, 1 + zh2 + z1, 1 + zh2 + z2], u)
W1 = (A * x) ** (-zh1) * S1
W2 = (A * x) ** (-zh2) * S2


# The swapped term swaps the pole grouping of the G-function as well: the
# hat-root entering the series group follows the weight in front of it.
def left_piece(y, kind):
    w = 1 / (A * y)
    if kind == 0:
        Ga = mp.meijerg([[1 - rho_hat], [1, 1 + rho]], [[1 + z1, 1 + z2, 1 - zh1], [1 - zh2]], w)
        Gb = mp.meijerg([[1 - rho_hat], [1, 1 + rho]], [[1 + z1, 1 + z2, 1 - zh2], [1 - zh1]], w)
        return q * (W1 * Ga + W2 * Gb)
    if kind == 1:
        Ga = mp.meijerg([[-rho_hat], [rho, 1]], [[z1, z2, -zh1], [-zh2]], w)
        Gb = mp.meijerg([[-rho_hat], [rho, 1]], [[z1, z2, -zh2], [-zh1]], w)
        return q / A * (W1 * Ga + W2 * Gb)
    Ga = mp.meijerg([[1 - rho_hat], [1, 1 + rho, 3]], [[2, 1 + z1, 1 + z2, 1 - zh1], [1 - zh2]], w)
    Gb = mp.meijerg([[1 - rho_hat], [1, 1 + rho, 3]], [[2, 1 + z1, 1 + z2, 1 - zh2], [1 - zh1]], w)
    return q * y ** 2 * (W1 * Ga + W2 * Gb)


y08, y12 = mp.mpf("0.8") * x, mp.mpf("1.2") * x
show("EF_den08", left_piece(y08, 0))
show("EF_den12", right_piece(y12, 0))
show("EF_cdf08", left_piece(y08, 1))
show("EF_sf12", right_piece(y12, 1))
show("EF_teb08", left_piece(y08, 2))
show("EF_tea12", right_piece(y12, 2))
eps = mp.mpf("1e-18") * x
print(f"# seam continuity density: {mp.nstr(abs(left_piece(x - eps, 0) - right_piece(x + eps, 0)), 5)}")
print(f"# seam probability total:  {mp.nstr(abs(left_piece(x - eps, 1) + right_piece(x + eps, 1) - 1), 5)}")
print(f"# seam expectation total:  {mp.nstr(abs(left_piece(x - eps, 2) + right_piece(x + eps, 2) - M2) / M2, 5)}")

# ---------------------------------------------------------------------------
# Brownian limit (lambda = 0): Whittaker closed forms, same mu/sigma/q/x.
# ---------------------------------------------------------------------------
print("# exponential functional, Brownian case (lambda=0), same mu/sigma/q/x")
nu = 2 * mu / sig ** 2
eta = mp.sqrt(8 * q / sig ** 2 + nu ** 2) / 2
kap = (1 - nu) / 2
half = mp.mpf(1) / 2
pref = q * mp.gamma(eta - kap + half) * x ** kap * mp.rgamma(1 + 2 * eta)
zx = 2 / (sig ** 2 * x)


def gbm_sf(y):  # y >= x
    return pref * y ** (1 - kap) / (eta + kap - half) * mp.exp((1 / x - 1 / y) / sig ** 2) \
        * mp.whitw(kap, eta, zx) * mp.whitm(kap - 1, eta, 2 / (sig ** 2 * y))


def gbm_cdf(y):  # y < x
    return pref * y ** (1 - kap) * mp.exp((1 / x - 1 / y) / sig ** 2) \
        * mp.whitm(kap, eta, zx) * mp.whitw(kap - 1, eta, 2 / (sig ** 2 * y))


def gbm_tea(y):  # y >= x
    zy = 2 / (sig ** 2 * y)
    return pref * y ** (2 - kap) / (eta + kap - half) * mp.exp((1 / x - 1 / y) / sig ** 2) \
        * mp.whitw(kap, eta, zx) * (mp.whitm(kap - 2, eta, zy) / (eta + kap - 3 * half) + mp.whitm(kap - 1, eta, zy))


def gbm_teb(y):  # y < x
    zy = 2 / (sig ** 2 * y)
    return pref * y ** (2 - kap) * mp.exp((1 / x - 1 / y) / sig ** 2) \
        * mp.whitm(kap, eta, zx) * (mp.whitw(kap - 1, eta, zy) - mp.whitw(kap - 2, eta, zy))


show("GBM_sf12", gbm_sf(y12))
show("GBM_cdf08", gbm_cdf(y08))
show("GBM_tea12", gbm_tea(y12))
show("GBM_teb08", gbm_teb(y08))
M2bm = (q * x + 1) / (q - mu - A)
print(f"# seam probability total:  {mp.nstr(abs(gbm_cdf(x - eps) + gbm_sf(x + eps) - 1), 5)}")
print(f"# seam expectation total:  {mp.nstr(abs(gbm_teb(x - eps) + gbm_tea(x + eps) - M2bm) / M2bm, 5)}")
