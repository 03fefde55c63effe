"""Regenerates the frozen oracle values used by the Rust test suite.

All values are computed with mpmath at 60 significant digits, independently
of the Rust implementation. Run from the crate root:

    python3 tests/oracles/gen_fixtures.py
"""
import os
from mpmath import mp, mpf, erfc, sqrt, log, exp, pi, cosh, tanh, findroot, cbrt

mp.dps = 60
HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.join(HERE, "..", "fixtures")


def sf(x):
    return erfc(x / sqrt(2)) / 2


def cdf(x):
    return erfc(-x / sqrt(2)) / 2


def r(v):
    return repr(float(v))


def xhat(x, eps, delta):
    v2 = 1 + delta**2
    return 2 * abs(x) / sqrt(v2) / (1 + sqrt(1 + 2 * abs(x) * eps / v2))


def breve(x, eps):
    return 2 * abs(x) / (1 + sqrt(1 + 2 * abs(x) * eps))


def lam_bar(x, eps, delta):
    v2 = 1 + delta**2
    u = 2 * x * eps / v2
    return (2 * x / v2) / (1 + u + sqrt(1 + u))


def eps_log(eps):
    return eps * abs(log(eps))


def main():
    os.makedirs(FIX, exist_ok=True)
    with open(os.path.join(FIX, "normal_tail.csv"), "w") as f:
        f.write("x,sf,log_sf\n")
        for i in range(0, 4001):
            x = mpf(i) / 100
            s = sf(x)
            f.write(f"{r(x)},{r(s)},{r(log(s))}\n")
    with open(os.path.join(FIX, "normal_cdf.csv"), "w") as f:
        f.write("x,cdf,sf\n")
        for i in range(-800, 801):
            x = mpf(i) / 100
            f.write(f"{r(x)},{r(cdf(x))},{r(sf(x))}\n")

    e = mpf("0.1")
    d = mpf("0.2")
    vals = {}
    vals["cdf_1"] = cdf(1)
    vals["xhat_1_01_02"] = xhat(1, e, d)
    vals["breve_2_025"] = breve(2, mpf("0.25"))
    vals["lambda_bar_1_01_02"] = lam_bar(1, e, d)
    vals["bennett_1_1_01"] = exp(-1 / (mpf("1.1") + sqrt(mpf("1.2"))))
    vals["bernstein_1_1_01"] = exp(-1 / mpf("2.2"))
    vals["tail_sq_1_01_02"] = exp(-xhat(1, e, d) ** 2 / 2)
    vals["strengthened_0_025_0"] = mpf("0.5") * (1 + eps_log(mpf("0.25")))
    lb = lam_bar(1, e, d)
    xh = xhat(1, e, d)
    bracket = lb**2 * e + lb * d**2 + eps_log(e) + d
    vals["strengthened_1_01_02"] = sf(xh) * (1 + (1 + xh) * bracket)
    vals["strengthened_f_1_01_02"] = (1 / (1 + xh) + bracket) * exp(-xh**2 / 2)
    vals["nonuniform_0_01_01"] = eps_log(e) + e
    e5 = mpf("0.05")
    vals["nonuniform_2_005_0"] = 5 * eps_log(e5) * exp(-xhat(2, e5, 0) ** 2 / 2)
    vals["corollary_0_01"] = eps_log(e) + cbrt(mpf("0.01"))
    vals["corollary_uniform_0001_01"] = cbrt(mpf("0.001")) + e ** (mpf(2) / 3)
    vals["mourrat_p2"] = e ** (mpf(4) / 5)
    vals["mourrat_p3"] = mpf("1e-6") ** (mpf(1) / 7)
    vals["uniform_05_0"] = eps_log(mpf("0.5"))
    vals["wang_jing_100"] = mpf("0.2") * exp(mpf("-0.5"))
    vals["mills_lower_0"] = 1 / sqrt(2 * pi)
    vals["mills_upper_0"] = 1 / sqrt(pi)
    for xm in (1, 10):
        vals[f"mills_scaled_log_{xm}"] = log(sf(xm)) + mpf(xm) ** 2 / 2
    vals["psi_4_half_l1"] = 4 * log(cosh(mpf("0.5")))
    vals["b_4_half_l1"] = 4 * mpf("0.5") * tanh(mpf("0.5"))
    vals["tilt_up_half"] = exp(mpf("0.5")) / (2 * cosh(mpf("0.5")))
    vals["z_975"] = findroot(lambda z: cdf(z) - mpf("0.975"), 1.96)
    el = eps_log(mpf("0.01"))
    vals["regression_xstar_095_001"] = findroot(
        lambda z: 2 * sf(z) * (1 + (1 + z**3) * el) - mpf("0.05"), 2.1
    )
    vals["self_norm_101"] = 1 / sqrt(3)
    with open(os.path.join(FIX, "scalars.csv"), "w") as f:
        f.write("name,value\n")
        for k, v in vals.items():
            f.write(f"{k},{r(v)}\n")


if __name__ == "__main__":
    main()
