"""Green function and Boettcher coordinate of w^2 + t by brute-force iteration
in 60-digit arithmetic (the raw limit, no telescoping), and the repelling
fixed point used by the continuation tests.
Run: python3 boettcher_oracle.py
"""
from mpmath import mp, mpc, mpf, log, sqrt

mp.dps = 60


def green_and_phi(t, w, n=12):
    x = mpc(w)
    lphi = log(x)
    for j in range(n):
        y = x * x + t
        lphi += mpf(2) ** (-(j + 1)) * log(y / (x * x))
        x = y
    return log(abs(x)) / mpf(2) ** n, mp.exp(lphi)


if __name__ == "__main__":
    for t, w in [(mpf("0.05"), 2), (mpf("0.05"), 100), (mpc("0.03", "0.04"), mpc("1.3", "0.9"))]:
        g, phi = green_and_phi(t, w)
        print(f"t={t} w={w}: G={mp.nstr(g, 17)} phi={mp.nstr(phi, 17)}")
    print("fixed point t=0.05:", mp.nstr((1 + sqrt(mpf("0.8"))) / 2, 17), "multiplier", mp.nstr(1 + sqrt(mpf("0.8")), 17))
    print("sqrt(0.95):", mp.nstr(sqrt(mpf("0.95")), 17))
