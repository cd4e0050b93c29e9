"""Regenerate tests/data/oracles.json from brute-force mpmath definitions.

Nothing here imports ellhyp: every value comes from the defining products,
series or a high-precision trapezoid rule, evaluated at 30 digits.
"""
import json
import pathlib

import mpmath as mp

mp.mp.dps = 30
P, Q = mp.mpf("0.11"), mp.mpf("0.23")
OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "oracles.json"


def qpoch(z, p, n=200):
    out = mp.mpc(1)
    for j in range(n):
        out *= 1 - z * p ** j
    return out


def theta(z, p):
    return qpoch(z, p) * qpoch(p / z, p)


def gamma(z, p=P, q=Q, n=90):
    out = mp.mpc(1)
    for j in range(n):
        for k in range(n):
            w = p ** j * q ** k
            if abs(w) < mp.mpf(10) ** -34:
                break
            out *= (1 - p * q * w / z) / (1 - z * w)
    return out


def gpm(t, z):
    return gamma(t * z) * gamma(t / z)


def th1(u, tau):
    # standard theta_1(pi u | tau), odd, theta_1'(0) > 0 for tau on the imaginary axis
    return mp.jtheta(1, mp.pi * u, mp.exp(1j * mp.pi * tau))


def c(z):
    z = mp.mpc(z)
    return [float(z.real), float(z.imag)]


def main():
    o = {}
    o["qpoch_0.5"] = c(qpoch(mp.mpf("0.5"), P))
    o["theta_short_-1"] = c(theta(mp.mpf(-1), P))
    o["theta_pm_0.4_0.7i"] = c(theta(mp.mpf("0.4") * 0.7j, P) * theta(mp.mpf("0.4") / (0.7j), P))
    tau = 0.5j
    o["theta1_0.3_tau0.5i"] = c(th1(mp.mpf("0.3"), tau))
    o["theta3_0_tau0.5i"] = c(mp.jtheta(3, 0, mp.exp(1j * mp.pi * tau)))

    o["gamma_0.5"] = c(gamma(mp.mpf("0.5")))
    o["gamma_pm_0.4_e0.7i"] = c(gpm(mp.mpf("0.4"), mp.expj(mp.mpf("0.7"))))
    w1, w2 = mp.mpf(1), 0.5j
    u = mp.mpf("0.5")
    o["b22_0.5_1_0.5i"] = c(u * u / (w1 * w2) - u / w1 - u / w2 + w1 / (6 * w2) + w2 / (6 * w1) + mp.mpf(1) / 2)
    om = (mp.mpf(1), mp.sqrt(2), 1j)
    v = mp.mpf("0.7") - sum(om) / 2
    o["cubic_p_0.7"] = c(v * (v * v - sum(x * x for x in om) / 4) / (3 * om[0] * om[1] * om[2]))
    o["kappa_0.11_0.23"] = c(qpoch(P, P) * qpoch(Q, Q) / (4j * mp.pi))

    t = [mp.mpf("0.7"), mp.mpf("0.65"), mp.mpf("0.6"), mp.mpf("0.55") * mp.expj(mp.pi / 7), mp.mpf("0.5")]
    t.append(P * Q / mp.fprod(t))
    o["beta_closed_canonical"] = c(mp.fprod(gamma(t[j] * t[k]) for j in range(6) for k in range(j + 1, 6)))

    a, b = mp.mpf("0.5"), mp.mpf("0.4")
    s = mp.sqrt(P * Q / mp.mpf("0.9"))
    w = xi = mp.expj(mp.mpf("0.3"))
    r = mp.sqrt(P * Q / (a * b))
    o["phi_canonical"] = c(gpm(s * a, xi) * gpm(s * b, xi) * gpm(r * w, xi) * gpm(r / w, xi))

    # V at a canonical 8-set by the trapezoid rule on |z| = 1 (two grids, to show convergence)
    tv = [mp.mpf("0.42"), mp.mpf("0.45") * mp.expj(0.3), mp.mpf("0.38") * mp.expj(-0.5), mp.mpf("0.4"),
          mp.mpf("0.45") * mp.expj(1.1), mp.mpf("0.36") * mp.expj(-0.2), mp.mpf("0.41") * mp.expj(2)]
    tv.append((P * Q) ** 2 / mp.fprod(tv))

    def integrand(z):
        return mp.fprod(gpm(x, z) for x in tv) * theta(z ** -2, P) * theta(z ** 2, Q)

    def trap(n):
        # z -> 1/z symmetry: the integrand is real-symmetric on conjugate nodes only for real t, so use all nodes
        return mp.fsum(integrand(mp.expj(2 * mp.pi * k / n)) for k in range(n)) / n

    pref = qpoch(P, P) * qpoch(Q, Q) / 2
    v64, v96 = pref * trap(64), pref * trap(96)
    o["v_canonical_t"] = [c(x) for x in tv]
    o["v_canonical"] = c(v96)
    o["v_canonical_selfconv"] = float(abs(v96 - v64) / abs(v96))

    # Weierstrass-type potential -(log theta_1)'' at u = 0.3
    o["wp_0.3_tau0.5i"] = c(-mp.diff(lambda x: mp.log(th1(x, tau)), mp.mpf("0.3"), 2))

    # Bethe data at the canonical parameters; half periods (theta_1(2u) = 0) are excluded
    eta, btau = mp.mpc("0.07", "0.105"), 0.5j
    A = [mp.mpc("0.11", "0.05"), mp.mpc("0.23", "-0.07"), mp.mpc("-0.17", "0.12")]
    u1 = mp.mpc("0.23", "0.11")
    o["psi_n1_0.4"] = c(th1(mp.mpf("0.4") + u1, btau) * th1(mp.mpf("0.4") - u1, btau))
    a0 = A + [-sum(A)]
    o["bethe_n0_energy"] = [c(mp.fprod(th1(ak + al, btau) for ak in a0) / th1(2 * al, btau)) for al in a0]

    a1 = A + [-2 * eta - sum(A)]

    def bethe1(u):
        lhs = mp.fprod(th1(ak + u, btau) for ak in a1) / mp.fprod(th1(ak - u, btau) for ak in a1)
        rhs = th1(2 * u - eta, btau) * th1(-eta, btau) / (th1(2 * u + eta, btau) * th1(eta, btau))
        return lhs - rhs

    roots = []
    for x0 in (0.2 + 0.2j, 0.6 + 0.1j, 0.3 + 0.35j, 0.8 + 0.4j, 0.1 + 0.05j):
        try:
            r1 = mp.findroot(bethe1, mp.mpc(x0))
        except (ValueError, ZeroDivisionError):
            continue
        if abs(bethe1(r1)) < mp.mpf(10) ** -20 and abs(th1(r1, btau)) > 1e-6 and abs(th1(2 * r1, btau)) > 1e-6:
            roots.append(c(r1))
    o["bethe_n1_roots"] = roots

    OUT.write_text(json.dumps(o, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
