"""Straight-line transcript of the first SDD rounds on the canonical instance.

Written without reference to the C++ sources: it re-derives routes, powers,
the z box, the three subproblem optima (root finding on derivatives with
scipy) and the price updates, then stores the result as JSON.

    python3 gen_sdd_rounds.py ../../data/canonical_instance.json sdd_rounds.json
"""

import json
import math
import sys

from scipy.optimize import brentq

GAMMA = PHI = 0.8
ALPHA, BETA, VARPI, KAPPA = 1.1, 9.0, 3.2768e32, 20.0
X_MIN, X_MAX, R_MIN, R_MAX = 0.1e6, 2.0e6, 0.9, 1.0
R_FLOOR = 1e-9
ROUNDS = 3
STEP = {"lambda": (1.0, 50.0), "mu": (300.0, 50.0), "nu": (20.0, 1000.0)}


def argmax(df, lo, hi):
    if df(lo) <= 0:
        return lo
    if df(hi) >= 0:
        return hi
    return brentq(df, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def main(inst_path, out_path):
    doc = json.load(open(inst_path))
    sensors = [n["id"] for n in doc["nodes"] if n["kind"] == "sensor"]
    energy = {n["id"]: float(n["energy"]) for n in doc["nodes"] if n["kind"] == "sensor"}
    links = {l["id"]: l for l in doc["links"]}
    link_order = [l["id"] for l in doc["links"]]
    radio = doc["radio"]
    pt = {lid: radio["psi"] + radio["sigma"] * l["distance"] ** radio["theta"] for lid, l in links.items()}
    rx = radio["rx"]
    routes = doc["routes"]

    pairs = [(s, lid) for s in sensors for lid in routes[s]]
    on_link = {lid: [s for s in sensors if lid in routes[s]] for lid in link_order}

    def power(s, x):
        p = 0.0
        for lid in link_order:
            users = on_link[lid]
            if links[lid]["head"] == s:
                p += rx * sum(x[u] for u in users)
            if links[lid]["tail"] == s:
                p += pt[lid] * sum(x[u] for u in users)
        return p

    zlo = {s: power(s, {u: X_MIN for u in sensors}) / energy[s] for s in sensors}
    zhi = {s: power(s, {u: X_MAX for u in sensors}) / energy[s] for s in sensors}

    lam = {pr: 1.0 for pr in pairs}
    mu = {s: 1.0 for s in sensors}
    nu0 = 1e-2 * sum(pt[l] for l in link_order) / len(link_order)
    nu = {s: nu0 for s in sensors}

    transcript = []
    for T in range(ROUNDS):
        rec, lam, mu, nu = one_round(T, lam, mu, nu, sensors, energy, links, link_order, pt, rx, routes, pairs,
                                     on_link, power, zlo, zhi)
        transcript.append(rec)
    with open(out_path, "w") as f:
        json.dump({"gamma": GAMMA, "phi": PHI, "pairs": [[s, l] for s, l in pairs], "rounds": transcript}, f,
                  indent=1)
        f.write("\n")


def one_round(T, lam, mu, nu, sensors, energy, links, link_order, pt, rx, routes, pairs, on_link, power, zlo, zhi):
    a1 = 1.0 - ALPHA
    ux = lambda x: a1 * x ** (-ALPHA) / (X_MAX ** a1 - X_MIN ** a1)
    uR = lambda R: a1 * R ** (-ALPHA) / (R_MAX ** a1 - R_MIN ** a1)

    x, R, z = {}, {}, {}
    for s in sensors:
        lam_e2e = sum(lam[(s, l)] for l in routes[s])
        # per-bit price: own transmit plus receive+forward at each relay
        K = nu[s] * pt[routes[s][0]]
        for k in range(1, len(routes[s])):
            lid = routes[s][k]
            K += nu[links[lid]["tail"]] * (rx + pt[lid])
        dx = lambda xl: GAMMA * PHI * ux(math.exp(xl)) * math.exp(xl) - lam_e2e - K * math.exp(xl)
        x[s] = math.exp(argmax(dx, math.log(X_MIN), math.log(X_MAX)))
        dR = lambda r: GAMMA * (1 - PHI) * uR(r) - mu[s]
        R[s] = argmax(dR, R_MIN, R_MAX)
        dz = lambda zz: nu[s] * energy[s] - (1 - GAMMA) * VARPI * zz ** (BETA - 2)
        z[s] = argmax(dz, zlo[s], zhi[s])

    c, r = {}, {}
    for lid in link_order:
        users = on_link[lid]
        tot = sum(lam[(u, lid)] for u in users)
        for u in users:
            c[(u, lid)] = lam[(u, lid)] * links[lid]["capacity"] * 1e6 / tot
            l_, m_ = lam[(u, lid)], mu[u]
            dr = lambda rr: l_ / rr - m_ * 0.5 * KAPPA * math.exp(-KAPPA * (1 - rr))
            r[(u, lid)] = argmax(dr, R_FLOOR, 1.0)

    step = lambda k: STEP[k][0] / (STEP[k][1] + T)
    new_lam = {pr: max(0.0, lam[pr] - step("lambda") * (math.log(c[pr]) + math.log(r[pr]) - math.log(x[pr[0]])))
               for pr in pairs}
    new_mu, new_nu = {}, {}
    for s in sensors:
        Rs = 1.0 - sum(0.5 * math.exp(-KAPPA * (1 - r[(s, l)])) for l in routes[s])
        new_mu[s] = max(0.0, mu[s] - step("mu") * (Rs - R[s]))
        weight = max(1 - GAMMA, 1e-2) * VARPI * (BETA - 2) * z[s] ** (BETA - 3) / energy[s] ** 2
        new_nu[s] = max(0.0, nu[s] - step("nu") * weight * (energy[s] * z[s] - power(s, x)))

    rec = {
        "t": T,
        "x": [x[s] for s in sensors],
        "R": [R[s] for s in sensors],
        "z": [z[s] for s in sensors],
        "c": [c[p] for p in pairs],
        "r": [r[p] for p in pairs],
        "lambda": [new_lam[p] for p in pairs],
        "mu": [new_mu[s] for s in sensors],
        "nu": [new_nu[s] for s in sensors],
    }
    return rec, new_lam, new_mu, new_nu


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
