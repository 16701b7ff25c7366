#!/usr/bin/env python3
"""Independent straight-line reimplementation of the attacker sweep.

Regenerates tests/fixtures/sweep_oracle.csv:

    python3 tests/oracle/sweep_oracle.py > tests/fixtures/sweep_oracle.csv

Every value is printed with repr() so the Rust side can compare at 1e-9.
Nothing here is shared with the Rust implementation.
"""
import math

GAMMA = 0.5
N = 20
RECOMMENDER_TRUST = 1.0
U0 = 0.1
BASE_RATE = 0.5
BETA_W = 10.0


def hb(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def entropy_trust01(p):
    return 1.0 - 0.5 * hb(p) if p >= 0.5 else 0.5 * hb(p)


# --- DS-Trust -------------------------------------------------------------
# Masses are dicts keyed by frozenset over {"T", "N"}; the 4x4 product table
# is enumerated explicitly rather than using closed forms.
T, NT = "T", "N"
THETA = frozenset({T, NT})


def ds_combine(m1, m2):
    out = {frozenset({T}): 0.0, frozenset({NT}): 0.0, THETA: 0.0}
    k = 0.0
    for a, ma in m1.items():
        for b, mb in m2.items():
            inter = a & b
            if not inter:
                k += ma * mb
            else:
                out[inter] += ma * mb
    return {s: v / (1.0 - k) for s, v in out.items()}


def ds_trust(direct, reported):
    if direct >= GAMMA:
        m = {frozenset({T}): direct, frozenset({NT}): 0.0, THETA: 1.0 - direct}
    else:
        m = {frozenset({T}): 0.0, frozenset({NT}): 1.0 - direct, THETA: direct}
    for r in reported:
        idt = RECOMMENDER_TRUST * r
        s = direct + idt
        dissim = 0.0 if s == 0 else abs(direct - idt) / s
        if idt >= GAMMA:
            e = {frozenset({T}): 1.0 - dissim, frozenset({NT}): 0.0, THETA: dissim}
        else:
            e = {frozenset({T}): 0.0, frozenset({NT}): 1.0 - dissim, THETA: dissim}
        m = ds_combine(m, e)
    return m[frozenset({T})]


# --- linear opinion pooling ----------------------------------------------
def linear_pool(direct, reported):
    if not reported:
        return direct
    idts = [RECOMMENDER_TRUST * r for r in reported]
    return 0.5 * direct + 0.5 * (sum(idts) / len(idts))


# --- subjective logic -----------------------------------------------------
def opinion(t):
    return (t * (1 - U0), (1 - t) * (1 - U0), U0, BASE_RATE)


def subjective_logic(direct, reported):
    b, d, u, a = opinion(direct)
    rb, rd, ru, _ = opinion(RECOMMENDER_TRUST)
    for r in reported:
        tb, td, tu, ta = opinion(r)
        pb, pd, pu = rb * tb, rb * td, rd + ru + rb * tu
        k = u + pu - u * pu
        b, d, u = (b * pu + pb * u) / k, (d * pu + pd * u) / k, (u * pu) / k
    return b + a * u


# --- entropy-based probability model --------------------------------------
def entropy_model(direct, reported):
    alpha = direct * BETA_W + 1.0
    beta = (1.0 - direct) * BETA_W + 1.0
    for r in reported:
        p = RECOMMENDER_TRUST * r + (1 - RECOMMENDER_TRUST) * (1 - r)
        alpha += p * BETA_W + 1.0
        beta += (1.0 - p) * BETA_W + 1.0
    return entropy_trust01(alpha / (alpha + beta))


SCHEMES = [
    ("ds_trust", ds_trust),
    ("linear_pool", linear_pool),
    ("subjective_logic", subjective_logic),
    ("entropy_model", entropy_model),
]

SETUPS = [
    # attack, direct, lie, honest
    ("badmouth", 0.9, 0.1, 0.9),
    ("ballot_stuff", 0.1, 0.9, 0.1),
]


def main():
    print("population,scheme,attack,attackers,trust")
    for population in ("attackers_only", "fixed_pool"):
        for attack, direct, lie, honest in SETUPS:
            for name, fn in SCHEMES:
                for k in range(N + 1):
                    reported = [lie] * k
                    if population == "fixed_pool":
                        reported += [honest] * (N - k)
                    print(f"{population},{name},{attack},{k},{fn(direct, reported)!r}")


if __name__ == "__main__":
    main()
