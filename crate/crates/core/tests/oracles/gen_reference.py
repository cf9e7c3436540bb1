"""Reference values for the Rust test suite.

Computed with mpmath and the `trueskill` PyPI package (mpmath backend). The
Glicko-2 reference is a direct high-precision transcription of Glickman's
published step list, written independently of the Rust code. Re-run with:

    python3 gen_reference.py > reference.json
"""
import json
import random

import mpmath as mp
import trueskill

mp.mp.dps = 40


def elo_expected(dr, c):
    return 1 / (1 + mp.power(10, -mp.mpf(dr) / c))


def glicko_win_prob(ra, rda, rb, rdb):
    phi = mp.sqrt(mp.mpf(rda) ** 2 + mp.mpf(rdb) ** 2) / mp.mpf("173.7178")
    g = 1 / mp.sqrt(1 + 3 * phi ** 2 / mp.pi ** 2)
    return 1 / (1 + mp.power(10, -g * (mp.mpf(ra) - rb) / 400))


def ncdf(x):
    return mp.ncdf(x)


SCALE = mp.mpf("173.7178")


def glicko2_step(r, rd, vol, opps, tau, eps=mp.mpf("1e-30")):
    mu = (mp.mpf(r) - 1500) / SCALE
    phi = mp.mpf(rd) / SCALE
    g = lambda p: 1 / mp.sqrt(1 + 3 * p ** 2 / mp.pi ** 2)
    E = lambda m, mj, pj: 1 / (1 + mp.exp(-g(pj) * (m - mj)))
    js = [((mp.mpf(rj) - 1500) / SCALE, mp.mpf(rdj) / SCALE, mp.mpf(s)) for rj, rdj, s in opps]
    v = 1 / sum(g(pj) ** 2 * E(mu, mj, pj) * (1 - E(mu, mj, pj)) for mj, pj, _ in js)
    delta = v * sum(g(pj) * (s - E(mu, mj, pj)) for mj, pj, s in js)
    a = mp.log(mp.mpf(vol) ** 2)
    f = lambda x: mp.exp(x) * (delta ** 2 - phi ** 2 - v - mp.exp(x)) / (2 * (phi ** 2 + v + mp.exp(x)) ** 2) - (x - a) / mp.mpf(tau) ** 2
    # high-precision root by bisection-safe findroot
    A = a
    if delta ** 2 > phi ** 2 + v:
        B = mp.log(delta ** 2 - phi ** 2 - v)
    else:
        k = 1
        while f(a - k * tau) < 0:
            k += 1
        B = a - k * tau
    root = mp.findroot(f, (A, B), solver="anderson")
    sigma_new = mp.exp(root / 2)
    phi_star = mp.sqrt(phi ** 2 + sigma_new ** 2)
    phi_new = 1 / mp.sqrt(1 / phi_star ** 2 + 1 / v)
    mu_new = mu + phi_new ** 2 * sum(g(pj) * (s - E(mu, mj, pj)) for mj, pj, s in js)
    return {"rating": float(SCALE * mu_new + 1500), "rd": float(SCALE * phi_new), "vol": float(sigma_new)}


def glickman_example():
    return glicko2_step(1500, 200, 0.06, [(1400, 30, 1), (1550, 100, 0), (1700, 300, 0)], 0.5)


def glicko2_random(n, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        p = (rng.uniform(1200, 1800), rng.uniform(40, 350), rng.uniform(0.03, 0.09))
        o = (rng.uniform(1200, 1800), rng.uniform(40, 350), rng.uniform(0.03, 0.09))
        s = rng.choice([0.0, 0.5, 1.0])
        tau = rng.uniform(0.3, 1.2)
        post = glicko2_step(p[0], p[1], p[2], [(o[0], o[1], s)], tau)
        out.append({"player": list(p), "opponent": list(o), "score": s, "tau": tau, "post": post})
    return out


def trueskill_cases(n, seed):
    env = trueskill.TrueSkill(mu=25.0, sigma=8.333, beta=2.0, tau=0.2,
                              draw_probability=0.0, backend="mpmath")
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        a = (rng.uniform(0, 50), rng.uniform(0.5, 10.0))
        b = (rng.uniform(0, 50), rng.uniform(0.5, 10.0))
        a_wins = rng.random() < 0.5
        ra, rb = env.create_rating(*a), env.create_rating(*b)
        if a_wins:
            na, nb = env.rate_1vs1(ra, rb)
        else:
            nb, na = env.rate_1vs1(rb, ra)
        out.append({
            "a": list(a), "b": list(b), "a_wins": a_wins,
            "a_post": [float(na.mu), float(na.sigma)],
            "b_post": [float(nb.mu), float(nb.sigma)],
        })
    return out


def trueskill_default_case():
    env = trueskill.TrueSkill(mu=25.0, sigma=8.333, beta=2.0, tau=0.2,
                              draw_probability=0.0, backend="mpmath")
    na, nb = env.rate_1vs1(env.create_rating(), env.create_rating())
    return {"a_post": [float(na.mu), float(na.sigma)],
            "b_post": [float(nb.mu), float(nb.sigma)]}


ref = {
    "expected_mov_200_home": float(10 * mp.tanh(1) + 3),
    "elo_expected_400": float(elo_expected(400, 400)),
    "glicko_win_prob_1700_1500_rd50": float(glicko_win_prob(1700, 50, 1500, 50)),
    "trueskill_win_prob_30_25": float(ncdf(5 / mp.sqrt(2 * 4 + 2 * mp.mpf(8.333) ** 2))),
    "glickman_example": glickman_example(),
    "glicko2_random": glicko2_random(50, 7),
    "trueskill_default_a_wins": trueskill_default_case(),
    "trueskill_random": trueskill_cases(100, 20240611),
}
print(json.dumps(ref, indent=1))
