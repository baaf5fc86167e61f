import random

import pytest

from hnnpatterns.cayley import build_ball
from hnnpatterns.planes import TreeOracle
from hnnpatterns.presentation import Letter, g11, gw, inverse_word

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def G11():
    return g11()


@pytest.fixture(scope="session")
def GW():
    return gw()


@pytest.fixture(scope="session")
def ball5(G11):
    return build_ball(G11, 5)


@pytest.fixture(scope="session")
def gw_ball5(GW):
    return build_ball(GW, 5)


@pytest.fixture(scope="session")
def oracle(G11):
    return TreeOracle(G11)


@pytest.fixture(scope="session")
def gw_oracle(GW):
    return TreeOracle(GW)


# -- word helpers shared by the property tests --------------------------------


def relators(p):
    """Defining relators: commutators, base definitions and stable-letter relations."""
    out = []
    names = [g for g, _ in p.base_gens]
    for i, x in enumerate(names):
        for y in names[i + 1 :]:
            out.append((Letter(x), Letter(y), Letter(x, -1), Letter(y, -1)))
    basis = names[: p.rank]
    for g, vec in p.base_gens[p.rank :]:
        w = [Letter(g, -1)]
        for name, k in zip(basis, vec):
            w += [Letter(name, 1 if k > 0 else -1)] * abs(k)
        out.append(tuple(w))
    for r in p.stable_rules:
        s = Letter(r.name)
        u = [Letter(r.u_gen)] * r.u_power
        v = [Letter(r.v_gen, -1)] * r.v_power
        out.append((s.inverse(), *u, s, *v))
    return out


def random_word(p, rng: random.Random, length: int):
    return tuple(rng.choice(p.letters) for _ in range(length))


def random_relator(p, rng: random.Random):
    """A conjugate of a cyclic permutation of a relator or its inverse."""
    r = rng.choice(relators(p))
    if rng.random() < 0.5:
        r = inverse_word(r)
    i = rng.randrange(len(r))
    r = r[i:] + r[:i]
    c = random_word(p, rng, rng.randrange(3))
    return c + r + inverse_word(c)


def insert_relator(p, word, rng: random.Random):
    i = rng.randrange(len(word) + 1)
    return tuple(word[:i]) + random_relator(p, rng) + tuple(word[i:])
