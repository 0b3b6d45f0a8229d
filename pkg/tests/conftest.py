import pytest

from todashock.lattice import step_profile
from todashock.surface import surface_context

# Period data of the two-band surfaces, from an independent mpmath computation
# in the lambda plane (50 digits), frozen here.
SURFACE_ORACLE = {
    (0.5, -4.0): dict(c=0.46371098728610799, gamma1=4.507360110379501, gamma2=-2.0,
                      tau_im=0.78170096134805575, A_inf=0.25, cap=1.4142135623730951),
    (0.8, -3.5): dict(c=0.47288719456277435, gamma1=2.1839550102010145,
                      gamma2=-1.4430616597222822, tau_im=1.0356479995254934,
                      A_inf=0.21793095717150492, cap=1.5076161761784192),
    (0.3, -2.0): dict(c=0.2782611763203788, gamma1=1.4663482648091738,
                      gamma2=-1.2026293262911664, tau_im=1.1232365568519229,
                      A_inf=0.286023365521223, cap=0.89413221189946649),
}

# synthetic multi-eigenvalue profiles: (left background, overrides, number of gap eigenvalues)
MULTI_PROFILES = {
    "A": ((0.5, -4.0), {0: -1.7, 6: -2.2}, 2),
    "B": ((0.5, -4.0), {0: -1.7, 5: -2.4, 12: -1.9}, 3),
    "E": ((0.6, -3.6), {0: -1.6, 4: -2.1, 9: -2.5}, 2),
}

_ACCEPTANCE_LINES: dict = {}


def record_acceptance(number: int, ok: bool, detail: str):
    _ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def ctx_fig1():
    return surface_context(0.5, -4.0)


@pytest.fixture(scope="session")
def ctx_b():
    return surface_context(0.8, -3.5)


@pytest.fixture(scope="session")
def fig1_small():
    return step_profile(-20, 20, (0.5, -4.0), (0.5, 0.0), {0: -1.7})


@pytest.fixture(scope="session")
def multi_lattices():
    return {k: step_profile(-120, 120, bg, (0.5, 0.0), ov)
            for k, (bg, ov, _) in MULTI_PROFILES.items()}
