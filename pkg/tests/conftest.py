import pytest

from swipt_aoa.channel import ChannelParams, SuccessProbs, success_probs
from swipt_aoa.scenario import bundled_scenario

# two-decimal probabilities as printed for the two setups
PRINTED = {
    "setup1": SuccessProbs(1.0, 0.62, 0.20, 0.23),
    "setup2": SuccessProbs(1.0, 0.34, 0.60, 0.63),
}


def make_params(d2=2.0, **kw):
    base = dict(p_tx1=0.01, p_tx2=1.0, d1=1.0, d2=d2, alpha1=4.0, alpha2=4.0,
                upsilon1=1.0, upsilon2=1.0, p_noise=1e-8, rho=0.99, gamma_d=0.1, gamma_e=0.1)
    base.update(kw)
    return ChannelParams(**base)


@pytest.fixture(scope="session")
def params1():
    return bundled_scenario("setup1").channel


@pytest.fixture(scope="session")
def params2():
    return bundled_scenario("setup2").channel


@pytest.fixture(scope="session")
def succ1(params1):
    return success_probs(params1)


@pytest.fixture(scope="session")
def succ2(params2):
    return success_probs(params2)


@pytest.fixture(params=["setup1", "setup2"])
def printed(request):
    return PRINTED[request.param]


# one summary line per acceptance criterion, echoed after the test run
_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    def record(criterion, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
