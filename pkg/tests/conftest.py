import pytest
from hypothesis import settings

from markupqa.generation import TemplateBank
from markupqa.scenes import synth_scenes

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

EX1 = "In the <cam>back</cam>, <target><cnt>3</cnt> <obj>trucks</obj></target>are detected."
EX2 = "The closest object to the ego-car is a <obj>car</obj> located at coordinates <loc>(3.43, 1.41)</loc>."


@pytest.fixture(scope="session")
def bank():
    return TemplateBank.default()


@pytest.fixture(scope="session")
def scenes_200():
    return synth_scenes(11, 200)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
