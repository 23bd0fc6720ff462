import pytest

from guruscreen.fixtures import generate_universe, write_benchmarks, generate_benchmarks
from guruscreen.ingest import Fundamentals, QuarterLabel, load_bars, load_fundamentals, write_bars, write_fundamentals

START, END = QuarterLabel(2022, 1), QuarterLabel(2025, 2)


@pytest.fixture(scope="session")
def universe():
    return generate_universe(10, START, END, 42)


@pytest.fixture(scope="session")
def book(universe):
    return Fundamentals(universe[0])


@pytest.fixture(scope="session")
def bars(universe):
    return universe[1]


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory, universe):
    d = tmp_path_factory.mktemp("fixture")
    rows, bars = universe
    write_fundamentals(rows, d / "fundamentals.csv")
    write_bars(bars, d / "prices.csv")
    write_benchmarks(generate_benchmarks(bars, 43), d / "benchmarks.csv")
    return d


# one PASS/FAIL line per acceptance criterion in the terminal summary
_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    title = getattr(item.function, "criterion", None)
    if title is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.outcome == "passed"
        if title not in _ACCEPTANCE or not ok:
            _ACCEPTANCE[title] = ok


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for title in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if _ACCEPTANCE[title] else 'FAIL'}  {title}")
