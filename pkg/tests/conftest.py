from pathlib import Path
from typing import no_type_check

import pytest

from src.formula.heaps import Problem
from src.sidfile import parse_problem

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@no_type_check
def pytest_addoption(parser) -> None:
    parser.addoption("--slow", action="store_true", default=False, help="run full decision procedure runs")
    parser.addoption("--differential", action="store_true", default=False, help="run the differential fuzz campaign")


@no_type_check
def pytest_collection_modifyitems(config, items) -> None:
    for option in ("slow", "differential"):
        if config.getoption(f"--{option}"):
            continue
        skip = pytest.mark.skip(reason=f"need --{option} option to run")
        for item in items:
            if option in item.keywords:
                item.add_marker(skip)


def load_sample(name: str) -> Problem:
    return parse_problem((SAMPLES / f"{name}.sid").read_text())
