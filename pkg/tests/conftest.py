import numpy as np
import pytest

from ga_tamp.geom import box_mesh, cylinder_mesh
from ga_tamp.geom.mesh import prism_mesh
from ga_tamp.grasp import Gripper

L_POLYGON = np.array([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], dtype=float) * 0.025


@pytest.fixture(scope="session")
def cube_mesh():
    return box_mesh((0.05, 0.05, 0.05))


@pytest.fixture(scope="session")
def l_block_mesh():
    return prism_mesh(L_POLYGON - L_POLYGON.mean(axis=0), 0.03)


@pytest.fixture(scope="session")
def cylinder_approx_mesh():
    return cylinder_mesh(0.025, 0.08, 16)


@pytest.fixture(scope="session")
def gripper():
    return Gripper()


# ---------------------------------------------------------------- acceptance summary

_CRITERIA = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    if report.when == "call" or report.failed:
        verdict = "PASS" if report.passed else "FAIL"
        old_verdict, old_detail = _CRITERIA.get(key, ("PASS", ""))
        detail = "; ".join(d for d in (old_detail, props.get("detail", "")) if d)
        _CRITERIA[key] = ("FAIL" if "FAIL" in (verdict, old_verdict) else "PASS", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k.split()[0])):
        verdict, detail = _CRITERIA[key]
        terminalreporter.write_line(f"criterion {key}: {verdict}" + (f"  [{detail}]" if detail else ""))
