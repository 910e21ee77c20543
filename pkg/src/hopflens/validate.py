"""Cross-validation battery: every core quantity checked two independent ways.

Each check pits a closed-form implementation against an independently
constructed oracle (matrix inversion identity, finite-difference Christoffel
geodesics, finite-difference curvature, topological-charge quadrature vs
Gauss linking, exact profile solution). All checks resolve the functions
under test through their modules at call time, so a deliberately corrupted
implementation (mutation testing) is caught rather than masked by caching.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

import hopflens.effective_geometry as effective_geometry
import hopflens.geodesics as geodesics
import hopflens.hopf_map as hopf_map


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    detail: str


def check_inverse_identity(n: int = 1000, seed: int = 0) -> CheckResult:
    """metric_cartesian must invert inv_metric_cartesian pointwise."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-10.0, 10.0, (n, 3))
    prod = np.einsum('...ij,...jk->...ik',
                     effective_geometry.metric_cartesian(pts),
                     effective_geometry.inv_metric_cartesian(pts))
    dev = float(np.abs(prod - np.eye(3)).max())
    tol = 1e-12
    return CheckResult("inverse_identity", dev < tol, dev, tol,
                       f"max |m m^-1 - I| over {n} random points in [-10,10]^3")


def check_rhs_agreement(n: int = 1000, seed: int = 1) -> CheckResult:
    """Closed-form geodesic acceleration vs finite-difference Christoffel route."""
    rng = np.random.default_rng(seed)
    pos = rng.uniform(-5.0, 5.0, (n, 3))
    vel = rng.normal(size=(n, 3))
    dev = float(np.abs(geodesics.rhs_closed_form(pos, vel)
                       - geodesics.rhs_christoffel(pos, vel)).max())
    tol = 1e-6
    return CheckResult("rhs_agreement", dev < tol, dev, tol,
                       f"max |closed-form - FD Christoffel| over {n} random states")


def check_curvature_oracle() -> CheckResult:
    """Closed-form Ricci scalar vs second-order finite-difference curvature."""
    axis = np.linspace(-2.0, 2.0, 5)
    devs = []
    for x in axis:
        for y in axis:
            for z in axis:
                p = np.array([x, y, z])
                exact = float(effective_geometry.ricci_scalar(p))
                numeric = effective_geometry.ricci_scalar_numeric(p)
                devs.append(abs(numeric - exact) / max(1.0, abs(exact)))
    dev = float(max(devs))
    tol = 1e-5
    return CheckResult("curvature_oracle", dev < tol, dev, tol,
                       "max relative |FD Ricci - closed form| on a 5^3 grid in [-2,2]^3")


def check_charge() -> CheckResult:
    """Whitehead quadrature and Gauss linking must both give Q = a*b."""
    devs = []
    for a, b in ((1, 1), (2, 1)):
        cfg = hopf_map.AnsatzConfig(a=a, b=b)
        q = hopf_map.hopf_charge_whitehead(cfg)
        lk = hopf_map.linking_number_refined(cfg)
        devs.append(abs(q - a * b) / (a * b))
        devs.append(abs(lk - a * b) / (a * b))
    dev = float(max(devs))
    tol = 0.01
    return CheckResult("charge", dev < tol, dev, tol,
                       "max relative deviation of quadrature and linking charge "
                       "from a*b for (a,b) in {(1,1),(2,1)}")


def check_profile_residual() -> CheckResult:
    """The sinh profile must satisfy the a=b=1 profile equation."""
    cfg = hopf_map.AnsatzConfig(a=1, b=1)
    eta = np.geomspace(1e-3, 10.0, 200)
    res = np.array([hopf_map.profile_residual(cfg, float(e)) for e in eta])
    dev = float(np.abs(res).max())
    tol = 1e-8
    return CheckResult("profile_residual", dev < tol, dev, tol,
                       "max |profile-equation residual| of f=sinh on eta in [1e-3,10]")


ALL_CHECKS = (
    check_inverse_identity,
    check_rhs_agreement,
    check_curvature_oracle,
    check_charge,
    check_profile_residual,
)


def run_battery() -> list[CheckResult]:
    return [check() for check in ALL_CHECKS]


def report(results: list[CheckResult]) -> tuple[str, dict]:
    """Human-readable text and a machine-readable dict for the same results."""
    lines = []
    for r in results:
        lines.append("%-18s %s  deviation=%.3e  tolerance=%.0e  (%s)"
                     % (r.name, "PASS" if r.passed else "FAIL",
                        r.deviation, r.tolerance, r.detail))
    ok = all(r.passed for r in results)
    lines.append("overall: %s" % ("PASS" if ok else "FAIL"))
    payload = {"checks": [asdict(r) for r in results], "passed": ok}
    return "\n".join(lines), payload


def main() -> int:
    results = run_battery()
    text, payload = report(results)
    print(text)
    print(json.dumps(payload))
    return 0 if payload["passed"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
